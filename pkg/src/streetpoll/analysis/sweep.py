"""Re-scoring after dropping short interviews."""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..captions import count_tokens
from ..corpus import Corpus
from ..eval import CONDITIONS, TASKS, UNDEFINED, Metrics, Outcome, Result, compute_metrics, round_half_up

TokenCounts = Mapping[tuple[str, int], int]


def respondent_token_counts(corpus: Corpus) -> dict[tuple[str, int], int]:
    """Token count of each interview segment, keyed by ``(video_id, interview index)``."""
    out = {}
    for vid, transcript in corpus.processed.items():
        for i, seg in enumerate(transcript.segments, start=1):
            out[(vid, i)] = count_tokens(seg)
    return out


def default_thresholds(token_counts: TokenCounts) -> list[int]:
    """0 plus the deciles of the observed per-interview token counts."""
    values = sorted(token_counts.values())
    if len(values) < 2:
        return [0]
    cuts = statistics.quantiles(values, n=10, method="inclusive")
    return sorted({0, *(int(c) for c in cuts)})


@dataclass(frozen=True)
class SweepCell:
    retained: int
    predicted: int
    candidate: Metrics
    concept: Metrics

    @property
    def predicted_fraction(self) -> float | None:
        return self.predicted / self.retained if self.retained else None


@dataclass(frozen=True)
class SweepRow:
    min_tokens: int
    respondents_retained: int
    cells: Mapping[str, SweepCell]

    def metrics(self, condition: str, task: str) -> Metrics:
        cell = self.cells[condition]
        return cell.candidate if task == "candidate" else cell.concept


def _tokens_of(o: Outcome, token_counts: TokenCounts) -> int:
    return token_counts[(o.respondent.video_id, o.respondent.citizen_key[0])]


def threshold_sweep(
    corpus: Corpus,
    outcomes: Mapping[str, Sequence[Outcome]],
    thresholds: Sequence[int] | None = None,
    token_counts: TokenCounts | None = None,
) -> list[SweepRow]:
    """One row per threshold, keeping respondents whose interview has >= t tokens."""
    token_counts = token_counts if token_counts is not None else respondent_token_counts(corpus)
    if thresholds is None:
        thresholds = default_thresholds(token_counts)
    rows = []
    for t in thresholds:
        retained = sum(
            1 for r in corpus.ground_truth if token_counts.get((r.video_id, r.citizen_key[0]), 0) >= t
        )
        cells = {}
        for cond, outs in outcomes.items():
            kept = [o for o in outs if _tokens_of(o, token_counts) >= t]
            predicted = sum(1 for o in kept if o.candidate_outcome in (Result.CORRECT, Result.WRONG))
            cells[cond] = SweepCell(
                len(kept), predicted, compute_metrics(kept, "candidate"), compute_metrics(kept, "concept")
            )
        rows.append(SweepRow(t, retained, cells))
    return rows


def render_sweep(rows: Sequence[SweepRow]) -> str:
    conditions = [c for c in CONDITIONS if rows and c in rows[0].cells]
    header = ["min_tokens", "retained"]
    for cond in conditions:
        header += [f"{cond}_predicted_fraction"]
        for task in TASKS:
            header += [f"{cond}_{task}_precision", f"{cond}_{task}_recall"]
    lines = ["\t".join(header)]
    for row in rows:
        line = [str(row.min_tokens), str(row.respondents_retained)]
        for cond in conditions:
            cell = row.cells[cond]
            line.append(round_half_up(cell.predicted, cell.retained, 4) if cell.retained else UNDEFINED)
            for task in TASKS:
                m = row.metrics(cond, task)
                d_p, d_r = m.tp + m.fp, m.tp + m.fn
                line.append(round_half_up(m.tp, d_p, 4) if d_p else UNDEFINED)
                line.append(round_half_up(m.tp, d_r, 4) if d_r else UNDEFINED)
        lines.append("\t".join(line))
    return "\n".join(lines) + "\n"
