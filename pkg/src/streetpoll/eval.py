"""Scoring annotation batches against ground truth.

Counting convention: a correct prediction is a true positive, a wrong one is
both a false positive and a false negative, and a respondent the backend never
produced a row for is a false negative only. Precision therefore never drops
below recall, and the two coincide when every respondent gets a prediction.
"""

from __future__ import annotations

import enum
import io
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .corpus import (
    NAMED_CONCEPTS,
    Candidate,
    CandidateShares,
    Concept,
    Corpus,
    GroundTruthRecord,
    VideoRecord,
    apply_label_space,
    candidate_shares,
)

if TYPE_CHECKING:
    from .annotate.types import AnnotationBatch, AnnotationRow

log = logging.getLogger(__name__)

CONDITIONS = ("raw", "processed")
TASKS = ("candidate", "concept")
UNDEFINED = "—"
ABSENT = "absent"


class Result(str, enum.Enum):
    CORRECT = "CORRECT"
    WRONG = "WRONG"
    MISSING = "MISSING"
    NOT_APPLICABLE = "NOT_APPLICABLE"


@dataclass(frozen=True)
class Outcome:
    respondent: GroundTruthRecord
    truth_candidate: Candidate
    candidate_outcome: Result
    concept_outcome: Result
    predicted_candidate: Candidate | None = None
    predicted_concept: Concept | None = None


@dataclass(frozen=True)
class EvalCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0


def round_half_up(num: int, den: int, places: int = 2) -> str:
    """Exact half-up rounding of ``num/den`` to a fixed-point string."""
    scale = 10**places
    q = (2 * num * scale + den) // (2 * den)
    whole, frac = divmod(q, scale)
    return f"{whole}.{frac:0{places}d}" if places else str(whole)


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int

    @property
    def counts(self) -> EvalCounts:
        return EvalCounts(self.tp, self.fp, self.fn)

    @property
    def precision(self) -> float | None:
        d = self.tp + self.fp
        return self.tp / d if d else None

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def zero_denominator(self) -> bool:
        return self.tp + self.fn == 0

    @property
    def precision_fraction(self) -> Fraction | None:
        d = self.tp + self.fp
        return Fraction(self.tp, d) if d else None

    @property
    def recall_fraction(self) -> Fraction:
        d = self.tp + self.fn
        return Fraction(self.tp, d) if d else Fraction(0)

    def format_precision(self) -> str:
        d = self.tp + self.fp
        return round_half_up(self.tp, d) if d else UNDEFINED

    def format_recall(self) -> str:
        d = self.tp + self.fn
        return round_half_up(self.tp, d) if d else UNDEFINED


def _field(task: str) -> str:
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}")
    return "candidate_outcome" if task == "candidate" else "concept_outcome"


def compute_metrics(outcomes: Iterable[Outcome], task: str) -> Metrics:
    attr = _field(task)
    tp = fp = fn = 0
    for o in outcomes:
        r = getattr(o, attr)
        if r is Result.CORRECT:
            tp += 1
        elif r is Result.WRONG:
            fp += 1
            fn += 1
        elif r is Result.MISSING:
            fn += 1
    return Metrics(tp, fp, fn)


@dataclass
class MatchResult:
    outcomes: list[Outcome]
    spurious: list["AnnotationRow"] = field(default_factory=list)


def _outcome(record: GroundTruthRecord, truth: Candidate, row, video: VideoRecord) -> Outcome:
    if row is None or row.candidate is None:
        cand_result, pred_cand = Result.MISSING, None
    else:
        pred_cand = apply_label_space(row.candidate, video)
        cand_result = Result.CORRECT if pred_cand == truth else Result.WRONG
    pred_concept = row.concept.value if row is not None and row.concept is not None else None
    if record.concept is None:
        concept_result = Result.NOT_APPLICABLE
    elif pred_concept is None:
        concept_result = Result.MISSING
    else:
        concept_result = Result.CORRECT if pred_concept == record.concept else Result.WRONG
    return Outcome(record, truth, cand_result, concept_result, pred_cand, pred_concept)


def match_batch(batch: "AnnotationBatch", truth: Sequence[GroundTruthRecord], video: VideoRecord) -> MatchResult:
    """Align backend rows with respondents and classify each respondent.

    Rows carrying an interview index are matched on ``(interview, citizen)``.
    Rows without one fill the still-unmatched respondents in transcript
    order. Unmatched respondents are MISSING; leftover rows are returned
    as spurious.
    """
    if batch.video_id and batch.video_id != video.video_id:
        raise ValueError(f"batch for {batch.video_id!r} scored against video {video.video_id!r}")
    ordered = sorted(truth, key=lambda r: r.citizen_key)
    by_key = {r.citizen_key: r for r in ordered}
    assigned: dict[tuple[int, int], object] = {}
    spurious = []
    unkeyed = []
    for row in batch.rows:
        interview, citizen = row.citizen_ref
        if interview is None:
            unkeyed.append(row)
        elif (interview, citizen) in by_key and (interview, citizen) not in assigned:
            assigned[(interview, citizen)] = row
        else:
            spurious.append(row)
    free = iter([r.citizen_key for r in ordered if r.citizen_key not in assigned])
    for row in unkeyed:
        key = next(free, None)
        if key is None:
            spurious.append(row)
        else:
            assigned[key] = row
    if spurious:
        log.warning("%s: %d spurious row(s) discarded", video.video_id, len(spurious))
    outcomes = [
        _outcome(r, apply_label_space(r.candidate, video), assigned.get(r.citizen_key), video) for r in ordered
    ]
    return MatchResult(outcomes, spurious)


@dataclass(frozen=True)
class ConceptResult:
    concept: Concept
    support: Mapping[Candidate, int]
    metrics: Metrics

    @property
    def total_support(self) -> int:
        return sum(self.support.values())


def per_concept_metrics(
    outcomes: Iterable[Outcome], concepts: Sequence[Concept] = NAMED_CONCEPTS
) -> dict[Concept, ConceptResult]:
    """Concept-task metrics restricted to each ground-truth concept, in inventory order."""
    groups: dict[Concept, list[Outcome]] = defaultdict(list)
    for o in outcomes:
        if o.respondent.concept is not None:
            groups[o.respondent.concept].append(o)
    out = {}
    for concept in concepts:
        group = groups.get(concept)
        if not group:
            continue
        support = {c: sum(1 for o in group if o.truth_candidate == c) for c in Candidate}
        out[concept] = ConceptResult(concept, support, compute_metrics(group, "concept"))
    return out


@dataclass(frozen=True)
class SliceRow:
    name: str
    kind: str  # "video" | "channel" | "all"
    respondents: int
    shares: CandidateShares | None
    # (condition, task) -> Metrics; None marks a condition with no batch
    metrics: Mapping[tuple[str, str], Metrics | None]


@dataclass(frozen=True)
class ConceptRow:
    concept: Concept
    explanation: str
    support: Mapping[Candidate, int]
    metrics: Mapping[str, Metrics | None]


@dataclass
class EvalReport:
    rows: list[SliceRow]
    concepts: list[ConceptRow]
    conditions: tuple[str, ...]
    warnings: list[str] = field(default_factory=list)

    def row(self, name: str, kind: str | None = None) -> SliceRow:
        for r in self.rows:
            if r.name == name and (kind is None or r.kind == kind):
                return r
        raise KeyError(name)

    @property
    def overall(self) -> SliceRow:
        return self.row("All", "all")


def slice_report(
    outcomes: Mapping[str, Sequence[Outcome]],
    corpus: Corpus,
    missing_videos: Mapping[str, Iterable[str]] | None = None,
) -> EvalReport:
    """Per-video, per-channel and overall metrics for every supplied condition.

    ``outcomes`` maps condition name to the outcome list of that run.
    ``missing_videos`` lists, per condition, videos that had no batch; their
    cells are reported absent and they drop out of that condition's aggregates.
    """
    conditions = tuple(c for c in CONDITIONS if c in outcomes) + tuple(
        c for c in outcomes if c not in CONDITIONS
    )
    missing = {c: set(missing_videos.get(c, ())) if missing_videos else set() for c in conditions}
    warnings = [f"{c}: no batch for video {v}" for c in conditions for v in sorted(missing[c])]

    def row_for(name: str, kind: str, videos: list[VideoRecord]) -> SliceRow:
        ids = {v.video_id for v in videos}
        truth = [r for r in corpus.ground_truth if r.video_id in ids]
        shares = candidate_shares(truth, corpus) if truth else None
        metrics: dict[tuple[str, str], Metrics | None] = {}
        for cond in conditions:
            present = ids - missing[cond]
            selected = [o for o in outcomes[cond] if o.respondent.video_id in present]
            for task in TASKS:
                metrics[(cond, task)] = compute_metrics(selected, task) if present else None
        return SliceRow(name, kind, len(truth), shares, metrics)

    rows = [row_for(v.location, "video", [v]) for v in corpus.videos]
    for channel in corpus.channels:
        rows.append(row_for(channel, "channel", [v for v in corpus.videos if v.channel == channel]))
    rows.append(row_for("All", "all", list(corpus.videos)))

    per_cond = {cond: per_concept_metrics(outcomes[cond], corpus.inventory.concepts) for cond in conditions}
    truth_support: dict[Concept, dict[Candidate, int]] = {}
    for r in corpus.ground_truth:
        if r.concept is not None and r.concept.named:
            slot = truth_support.setdefault(r.concept, {c: 0 for c in Candidate})
            slot[corpus.effective_candidate(r)] += 1
    concept_rows = []
    for concept in corpus.inventory.concepts:
        if concept not in truth_support:
            continue
        metrics_by_cond = {
            cond: (per_cond[cond][concept].metrics if concept in per_cond[cond] else None) for cond in conditions
        }
        concept_rows.append(
            ConceptRow(concept, corpus.inventory.explanation(concept), truth_support[concept], metrics_by_cond)
        )
    return EvalReport(rows, concept_rows, conditions, warnings)


def _cells(metrics: Metrics | None, which: str) -> str:
    if metrics is None:
        return ABSENT
    return metrics.format_precision() if which == "p" else metrics.format_recall()


TABLE1_COLUMNS = ("Location", "All", "RTE", "KK", "Ince", "Prec", "Prec*", "Rec", "Rec*", "CoP", "CoP*", "CoR", "CoR*")
TABLE2_COLUMNS = ("Concept", "Explanation", "RTE", "KK", "Ince", "Prec", "Prec*", "Rec", "Rec*")


def _tsv(rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    for row in rows:
        buf.write("\t".join(str(c).replace("\t", " ") for c in row) + "\n")
    return buf.getvalue()


def render_table1(report: EvalReport) -> str:
    """Tab-separated slice table; starred columns are the processed condition."""
    lines = [TABLE1_COLUMNS]
    for r in report.rows:
        m = r.metrics
        shares = r.shares.percents() if r.shares else {}
        line = [r.name, str(r.respondents)]
        line += [f"{shares[c]}%" if shares else "" for c in (Candidate.RTE, Candidate.KK, Candidate.INCE)]
        for task in TASKS:
            for which in ("p", "r"):
                for cond in CONDITIONS:
                    key = (cond, task)
                    line.append(_cells(m[key], which) if key in m else "")
        lines.append(line)
    return _tsv(lines)


def render_table2(report: EvalReport) -> str:
    lines = [TABLE2_COLUMNS]
    for r in report.concepts:
        line = [r.concept.display, r.explanation]
        line += [str(r.support[c]) for c in (Candidate.RTE, Candidate.KK, Candidate.INCE)]
        for which in ("p", "r"):
            for cond in CONDITIONS:
                line.append(_cells(r.metrics[cond], which) if cond in r.metrics else "")
        lines.append(line)
    return _tsv(lines)
