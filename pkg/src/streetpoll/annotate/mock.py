"""Deterministic rule-based stand-in for the chat model.

The mock reads citizen utterances, picks the first candidate keyword it sees
and, if the citizen gave a reason (``çünkü`` / ``because``), the first concept
keyword in that reason. A seeded coin flip per row swaps the candidate for a
wrong one, which is how tests dial in a known error rate.

For raw captions there are no speaker tags. The mock splits the cue stream at
reporter questions and cannot tell consecutive citizens in the same
interview apart when they back the same candidate, so those collapse into a
single row. That reproduces the missing-respondent failure mode of raw input.
"""

from __future__ import annotations

import random
from importlib import resources
from typing import Mapping, Sequence

from .._text import fold, keyword_hit, load_arrow_table, words
from ..captions import ProcessedTranscript, RawCaptionDocument
from ..corpus import Candidate, Concept, ConceptLabel
from .parse import CandidateSynonyms, render_reply
from .types import AnnotationRow

REASON_MARKERS = ("cunku", "because", "zira")
QUESTION_MARKERS = ("kime oy", "who will you vote", "whom will you vote")


def _concept_keywords() -> list[tuple[str, Concept]]:
    text = resources.files("streetpoll.data").joinpath("concept_keywords.txt").read_text("utf-8")
    return [(fold(k), Concept.from_name(v)) for _, k, v in load_arrow_table(text)]


_SYNONYMS: CandidateSynonyms | None = None
_CONCEPTS: list[tuple[str, Concept]] | None = None


def _tables() -> tuple[CandidateSynonyms, list[tuple[str, Concept]]]:
    global _SYNONYMS, _CONCEPTS
    if _SYNONYMS is None:
        _SYNONYMS = CandidateSynonyms.default()
        _CONCEPTS = _concept_keywords()
    return _SYNONYMS, _CONCEPTS  # type: ignore[return-value]


def _detect_candidate(text: str) -> tuple[Candidate, bool] | None:
    synonyms, _ = _tables()
    tokens = words(text)
    best: tuple[int, int, tuple[Candidate, bool]] | None = None
    for alias, value in synonyms.entries.items():
        parts = alias.split()
        for pos in range(len(tokens)):
            if keyword_hit(alias, tokens[pos : pos + len(parts)]):
                # earliest mention wins, longer alias breaks ties
                cand = (pos, -len(alias), value)
                if best is None or cand[:2] < best[:2]:
                    best = cand
                break
    return best[2] if best else None


def _split_reason(text: str) -> str | None:
    tokens = text.split()
    for i, tok in enumerate(tokens):
        if fold(tok).strip(",.;:!?") in REASON_MARKERS:
            reason = " ".join(tokens[i + 1 :]).strip(" ,.")
            return reason or None
    return None


def _detect_concept(reason: str) -> Concept:
    _, concepts = _tables()
    tokens = words(reason)
    for kw, concept in concepts:
        if keyword_hit(kw, tokens):
            return concept
    return Concept.OTHER


def _row_for(ref: tuple[int | None, int], text: str) -> AnnotationRow | None:
    hit = _detect_candidate(text)
    if hit is None:
        return None
    candidate, undecided = hit
    if undecided:
        return AnnotationRow(ref, candidate, "undecided", ConceptLabel(Concept.UNDECIDED, "undecided"), True)
    reason = _split_reason(text)
    if reason is None:
        return AnnotationRow(ref, candidate, None, None)
    concept = _detect_concept(reason)
    return AnnotationRow(ref, candidate, reason, ConceptLabel(concept, concept.value))


def _corrupt(
    rows: Sequence[AnnotationRow], error_rate: float, seed: int, overrides: Mapping[Candidate, Candidate] | None
) -> list[AnnotationRow]:
    if not 0.0 <= error_rate <= 1.0:
        raise ValueError("error_rate must be in [0, 1]")
    rng = random.Random(seed)
    overrides = dict(overrides or {})

    def effective(c: Candidate) -> Candidate:
        return overrides.get(c, c)

    out = []
    for row in rows:
        flip = rng.random() < error_rate
        if flip and row.candidate is not None:
            choices = [c for c in Candidate if effective(c) != effective(row.candidate)]
            wrong = rng.choice(choices)
            row = AnnotationRow(row.citizen_ref, wrong, row.reason, row.concept, False)
        out.append(row)
    return out


def mock_rows(
    transcript: ProcessedTranscript,
    error_rate: float = 0.0,
    seed: int = 0,
    overrides: Mapping[Candidate, Candidate] | None = None,
) -> list[AnnotationRow]:
    rows = []
    for i, seg in enumerate(transcript.segments, start=1):
        for c in range(1, seg.citizen_count + 1):
            row = _row_for((i, c), seg.citizen_text(c))
            rows.append(row or AnnotationRow((i, c), None, None, None))
    return _corrupt(rows, error_rate, seed, overrides)


def mock_rows_raw(
    doc: RawCaptionDocument,
    error_rate: float = 0.0,
    seed: int = 0,
    overrides: Mapping[Candidate, Candidate] | None = None,
) -> list[AnnotationRow]:
    groups: list[list[str]] = []
    current: list[str] | None = None
    last_candidate: tuple[Candidate, bool] | None = None
    for cue in doc.cues:
        folded = fold(cue.text)
        if any(q in folded for q in QUESTION_MARKERS):
            current, last_candidate = None, None
            continue
        hit = _detect_candidate(cue.text)
        if hit is not None and hit != last_candidate:
            current = [cue.text]
            groups.append(current)
            last_candidate = hit
        elif current is not None:
            current.append(cue.text)
    rows = []
    for k, texts in enumerate(groups, start=1):
        row = _row_for((None, k), " ".join(texts))
        if row is not None:
            rows.append(row)
    return _corrupt(rows, error_rate, seed, overrides)


def mock_annotate(
    transcript: ProcessedTranscript | RawCaptionDocument,
    error_rate: float = 0.0,
    seed: int = 0,
    overrides: Mapping[Candidate, Candidate] | None = None,
) -> str:
    """Full reply text (count plus every row) for a transcript."""
    if isinstance(transcript, RawCaptionDocument):
        rows = mock_rows_raw(transcript, error_rate, seed, overrides)
    else:
        rows = mock_rows(transcript, error_rate, seed, overrides)
    return render_reply(len(rows), rows)
