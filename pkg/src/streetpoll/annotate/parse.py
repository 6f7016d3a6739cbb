"""Reading and writing backend replies.

A reply has an ``Answer 1`` count followed by CSV rows of
``citizen, candidate, reason, concept``. Backends wrap the CSV in prose and
code fences, add or drop header lines and sometimes break a row; the parser
keeps every well-formed row and reports the rest.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple, Sequence

from .._text import fold, load_arrow_table, words
from ..analysis.concepts import MergeMap, canonicalize_concept
from ..corpus import Candidate, Concept, ConceptInventory, ConceptLabel
from .types import AnnotationRow, MalformedResponse

ROW_ARITY = 4
HEADER = ("citizen", "candidate", "reason", "concept")

_CITIZEN_REF = re.compile(
    r"^(?:(?:interview|roportaj|gorusme)\s*(?P<i>\d+)\s*[-/.:,]?\s*)?(?:citizen|vatandas)?\s*#?(?P<c>\d+)$"
)
_ANSWER_MARKER = re.compile(r"(?:answer|cevap)\s*(?P<n>\d+)\s*[:.)\-]?", re.IGNORECASE)
_INT = re.compile(r"\d+")
_NO_VALUE = {"", "-", "--", "n/a", "na", "none", "null", "unknown", "yok", "?"}


class CandidateSynonyms:
    """Alias table mapping backend candidate strings onto the four labels."""

    def __init__(self, entries: dict[str, tuple[Candidate, bool]]):
        self.entries = entries

    @classmethod
    def parse(cls, text: str) -> "CandidateSynonyms":
        entries = {}
        for lineno, alias, target in load_arrow_table(text):
            label, _, flag = target.partition(" ")
            try:
                entries[fold(alias)] = (Candidate.parse(label), flag.strip() == "undecided")
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(entries)

    @classmethod
    def default(cls) -> "CandidateSynonyms":
        return cls.parse(resources.files("streetpoll.data").joinpath("candidates.txt").read_text("utf-8"))

    def lookup(self, text: str) -> tuple[Candidate, bool] | None:
        """Exact folded alias first, then the longest alias found inside the text."""
        key = fold(text)
        if key in self.entries:
            return self.entries[key]
        tokens = words(text)
        joined = f" {' '.join(tokens)} "
        best = None
        for alias, value in self.entries.items():
            if f" {alias} " in joined and (best is None or len(alias) > len(best[0])):
                best = (alias, value)
        return best[1] if best else None


class ParsedReply(NamedTuple):
    declared_count: int | None
    rows: list[AnnotationRow]
    warnings: list[str]


@dataclass
class ReplyParser:
    """Configured parser; ``strict`` turns skipped rows into errors."""

    synonyms: CandidateSynonyms
    merge_map: MergeMap
    inventory: ConceptInventory | None = None
    strict: bool = False

    @classmethod
    def default(cls, strict: bool = False, inventory: ConceptInventory | None = None) -> "ReplyParser":
        return cls(CandidateSynonyms.default(), MergeMap.default(), inventory, strict)

    def parse(self, text: str, allow_empty: bool = False) -> ParsedReply:
        warnings: list[str] = []
        rows: list[AnnotationRow] = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            fields = _split_csv_line(line)
            if not fields:
                continue
            ref = parse_citizen_ref(fields[0])
            if ref is None:
                continue
            if len(fields) != ROW_ARITY:
                msg = f"line {lineno}: expected {ROW_ARITY} columns, got {len(fields)}: {line.strip()!r}"
                if self.strict:
                    raise MalformedResponse(msg, text)
                warnings.append(msg)
                continue
            rows.append(self._row(ref, fields[1:], lineno, warnings))
        if not rows and not allow_empty:
            raise MalformedResponse("no CSV rows found in reply", text)
        return ParsedReply(declared_count(text), rows, warnings)

    def _row(self, ref, fields: list[str], lineno: int, warnings: list[str]) -> AnnotationRow:
        cand_text, reason_text, concept_text = fields
        candidate, undecided = None, False
        if fold(cand_text) not in _NO_VALUE:
            hit = self.synonyms.lookup(cand_text)
            if hit is None:
                warnings.append(f"line {lineno}: unknown candidate {cand_text!r}, treated as no prediction")
            else:
                candidate, undecided = hit
        reason = None if fold(reason_text) in _NO_VALUE else reason_text
        if undecided:
            concept = ConceptLabel(Concept.UNDECIDED, concept_text)
        elif fold(concept_text) in _NO_VALUE:
            concept = None
        else:
            concept = canonicalize_concept(concept_text, self.merge_map, self.inventory)
        return AnnotationRow(ref, candidate, reason, concept, undecided)


def parse_citizen_ref(text: str) -> tuple[int | None, int] | None:
    m = _CITIZEN_REF.match(fold(text).strip())
    if not m or not fold(text).strip():
        return None
    interview = int(m["i"]) if m["i"] is not None else None
    citizen = int(m["c"])
    if citizen < 1 or (interview is not None and interview < 1):
        return None
    return interview, citizen


def declared_count(text: str) -> int | None:
    """First integer after the ``Answer 1`` marker, before any later marker."""
    markers = list(_ANSWER_MARKER.finditer(text))
    for idx, m in enumerate(markers):
        if m["n"] != "1":
            continue
        end = markers[idx + 1].start() if idx + 1 < len(markers) else len(text)
        found = _INT.search(text, m.end(), end)
        if found:
            return int(found.group())
    return None


def _split_csv_line(line: str) -> list[str]:
    stripped = line.strip()
    if not stripped or stripped.startswith("```"):
        return []
    try:
        fields = next(csv.reader([stripped], skipinitialspace=True))
    except (csv.Error, StopIteration):
        return []
    return [f.strip() for f in fields]


def parse_response(text: str, strict: bool = False, allow_empty: bool = False) -> ParsedReply:
    """Parse with the packaged synonym table and merge map."""
    return ReplyParser.default(strict).parse(text, allow_empty=allow_empty)


def format_citizen_ref(ref: tuple[int | None, int]) -> str:
    interview, citizen = ref
    return f"Citizen {citizen}" if interview is None else f"Interview {interview} Citizen {citizen}"


def format_candidate(row: AnnotationRow) -> str:
    if row.candidate is None:
        return ""
    if row.undecided:
        return "Undecided"
    return row.candidate.display


def render_rows(rows: Sequence[AnnotationRow], header: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if header:
        writer.writerow(HEADER)
    for row in rows:
        concept = "" if row.concept is None else (row.concept.raw_text or row.concept.value.value)
        writer.writerow([format_citizen_ref(row.citizen_ref), format_candidate(row), row.reason or "", concept])
    return buf.getvalue()


def render_reply(declared: int | None, rows: Sequence[AnnotationRow]) -> str:
    """A reply in the shape the prompt asks for; the parser's inverse."""
    head = f"Answer 1: {declared}\n" if declared is not None else "Answer 1:\n"
    return head + "Answer 2:\n" + render_rows(rows, header=True)
