"""Corpus data model: videos, label spaces, ground truth and the concept inventory.

On disk a corpus is a directory::

    corpus.toml         manifest, one [[videos]] table per video
    ground_truth.csv    video_id,interview_idx,citizen_idx,candidate,concept,reason
    concepts.txt        optional; "Name: explanation" per line (package default otherwise)
    captions/...        raw caption files referenced by the manifest
    processed/...       speaker-tagged transcripts referenced by the manifest

A manifest entry looks like::

    [[videos]]
    video_id = "v02"
    channel = "Zeyrek"
    location = "Bağcılar"
    captions = "captions/v02.txt"
    processed = "processed/v02.txt"
    overrides = ["INCE=OTHER_UNDECIDED"]
"""

from __future__ import annotations

import csv
import enum
import io
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .captions import (
    CaptionParseError,
    ProcessedTranscript,
    RawCaptionDocument,
    parse_processed,
    parse_raw,
)

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MANIFEST_NAME = "corpus.toml"
GROUND_TRUTH_NAME = "ground_truth.csv"
INVENTORY_NAME = "concepts.txt"
GROUND_TRUTH_COLUMNS = ("video_id", "interview_idx", "citizen_idx", "candidate", "concept", "reason")


class Candidate(str, enum.Enum):
    RTE = "RTE"
    KK = "KK"
    INCE = "INCE"
    OTHER_UNDECIDED = "OTHER_UNDECIDED"

    @classmethod
    def parse(cls, value: str) -> "Candidate":
        key = value.strip().upper().replace(" ", "_").replace("İ", "I")
        aliases = {"INCE": cls.INCE, "OTHER": cls.OTHER_UNDECIDED, "UNDECIDED": cls.OTHER_UNDECIDED,
                   "OTHER_OR_UNDECIDED": cls.OTHER_UNDECIDED}
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown candidate label {value!r}") from None

    @property
    def display(self) -> str:
        return {"INCE": "Ince", "OTHER_UNDECIDED": "Other"}.get(self.value, self.value)


class Concept(str, enum.Enum):
    LEADERSHIP = "Leadership"
    CHANGE = "Change"
    ECONOMY = "Economy"
    DEVELOPMENT = "Development"
    HONESTY = "Honesty"
    STABILITY = "Stability"
    INTIMACY = "Intimacy"
    RELIABLE = "Reliable"
    PERSISTENCE = "Persistence"
    HAD_ENOUGH = "HadEnough"
    JUSTICE = "Justice"
    FAITH = "Faith"
    OTHER = "Other"
    UNDECIDED = "Undecided"

    @classmethod
    def from_name(cls, name: str) -> "Concept":
        """Exact canonical name, ignoring case and inner spaces."""
        key = "".join(name.split()).casefold()
        for member in cls:
            if member.value.casefold() == key:
                return member
        raise ValueError(f"unknown concept {name!r}")

    @property
    def named(self) -> bool:
        """One of the twelve inventory concepts (not Other/Undecided)."""
        return self not in (Concept.OTHER, Concept.UNDECIDED)

    @property
    def display(self) -> str:
        # report tables keep these historical spellings
        return {"HadEnough": "Had Enough", "Persistence": "Persistance"}.get(self.value, self.value)


NAMED_CONCEPTS = tuple(c for c in Concept if c.named)


@dataclass(frozen=True)
class ConceptLabel:
    """A canonical concept plus the backend's verbatim string."""

    value: Concept
    raw_text: str = ""


@dataclass(frozen=True)
class ConceptInventory:
    """Ordered ``(concept, explanation)`` entries; order is prompt order."""

    entries: tuple[tuple[Concept, str], ...]

    @property
    def concepts(self) -> tuple[Concept, ...]:
        return tuple(c for c, _ in self.entries)

    def explanation(self, concept: Concept) -> str:
        return dict(self.entries).get(concept, "")

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def parse(cls, text: str) -> "ConceptInventory":
        entries = []
        seen = set()
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            name, sep, explanation = line.partition(":")
            if not sep:
                raise ValueError(f"line {lineno}: expected 'name: explanation'")
            concept = Concept.from_name(name)
            if not concept.named:
                raise ValueError(f"line {lineno}: {concept.value} is implicit and cannot be listed")
            if concept in seen:
                raise ValueError(f"line {lineno}: duplicate concept {concept.value}")
            seen.add(concept)
            entries.append((concept, explanation.strip()))
        return cls(tuple(entries))

    @classmethod
    def default(cls) -> "ConceptInventory":
        return cls.parse(resources.files("streetpoll.data").joinpath(INVENTORY_NAME).read_text("utf-8"))


@dataclass(frozen=True)
class LabelSpace:
    """Per-video candidate overrides (identity unless configured)."""

    video_id: str
    candidate_overrides: tuple[tuple[Candidate, Candidate], ...] = ()

    def __post_init__(self) -> None:
        mapping = dict(self.candidate_overrides)
        for target in mapping.values():
            if mapping.get(target, target) != target:
                raise ValueError(f"override for {self.video_id} is not idempotent at {target.value}")

    def apply(self, label: Candidate) -> Candidate:
        return dict(self.candidate_overrides).get(label, label)


@dataclass(frozen=True)
class VideoRecord:
    video_id: str
    channel: str
    location: str
    caption_source: str
    label_space: LabelSpace
    processed_source: str | None = None


@dataclass(frozen=True)
class GroundTruthRecord:
    video_id: str
    citizen_key: tuple[int, int]
    candidate: Candidate
    concept: Concept | None = None
    reason_text: str | None = None


@dataclass(frozen=True)
class Corpus:
    videos: tuple[VideoRecord, ...]
    ground_truth: tuple[GroundTruthRecord, ...]
    inventory: ConceptInventory
    raw: Mapping[str, RawCaptionDocument] = field(default_factory=dict)
    processed: Mapping[str, ProcessedTranscript] = field(default_factory=dict)

    def video(self, video_id: str) -> VideoRecord:
        for v in self.videos:
            if v.video_id == video_id:
                return v
        raise KeyError(video_id)

    def truth_for(self, video_id: str) -> list[GroundTruthRecord]:
        return [r for r in self.ground_truth if r.video_id == video_id]

    def effective_candidate(self, record: GroundTruthRecord) -> Candidate:
        return apply_label_space(record.candidate, self.video(record.video_id))

    @property
    def channels(self) -> list[str]:
        return list(dict.fromkeys(v.channel for v in self.videos))


@dataclass(frozen=True)
class Finding:
    path: str
    line: int | None
    message: str

    def __str__(self) -> str:
        where = f"{self.path}:{self.line}" if self.line is not None else self.path
        return f"{where}: {self.message}"


class CorpusLoadError(Exception):
    """The corpus cannot be read at all (missing root or manifest)."""


class CorpusValidationError(Exception):
    def __init__(self, findings: list[Finding]):
        self.findings = findings
        super().__init__("corpus validation failed:\n" + "\n".join(f"  {f}" for f in findings))


def apply_label_space(label: Candidate, video: VideoRecord) -> Candidate:
    return video.label_space.apply(label)


@dataclass(frozen=True)
class CandidateShares:
    """Exact fractions per candidate plus whole-percent display values."""

    total: int
    fractions: Mapping[Candidate, Fraction]

    def percent(self, candidate: Candidate) -> int:
        """Half-up whole percent; Other/Undecided is shown as the remainder.

        Reports list only the three named candidates, so the merged
        Other/Undecided column is whatever is left of 100.
        """
        if candidate is Candidate.OTHER_UNDECIDED:
            named = sum(self.percent(c) for c in Candidate if c is not Candidate.OTHER_UNDECIDED)
            return max(0, 100 - named)
        frac = self.fractions[candidate]
        return int((frac * 100 + Fraction(1, 2)) // 1)

    def percents(self) -> dict[Candidate, int]:
        return {c: self.percent(c) for c in Candidate}


def candidate_shares(records: Iterable[GroundTruthRecord], corpus: Corpus | None = None) -> CandidateShares:
    """Share of each candidate within a slice, overrides applied when ``corpus`` is given."""
    labels = [corpus.effective_candidate(r) if corpus else r.candidate for r in records]
    if not labels:
        raise ValueError("empty slice")
    n = len(labels)
    return CandidateShares(n, {c: Fraction(labels.count(c), n) for c in Candidate})


def _parse_overrides(values: list, video_id: str) -> tuple[tuple[Candidate, Candidate], ...]:
    pairs = []
    for item in values:
        src, sep, dst = str(item).partition("=")
        if not sep:
            raise ValueError(f"override {item!r} is not 'FROM=TO'")
        pairs.append((Candidate.parse(src), Candidate.parse(dst)))
    return tuple(pairs)


def _read_source(root: Path, source: str) -> str:
    if source.startswith(("http://", "https://")):
        from .annotate.backends import fetch_url

        return fetch_url(source)
    return (root / source).read_text(encoding="utf-8")


def load_corpus(root_path: str | Path) -> Corpus:
    """Load and cross-validate a corpus directory.

    Raises :class:`CorpusLoadError` when the directory or manifest is missing
    and :class:`CorpusValidationError` carrying every finding otherwise.
    """
    root = Path(root_path)
    manifest_path = root / MANIFEST_NAME
    if not root.is_dir():
        raise CorpusLoadError(f"corpus root {root} is not a directory")
    if not manifest_path.is_file():
        raise CorpusLoadError(f"missing manifest {manifest_path}")
    try:
        manifest = tomllib.loads(manifest_path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise CorpusLoadError(f"{manifest_path}: {exc}") from None

    findings: list[Finding] = []
    mname = MANIFEST_NAME
    videos: list[VideoRecord] = []
    raw: dict[str, RawCaptionDocument] = {}
    processed: dict[str, ProcessedTranscript] = {}

    entries = manifest.get("videos", [])
    if not entries:
        findings.append(Finding(mname, None, "manifest lists no videos"))
    for i, entry in enumerate(entries, start=1):
        vid = str(entry.get("video_id", "")).strip()
        where = f"{mname} [[videos]] #{i}"
        if not vid:
            findings.append(Finding(where, None, "missing video_id"))
            continue
        if any(v.video_id == vid for v in videos):
            findings.append(Finding(where, None, f"duplicate video_id {vid!r}"))
            continue
        channel = str(entry.get("channel", "")).strip()
        location = str(entry.get("location", "")).strip()
        if not channel or not location:
            findings.append(Finding(where, None, f"video {vid!r} needs non-empty channel and location"))
        try:
            space = LabelSpace(vid, _parse_overrides(entry.get("overrides", []), vid))
        except ValueError as exc:
            findings.append(Finding(where, None, str(exc)))
            space = LabelSpace(vid)
        captions = str(entry.get("captions", "")).strip()
        processed_src = entry.get("processed")
        if not captions:
            findings.append(Finding(where, None, f"video {vid!r} has no captions file"))
        videos.append(VideoRecord(vid, channel, location, captions, space, processed_src))

        for src, parser, store in ((captions, parse_raw, raw), (processed_src, parse_processed, processed)):
            if not src:
                continue
            try:
                store[vid] = parser(_read_source(root, src), vid)
            except FileNotFoundError:
                findings.append(Finding(src, None, f"caption file for {vid!r} not found"))
            except CaptionParseError as exc:
                findings.append(Finding(src, exc.line, str(exc).split(": ", 1)[-1]))

    inventory_path = root / INVENTORY_NAME
    try:
        if inventory_path.is_file():
            inventory = ConceptInventory.parse(inventory_path.read_text(encoding="utf-8"))
        else:
            inventory = ConceptInventory.default()
    except ValueError as exc:
        findings.append(Finding(INVENTORY_NAME, None, str(exc)))
        inventory = ConceptInventory.default()

    truth = _load_ground_truth(root / GROUND_TRUTH_NAME, videos, processed, findings)
    if findings:
        raise CorpusValidationError(findings)
    return Corpus(tuple(videos), tuple(truth), inventory, raw, processed)


def _load_ground_truth(
    path: Path,
    videos: list[VideoRecord],
    processed: dict[str, ProcessedTranscript],
    findings: list[Finding],
) -> list[GroundTruthRecord]:
    gname = GROUND_TRUTH_NAME
    if not path.is_file():
        findings.append(Finding(gname, None, "missing ground-truth table"))
        return []
    known = {v.video_id for v in videos}
    reader = csv.DictReader(io.StringIO(path.read_text(encoding="utf-8")))
    missing_cols = [c for c in GROUND_TRUTH_COLUMNS if c not in (reader.fieldnames or [])]
    if missing_cols:
        findings.append(Finding(gname, 1, f"missing columns {missing_cols}"))
        return []

    records: list[GroundTruthRecord] = []
    seen: set[tuple[str, int, int]] = set()
    for row in reader:
        line = reader.line_num
        vid = (row["video_id"] or "").strip()
        if vid not in known:
            findings.append(Finding(gname, line, f"ground truth references unknown video {vid!r}"))
            continue
        try:
            key = (int(row["interview_idx"]), int(row["citizen_idx"]))
            candidate = Candidate.parse(row["candidate"] or "")
            concept_raw = (row["concept"] or "").strip()
            concept = Concept.from_name(concept_raw) if concept_raw else None
        except ValueError as exc:
            findings.append(Finding(gname, line, str(exc)))
            continue
        if (vid, *key) in seen:
            findings.append(Finding(gname, line, f"duplicate citizen_key {key} in video {vid!r}"))
            continue
        seen.add((vid, *key))
        reason = (row["reason"] or "").strip() or None
        records.append(GroundTruthRecord(vid, key, candidate, concept, reason))

    for vid, transcript in processed.items():
        keys = set(transcript.citizen_keys())
        mine = {r.citizen_key for r in records if r.video_id == vid}
        dangling = sorted(mine - keys)
        if dangling:
            findings.append(Finding(gname, None, f"video {vid!r}: dangling citizen_key(s) {dangling}"))
        unlabeled = sorted(keys - mine)
        if unlabeled:
            findings.append(Finding(gname, None, f"video {vid!r}: transcript citizens without ground truth {unlabeled}"))
    return records
