"""Raw and speaker-tagged caption formats.

Raw captions are what the caption downloader gives us: one ``MM:SS text`` cue
per line and no idea who is talking. Processed transcripts are hand-tagged::

    [00:03] Reporter: Kime oy vereceksiniz?
    [00:05] Citizen 1: ben oyumu erdoğana veriyorum
    ---
    Reporter: Siz?
    Citizen 1: Kılıçdaroğlu

``---`` separates interviews, citizen numbering restarts in each interview and
the ``[MM:SS]`` prefix is optional. Utterance text is kept exactly as
transcribed (speech-to-text mistakes included); only line-end whitespace is
trimmed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

__all__ = [
    "CaptionCue",
    "CaptionParseError",
    "InterviewSegment",
    "ProcessedTranscript",
    "RawCaptionDocument",
    "Utterance",
    "count_tokens",
    "format_timestamp",
    "parse_processed",
    "parse_raw",
    "parse_timestamp",
    "render_processed",
    "render_raw",
]

SEGMENT_SEPARATOR = "---"

_TS = r"(?:\d{1,2}:)?\d{1,3}:\d{2}"
_RAW_LINE = re.compile(rf"^(?P<ts>{_TS})(?:\s+(?P<text>.*))?$")
_PROCESSED_LINE = re.compile(rf"^(?:\[(?P<ts>{_TS})\]\s*)?(?P<tag>[^:]+?)\s*:(?P<text>.*)$")
_CITIZEN_TAG = re.compile(r"^Citizen\s+(?P<n>\d+)$")


class CaptionParseError(ValueError):
    """A caption file violates its grammar. ``line`` is 1-based, or None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_timestamp(value: str) -> int:
    """``"MM:SS"`` or ``"HH:MM:SS"`` to whole seconds."""
    parts = value.split(":")
    if len(parts) not in (2, 3) or not all(p.isdigit() for p in parts):
        raise ValueError(f"bad timestamp {value!r}")
    nums = [int(p) for p in parts]
    if nums[-1] >= 60 or (len(nums) == 3 and nums[1] >= 60):
        raise ValueError(f"bad timestamp {value!r}")
    if len(nums) == 2:
        return nums[0] * 60 + nums[1]
    return nums[0] * 3600 + nums[1] * 60 + nums[2]


def format_timestamp(seconds: int) -> str:
    """Inverse of :func:`parse_timestamp`; hours appear only when needed."""
    if seconds < 0:
        raise ValueError("negative timestamp")
    hours, rest = divmod(seconds, 3600)
    minutes, secs = divmod(rest, 60)
    if hours:
        return f"{hours:02d}:{minutes:02d}:{secs:02d}"
    return f"{minutes:02d}:{secs:02d}"


@dataclass(frozen=True)
class CaptionCue:
    start: int
    text: str


@dataclass(frozen=True)
class RawCaptionDocument:
    video_id: str
    cues: tuple[CaptionCue, ...]


@dataclass(frozen=True)
class Utterance:
    """One speaker turn. ``citizen`` is None for the reporter."""

    citizen: int | None
    text: str
    start: int | None = None

    @property
    def is_reporter(self) -> bool:
        return self.citizen is None

    @property
    def speaker(self) -> str:
        return "Reporter" if self.citizen is None else f"Citizen {self.citizen}"


@dataclass(frozen=True)
class InterviewSegment:
    utterances: tuple[Utterance, ...]

    @property
    def citizen_count(self) -> int:
        return max((u.citizen for u in self.utterances if u.citizen is not None), default=0)

    def citizen_text(self, citizen: int) -> str:
        return " ".join(u.text for u in self.utterances if u.citizen == citizen)


@dataclass(frozen=True)
class ProcessedTranscript:
    video_id: str
    segments: tuple[InterviewSegment, ...]

    @property
    def citizen_count(self) -> int:
        return sum(seg.citizen_count for seg in self.segments)

    def citizen_keys(self) -> list[tuple[int, int]]:
        """``(interview index, citizen index)`` pairs, both 1-based, in order."""
        return [
            (i, c)
            for i, seg in enumerate(self.segments, start=1)
            for c in range(1, seg.citizen_count + 1)
        ]


def _lines(text: str) -> Iterable[tuple[int, str]]:
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r").strip()
        if line:
            yield lineno, line


def parse_raw(text: str, video_id: str = "") -> RawCaptionDocument:
    if not text.strip():
        raise CaptionParseError("empty caption input")
    cues: list[CaptionCue] = []
    for lineno, line in _lines(text):
        m = _RAW_LINE.match(line)
        if not m:
            raise CaptionParseError(f"unparseable timestamp in {line!r}", lineno)
        try:
            start = parse_timestamp(m["ts"])
        except ValueError as exc:
            raise CaptionParseError(str(exc), lineno) from None
        body = (m["text"] or "").strip()
        if not body:
            raise CaptionParseError("cue without text", lineno)
        if cues and start < cues[-1].start:
            raise CaptionParseError(f"non-monotonic cue at line {lineno}", lineno)
        cues.append(CaptionCue(start, body))
    return RawCaptionDocument(video_id, tuple(cues))


def render_raw(doc: RawCaptionDocument) -> str:
    return "".join(f"{format_timestamp(c.start)} {c.text}\n" for c in doc.cues)


def _close_segment(
    utterances: list[Utterance], first_line: int, segments: list[InterviewSegment]
) -> None:
    if not utterances:
        # tolerate stray separators (leading, trailing, doubled)
        return
    if not any(u.citizen is not None for u in utterances):
        raise CaptionParseError("interview segment has no Citizen line", first_line)
    if not any(u.citizen is None for u in utterances):
        raise CaptionParseError("interview segment has no Reporter line", first_line)
    segments.append(InterviewSegment(tuple(utterances)))


def parse_processed(text: str, video_id: str = "") -> ProcessedTranscript:
    if not text.strip():
        raise CaptionParseError("empty transcript input")
    segments: list[InterviewSegment] = []
    current: list[Utterance] = []
    first_line = 1
    highest = 0
    for lineno, line in _lines(text):
        if line == SEGMENT_SEPARATOR:
            _close_segment(current, first_line, segments)
            current, highest = [], 0
            continue
        if not current:
            first_line = lineno
        m = _PROCESSED_LINE.match(line)
        if not m:
            raise CaptionParseError(f"expected 'Speaker: text', got {line!r}", lineno)
        start = None
        if m["ts"] is not None:
            try:
                start = parse_timestamp(m["ts"])
            except ValueError as exc:
                raise CaptionParseError(str(exc), lineno) from None
        tag = m["tag"].strip()
        if tag == "Reporter":
            citizen = None
        else:
            cm = _CITIZEN_TAG.match(tag)
            if not cm:
                raise CaptionParseError(f"unknown speaker tag {tag!r}", lineno)
            citizen = int(cm["n"])
            if citizen > highest + 1 or citizen < 1:
                raise CaptionParseError(
                    f"non-contiguous citizen index {citizen} (expected at most {highest + 1})", lineno
                )
            highest = max(highest, citizen)
        current.append(Utterance(citizen, m["text"].strip(), start))
    _close_segment(current, first_line, segments)
    if not segments:
        raise CaptionParseError("transcript has no interview segments")
    return ProcessedTranscript(video_id, tuple(segments))


def render_processed(transcript: ProcessedTranscript) -> str:
    blocks = []
    for seg in transcript.segments:
        lines = []
        for u in seg.utterances:
            prefix = f"[{format_timestamp(u.start)}] " if u.start is not None else ""
            body = f" {u.text}" if u.text else ""
            lines.append(f"{prefix}{u.speaker}:{body}\n")
        blocks.append("".join(lines))
    return f"{SEGMENT_SEPARATOR}\n".join(blocks)


def count_tokens(segment: InterviewSegment) -> int:
    """Whitespace tokens over all utterance texts; tags and timestamps excluded."""
    return sum(len(u.text.split()) for u in segment.utterances)
