"""Conversation, row and batch types plus the annotation error hierarchy."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..corpus import Candidate, ConceptLabel

CONTINUATION_PROMPT = "Continue with the remaining citizens."


@dataclass(frozen=True)
class ChatTurn:
    role: str  # "user" | "assistant"
    text: str

    def as_message(self) -> dict[str, str]:
        return {"role": self.role, "content": self.text}


@dataclass(frozen=True)
class AnnotationRow:
    """One citizen as reported by the backend.

    ``citizen_ref`` is ``(interview index or None, citizen index)``.
    ``candidate`` None means the backend gave no usable prediction.
    ``concept`` None means the backend left the concept column empty.
    """

    citizen_ref: tuple[int | None, int]
    candidate: Candidate | None
    reason: str | None
    concept: ConceptLabel | None
    undecided: bool = False


@dataclass
class AnnotationBatch:
    video_id: str
    declared_count: int | None
    rows: list[AnnotationRow]
    turns_used: int
    backend_id: str
    conversation: list[ChatTurn] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


class AnnotationError(Exception):
    """Base class; ``retryable`` tells the orchestrator whether to try again."""

    retryable = False


class MalformedResponse(AnnotationError):
    def __init__(self, message: str, raw_text: str):
        self.raw_text = raw_text
        super().__init__(message)


class IncompleteAnnotation(AnnotationError):
    def __init__(self, batch: AnnotationBatch):
        self.batch = batch
        super().__init__(
            f"{batch.video_id}: {len(batch.rows)} of {batch.declared_count} citizens after {batch.turns_used} turns"
        )


class BackendTransportError(AnnotationError):
    retryable = True


class MissingFixture(AnnotationError):
    """Replay cassette has no response for this request."""

    code = "MISSING_FIXTURE"


class LiveBackendDisabled(AnnotationError):
    """Live backends cannot be constructed while offline mode is on."""
