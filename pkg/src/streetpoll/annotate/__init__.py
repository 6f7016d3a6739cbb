"""Driving annotation backends and reading their replies."""

from .backends import (
    Backend,
    BackendConfig,
    Cassette,
    LiveBackend,
    MockBackend,
    ReplayBackend,
    ScriptedBackend,
    make_backend,
    offline_mode,
    request_digest,
)
from .mock import mock_annotate, mock_rows, mock_rows_raw
from .parse import CandidateSynonyms, ParsedReply, ReplyParser, parse_response, render_reply, render_rows
from .ratelimit import TokenBucket
from .session import annotate_video
from .types import (
    CONTINUATION_PROMPT,
    AnnotationBatch,
    AnnotationError,
    AnnotationRow,
    BackendTransportError,
    ChatTurn,
    IncompleteAnnotation,
    LiveBackendDisabled,
    MalformedResponse,
    MissingFixture,
)

__all__ = [
    "AnnotationBatch",
    "AnnotationError",
    "AnnotationRow",
    "Backend",
    "BackendConfig",
    "BackendTransportError",
    "CONTINUATION_PROMPT",
    "CandidateSynonyms",
    "Cassette",
    "ChatTurn",
    "IncompleteAnnotation",
    "LiveBackend",
    "LiveBackendDisabled",
    "MalformedResponse",
    "MissingFixture",
    "MockBackend",
    "ParsedReply",
    "ReplayBackend",
    "ReplyParser",
    "ScriptedBackend",
    "TokenBucket",
    "annotate_video",
    "make_backend",
    "mock_annotate",
    "mock_rows",
    "mock_rows_raw",
    "offline_mode",
    "parse_response",
    "render_reply",
    "render_rows",
    "request_digest",
]
