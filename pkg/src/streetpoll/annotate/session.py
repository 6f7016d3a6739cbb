"""One video's conversation with a backend, including continuation turns."""

from __future__ import annotations

import logging

from .backends import Backend
from .parse import ReplyParser
from .types import (
    CONTINUATION_PROMPT,
    AnnotationBatch,
    ChatTurn,
    IncompleteAnnotation,
)

log = logging.getLogger(__name__)


def annotate_video(
    prompt,
    backend: Backend,
    *,
    video_id: str = "",
    max_continuations: int = 3,
    parser: ReplyParser | None = None,
) -> AnnotationBatch:
    """Send the prompt, then ask for the rest until the declared count is met.

    Rows are deduplicated by citizen reference, first occurrence winning.
    Raises :class:`IncompleteAnnotation` (carrying the partial batch) when the
    declared count is still not reached after ``max_continuations`` extra
    turns, and lets :class:`MalformedResponse` from the first reply propagate.
    """
    parser = parser or ReplyParser.default()
    text = prompt if isinstance(prompt, str) else prompt.final_text
    video_id = video_id or getattr(prompt, "video_id", "")
    conversation = [ChatTurn("user", text)]
    reply = backend.complete(conversation)
    conversation.append(ChatTurn("assistant", reply))
    parsed = parser.parse(reply)

    batch = AnnotationBatch(
        video_id=video_id,
        declared_count=parsed.declared_count,
        rows=[],
        turns_used=1,
        backend_id=backend.backend_id,
        conversation=conversation,
        warnings=list(parsed.warnings),
    )
    seen: set = set()

    def merge(rows) -> None:
        for row in rows:
            if row.citizen_ref in seen:
                continue
            seen.add(row.citizen_ref)
            batch.rows.append(row)

    merge(parsed.rows)
    continuations = 0
    while (
        batch.declared_count is not None
        and len(batch.rows) < batch.declared_count
        and continuations < max_continuations
    ):
        conversation.append(ChatTurn("user", CONTINUATION_PROMPT))
        reply = backend.complete(conversation)
        conversation.append(ChatTurn("assistant", reply))
        continuations += 1
        batch.turns_used += 1
        more = parser.parse(reply, allow_empty=True)
        batch.warnings.extend(more.warnings)
        if batch.declared_count is None and more.declared_count is not None:
            batch.declared_count = more.declared_count
        merge(more.rows)

    if batch.declared_count is not None and len(batch.rows) < batch.declared_count:
        raise IncompleteAnnotation(batch)
    if batch.declared_count is not None and len(batch.rows) > batch.declared_count:
        batch.warnings.append(f"{len(batch.rows)} rows exceed the declared count {batch.declared_count}")
    log.debug("%s: %d rows in %d turns", video_id, len(batch.rows), batch.turns_used)
    return batch
