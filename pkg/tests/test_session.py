from __future__ import annotations

import math

import pytest

from streetpoll.annotate import (
    CONTINUATION_PROMPT,
    AnnotationRow,
    IncompleteAnnotation,
    MalformedResponse,
    MockBackend,
    ScriptedBackend,
    annotate_video,
)
from streetpoll.annotate.parse import render_reply, render_rows
from streetpoll.corpus import Candidate


def rows(n: int) -> list[AnnotationRow]:
    return [AnnotationRow((1, k), Candidate.KK, None, None) for k in range(1, n + 1)]


@pytest.mark.parametrize("n, k", [(1, 1), (7, 3), (20, 5), (6, 6)])
def test_turns_are_ceil_of_rows_over_chunk(n, k):
    backend = MockBackend(rows(n), rows_per_turn=k)
    batch = annotate_video("prompt", backend, video_id="v", max_continuations=10)
    assert batch.turns_used == math.ceil(n / k)
    assert len(batch.rows) == n
    assert batch.conversation[0].text == "prompt"
    assert all(t.text == CONTINUATION_PROMPT for t in batch.conversation[2::2])


def test_never_completing_backend_is_incomplete():
    first = render_reply(5, rows(1))
    backend = ScriptedBackend([first], fallback="Nothing more.")
    with pytest.raises(IncompleteAnnotation) as exc:
        annotate_video("p", backend, video_id="v", max_continuations=3)
    assert backend.calls == 4
    assert exc.value.batch.turns_used == 4
    assert len(exc.value.batch.rows) == 1


def test_duplicates_keep_first_occurrence():
    first = render_reply(2, [AnnotationRow((1, 1), Candidate.RTE, None, None)])
    again = render_rows([AnnotationRow((1, 1), Candidate.KK, None, None), AnnotationRow((1, 2), Candidate.INCE, None, None)])
    batch = annotate_video("p", ScriptedBackend([first, again]))
    assert [r.candidate for r in batch.rows] == [Candidate.RTE, Candidate.INCE]


def test_overshoot_kept_with_warning():
    batch = annotate_video("p", ScriptedBackend([render_reply(1, rows(3))]))
    assert len(batch.rows) == 3
    assert any("exceed the declared count" in w for w in batch.warnings)


def test_unknown_count_stops_after_first_reply():
    text = "Answer 2:\n" + render_rows(rows(2))
    backend = ScriptedBackend([text])
    batch = annotate_video("p", backend)
    assert batch.declared_count is None and backend.calls == 1


def test_first_reply_without_rows_is_malformed():
    with pytest.raises(MalformedResponse):
        annotate_video("p", ScriptedBackend(["Sorry, I can't."]))
