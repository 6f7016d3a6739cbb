from __future__ import annotations

from streetpoll.annotate import MockBackend, annotate_video, mock_rows
from streetpoll.annotate.mock import mock_annotate, mock_rows_raw
from streetpoll.annotate.parse import parse_response
from streetpoll.captions import parse_processed, parse_raw
from streetpoll.corpus import Candidate, Concept
from streetpoll.eval import compute_metrics, match_batch

INCE_TO_OTHER = {Candidate.INCE: Candidate.OTHER_UNDECIDED}


def test_rules_on_a_small_transcript():
    doc = parse_processed(
        "Reporter: kime oy vereceksiniz?\n"
        "Citizen 1: Erdoğan çünkü o gerçek bir lider\n"
        "Citizen 2: henüz kararsızım\n"
        "---\n"
        "Reporter: siz?\n"
        "Citizen 1: kılıçdaroğlu\n"
    )
    rows = mock_rows(doc)
    assert [r.candidate for r in rows] == [Candidate.RTE, Candidate.OTHER_UNDECIDED, Candidate.KK]
    assert rows[0].concept.value is Concept.LEADERSHIP
    assert rows[1].undecided and rows[1].concept.value is Concept.UNDECIDED
    assert rows[2].concept is None


def test_reply_text_parses_back(demo_corpus):
    doc = demo_corpus.processed["v05"]
    parsed = parse_response(mock_annotate(doc))
    assert parsed.declared_count == doc.citizen_count == len(parsed.rows)


def test_same_seed_same_rows(demo_corpus):
    doc = demo_corpus.processed["v07"]
    assert mock_rows(doc, 0.3, seed=5) == mock_rows(doc, 0.3, seed=5)
    assert mock_rows(doc, 0.3, seed=5) != mock_rows(doc, 0.3, seed=6)


def test_full_error_rate_is_always_wrong_even_under_overrides(demo_corpus):
    video = demo_corpus.video("v02")
    backend = MockBackend.for_transcript(demo_corpus.processed["v02"], 1.0, seed=1, overrides=INCE_TO_OTHER)
    batch = annotate_video("p", backend, video_id="v02")
    m = compute_metrics(match_batch(batch, demo_corpus.truth_for("v02"), video).outcomes, "candidate")
    assert m.tp == 0 and m.fp == 26


def test_raw_mock_merges_same_candidate_neighbours():
    doc = parse_raw("00:01 kime oy vereceksiniz\n00:03 erdoğan diyorum\n00:05 tayyip erdoğan tabii\n00:07 kılıçdaroğlu\n")
    rows = mock_rows_raw(doc)
    assert [r.candidate for r in rows] == [Candidate.RTE, Candidate.KK]
    assert all(r.citizen_ref[0] is None for r in rows)
