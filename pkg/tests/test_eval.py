from __future__ import annotations

import random
from decimal import ROUND_HALF_UP, Decimal, localcontext

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import random_batch, random_corpus
from streetpoll.annotate import AnnotationBatch, AnnotationRow
from streetpoll.corpus import Candidate, Concept, ConceptLabel, GroundTruthRecord, LabelSpace, VideoRecord
from streetpoll.eval import (
    ABSENT,
    UNDEFINED,
    Metrics,
    Result,
    compute_metrics,
    match_batch,
    per_concept_metrics,
    render_table1,
    render_table2,
    round_half_up,
    slice_report,
)

BAG = VideoRecord("b", "ch", "Bağcılar", "b.txt", LabelSpace("b", ((Candidate.INCE, Candidate.OTHER_UNDECIDED),)))
PLAIN = VideoRecord("p", "ch", "Plain", "p.txt", LabelSpace("p"))


def row(ref, cand, concept=None):
    return AnnotationRow(ref, cand, None, ConceptLabel(concept, concept.value) if concept else None)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 10_000), st.integers(0, 4))
def test_round_half_up_matches_decimal(num, den, places):
    # 50 significant digits make the division exact at every tie and far from it otherwise
    with localcontext() as ctx:
        ctx.prec = 50
        expected = (Decimal(num) / Decimal(den)).quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_UP)
    assert round_half_up(num, den, places) == str(expected)


def test_round_half_up_ties():
    assert round_half_up(1, 8, 2) == "0.13"  # 0.125
    assert round_half_up(5, 8, 2) == "0.63"
    assert round_half_up(1, 200, 2) == "0.01"
    assert round_half_up(7, 7, 2) == "1.00"


def test_metrics_edge_cases():
    empty = Metrics(0, 0, 0)
    assert empty.precision is None and empty.format_precision() == UNDEFINED
    assert empty.recall == 0.0 and empty.zero_denominator
    only_missing = Metrics(0, 0, 4)
    assert only_missing.precision is None and only_missing.format_recall() == "0.00"


def test_bagcilar_override_on_both_sides():
    truth = [GroundTruthRecord("b", (1, 1), Candidate.INCE), GroundTruthRecord("b", (1, 2), Candidate.KK)]
    batch = AnnotationBatch("b", 2, [row((1, 1), Candidate.OTHER_UNDECIDED), row((1, 2), Candidate.INCE)], 1, "t")
    out = match_batch(batch, truth, BAG).outcomes
    assert out[0].candidate_outcome is Result.CORRECT
    assert out[1].candidate_outcome is Result.WRONG
    assert out[1].predicted_candidate is Candidate.OTHER_UNDECIDED
    # predicting Ince for an Ince voter is also correct once both sides map
    batch = AnnotationBatch("b", 1, [row((1, 1), Candidate.INCE)], 1, "t")
    assert match_batch(batch, truth[:1], BAG).outcomes[0].candidate_outcome is Result.CORRECT


def test_missing_spurious_and_concepts():
    truth = [
        GroundTruthRecord("p", (1, 1), Candidate.RTE, Concept.LEADERSHIP),
        GroundTruthRecord("p", (1, 2), Candidate.KK, Concept.CHANGE),
        GroundTruthRecord("p", (2, 1), Candidate.KK, None),
    ]
    rows = [row((1, 1), Candidate.RTE, Concept.LEADERSHIP), row((1, 2), Candidate.KK), row((9, 9), Candidate.RTE)]
    result = match_batch(AnnotationBatch("p", 3, rows, 1, "t"), truth, PLAIN)
    got = [(o.candidate_outcome, o.concept_outcome) for o in result.outcomes]
    assert got == [
        (Result.CORRECT, Result.CORRECT),
        (Result.CORRECT, Result.MISSING),
        (Result.MISSING, Result.NOT_APPLICABLE),
    ]
    assert [r.citizen_ref for r in result.spurious] == [(9, 9)]
    m = compute_metrics(result.outcomes, "candidate")
    assert (m.tp, m.fp, m.fn) == (2, 0, 1)


def test_unkeyed_rows_align_in_order():
    truth = [GroundTruthRecord("p", (i, 1), Candidate.KK) for i in (1, 2, 3)]
    rows = [row((2, 1), Candidate.KK), row((None, 1), Candidate.RTE), row((None, 2), Candidate.KK)]
    out = match_batch(AnnotationBatch("p", 3, rows, 1, "t"), truth, PLAIN).outcomes
    assert [o.predicted_candidate for o in out] == [Candidate.RTE, Candidate.KK, Candidate.KK]


def test_batch_for_wrong_video():
    with pytest.raises(ValueError):
        match_batch(AnnotationBatch("x", 0, [], 1, "t"), [], PLAIN)


def test_per_concept_support_and_order():
    truth = [
        GroundTruthRecord("p", (1, 1), Candidate.KK, Concept.JUSTICE),
        GroundTruthRecord("p", (2, 1), Candidate.RTE, Concept.LEADERSHIP),
        GroundTruthRecord("p", (3, 1), Candidate.KK, Concept.LEADERSHIP),
    ]
    rows = [row((1, 1), Candidate.KK, Concept.JUSTICE), row((2, 1), Candidate.RTE, Concept.ECONOMY)]
    out = match_batch(AnnotationBatch("p", 2, rows, 1, "t"), truth, PLAIN).outcomes
    res = per_concept_metrics(out)
    assert list(res) == [Concept.LEADERSHIP, Concept.JUSTICE]
    assert res[Concept.LEADERSHIP].support[Candidate.RTE] == 1
    lead = res[Concept.LEADERSHIP].metrics
    assert (lead.tp, lead.fp, lead.fn) == (0, 1, 2)


def _brute_force(corpus, batches, video_ids):
    """Count straight from predictions and truth, without Outcome objects."""
    counts = {"candidate": [0, 0, 0], "concept": [0, 0, 0]}
    for vid in video_ids:
        space = corpus.video(vid).label_space
        preds = {r.citizen_ref: r for r in batches[vid].rows}
        for t in corpus.truth_for(vid):
            p = preds.get(t.citizen_key)
            if p is None or p.candidate is None:
                counts["candidate"][2] += 1
            elif space.apply(p.candidate) == space.apply(t.candidate):
                counts["candidate"][0] += 1
            else:
                counts["candidate"][1] += 1
                counts["candidate"][2] += 1
            if t.concept is None:
                continue
            if p is None or p.concept is None:
                counts["concept"][2] += 1
            elif p.concept.value == t.concept:
                counts["concept"][0] += 1
            else:
                counts["concept"][1] += 1
                counts["concept"][2] += 1
    return {k: Metrics(*v) for k, v in counts.items()}


def check_slice_report_matches_oracle(seed: int) -> None:
    rng = random.Random(seed)
    corpus = random_corpus(rng)
    batches = {v.video_id: random_batch(rng, corpus, v) for v in corpus.videos}
    skipped = {v.video_id for v in corpus.videos if rng.random() < 0.15}
    outcomes = []
    for v in corpus.videos:
        if v.video_id not in skipped:
            outcomes += match_batch(batches[v.video_id], corpus.truth_for(v.video_id), v).outcomes
    report = slice_report({"processed": outcomes}, corpus, {"processed": skipped})
    slices = [(v.location, "video", [v.video_id]) for v in corpus.videos]
    slices += [(ch, "channel", [v.video_id for v in corpus.videos if v.channel == ch]) for ch in corpus.channels]
    slices += [("All", "all", [v.video_id for v in corpus.videos])]
    for name, kind, vids in slices:
        present = [v for v in vids if v not in skipped]
        sr = report.row(name, kind)
        assert sr.respondents == sum(len(corpus.truth_for(v)) for v in vids)
        if not present:
            assert sr.metrics[("processed", "candidate")] is None
            continue
        expected = _brute_force(corpus, batches, present)
        for task in ("candidate", "concept"):
            assert sr.metrics[("processed", task)] == expected[task], (seed, name, task)


@pytest.mark.parametrize("seed", range(50))
def test_slice_report_oracle_sample(seed):
    check_slice_report_matches_oracle(seed)


def test_missing_video_is_absent_in_table(demo_corpus):
    report = slice_report({"processed": []}, demo_corpus, {"processed": [v.video_id for v in demo_corpus.videos]})
    table = render_table1(report).splitlines()
    assert table[0].split("\t")[:5] == ["Location", "All", "RTE", "KK", "Ince"]
    bak = table[1].split("\t")
    assert bak[0] == "Bakırköy" and bak[6] == ABSENT
    assert len(report.warnings) == 12


def test_table2_rows(demo_corpus):
    report = slice_report({"processed": []}, demo_corpus)
    lines = render_table2(report).splitlines()
    assert lines[1].split("\t")[:5] == ["Leadership", lines[1].split("\t")[1], "34", "8", "2"]
    assert any(l.startswith("Had Enough\t") for l in lines)
