from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _gen import random_batch, random_corpus
from streetpoll.analysis import (
    MergeMap,
    canonicalize_concept,
    coverage_fraction,
    saturation_curve,
    stable_point,
    threshold_sweep,
)
from streetpoll.analysis.sweep import default_thresholds, render_sweep
from streetpoll.corpus import Concept, ConceptInventory
from streetpoll.eval import compute_metrics, match_batch, slice_report


def test_saturation_counts_distinct_casefolded():
    curve = saturation_curve(["Leadership", "leadership ", "Economy", "ECONOMY", "Faith"])
    assert [d for _, d in curve.points] == [1, 1, 2, 2, 3]
    assert curve.new_per_sample() == [1, 0, 1, 0, 1]
    assert curve.to_tsv().splitlines()[0] == "sample_size\tdistinct_concepts\tnew_concepts"


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from("abcdefghij"), max_size=40), st.integers(0, 1000))
def test_saturation_monotone_and_shuffle_preserves_final(items, seed):
    curve = saturation_curve(items)
    values = [d for _, d in curve.points]
    assert values == sorted(values)
    assert all(b - a in (0, 1) for a, b in zip([0] + values, values))
    if items:
        assert saturation_curve(items, shuffle_seed=seed)(len(items)) == len(set(items))


def test_stable_point_rules():
    curve = saturation_curve(list("abcde") + ["a"] * 6)
    assert stable_point(curve, window=3) == 5
    assert stable_point(curve, window=6) == 5
    assert stable_point(curve, window=7) is None
    with pytest.raises(ValueError):
        stable_point(curve, window=0)
    with pytest.raises(IndexError):
        curve(0)


def test_canonicalize_order():
    mm = MergeMap.parse("world leader => Leadership\nmoney => Economy\n")
    assert canonicalize_concept("  leadership ", mm).value is Concept.LEADERSHIP
    assert canonicalize_concept("World  Leader", mm).value is Concept.LEADERSHIP
    label = canonicalize_concept("money", mm)
    assert label.value is Concept.ECONOMY and label.raw_text == "money"
    assert canonicalize_concept("moon landing", mm).value is Concept.OTHER


def test_canonicalize_respects_inventory():
    inventory = ConceptInventory.parse("Economy: money matters\n")
    assert canonicalize_concept("Leadership", MergeMap({}), inventory).value is Concept.OTHER
    assert canonicalize_concept("Economy", MergeMap({}), inventory).value is Concept.ECONOMY


def test_merge_map_rejects_unknown_targets():
    with pytest.raises(ValueError, match="line 1"):
        MergeMap.parse("foo => NotAConcept\n")


def test_default_merge_map_entries():
    mm = MergeMap.default()
    assert mm.lookup("being a world-class leader") is Concept.LEADERSHIP
    assert mm.lookup("charisma") is Concept.LEADERSHIP


def test_coverage_excludes_absent_and_undecided(demo_corpus):
    concepts = [Concept.ECONOMY, Concept.OTHER, None, Concept.UNDECIDED, Concept.FAITH]
    assert coverage_fraction(concepts) == pytest.approx(2 / 3)
    assert coverage_fraction([None]) == 0.0
    demo = coverage_fraction(r.concept for r in demo_corpus.ground_truth)
    assert round(demo, 3) == 0.838


def _random_sweep_case(seed: int):
    rng = random.Random(seed)
    corpus = random_corpus(rng)
    outcomes = []
    for v in corpus.videos:
        outcomes += match_batch(random_batch(rng, corpus, v), corpus.truth_for(v.video_id), v).outcomes
    tokens = {(r.video_id, r.citizen_key[0]): rng.randint(0, 80) for r in corpus.ground_truth}
    thresholds = sorted(rng.sample(range(0, 90), rng.randint(1, 6)))
    return rng, corpus, outcomes, tokens, thresholds


def check_sweep_against_oracle(seed: int) -> None:
    _, corpus, outcomes, tokens, thresholds = _random_sweep_case(seed)
    rows = threshold_sweep(corpus, {"processed": outcomes}, thresholds, tokens)
    retained = [r.respondents_retained for r in rows]
    assert retained == sorted(retained, reverse=True)
    for t, row in zip(thresholds, rows):
        kept = [o for o in outcomes if tokens[(o.respondent.video_id, o.respondent.citizen_key[0])] >= t]
        assert row.respondents_retained == len(kept)
        for task in ("candidate", "concept"):
            assert row.metrics("processed", task) == compute_metrics(kept, task)


@pytest.mark.parametrize("seed", range(40))
def test_sweep_oracle_sample(seed):
    check_sweep_against_oracle(seed)


def test_sweep_zero_matches_unfiltered_report(demo_corpus):
    outcomes = []
    for v in demo_corpus.videos:
        batch = random_batch(random.Random(v.video_id), demo_corpus, v)
        outcomes += match_batch(batch, demo_corpus.truth_for(v.video_id), v).outcomes
    row = threshold_sweep(demo_corpus, {"processed": outcomes}, [0])[0]
    overall = slice_report({"processed": outcomes}, demo_corpus).overall
    assert row.respondents_retained == 325
    for task in ("candidate", "concept"):
        assert row.metrics("processed", task) == overall.metrics[("processed", task)]


def test_default_thresholds_and_render(demo_corpus):
    from streetpoll.analysis import respondent_token_counts

    counts = respondent_token_counts(demo_corpus)
    cuts = default_thresholds(counts)
    assert cuts[0] == 0 and cuts == sorted(set(cuts))
    text = render_sweep(threshold_sweep(demo_corpus, {"processed": []}, [0, 10], counts))
    assert text.splitlines()[0].startswith("min_tokens\tretained\tprocessed_predicted_fraction")
