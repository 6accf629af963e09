import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from metatrust import tags as T
from metatrust.deltas import haversine_km, temporal_manhattan
from metatrust.errors import ChannelMissing, EmptyCorpus
from metatrust.harness import (
    DEFAULT_LEXICON,
    MutationPlan,
    derive_intensities,
    derive_label,
    destination,
    generate_corpus,
    ideal_context_shift,
    level_for_severity,
    make_plan,
    mutate,
    severity,
    shift_time,
    synthesize_original,
)
from metatrust.intention import IntentionLevel
from metatrust.records import TimePoint, record_from_tags

L = IntentionLevel


def original(seed=0, topic="accident"):
    return synthesize_original("orig", np.random.default_rng(seed), topic=topic)


def test_corpus_is_deterministic_and_balanced():
    a = generate_corpus(80, 4, seed=5)
    b = generate_corpus(80, 4, seed=5)
    assert [p.candidate.raw_tags for p in a.pairs] == [p.candidate.raw_tags for p in b.pairs]
    assert a.labels == b.labels
    assert sorted(np.bincount([int(l) for l in a.labels]).tolist()) == [20, 20, 20, 20]
    c = generate_corpus(80, 4, seed=6)
    assert [p.candidate.raw_tags for p in a.pairs] != [p.candidate.raw_tags for p in c.pairs]


def test_closed_loop_labels(small_corpus):
    for pair, label in zip(small_corpus.pairs, small_corpus.labels):
        assert derive_label(pair.original, pair.candidate, small_corpus.n_levels) == label


def test_magnitude_bounds(small_corpus):
    seen = set()
    for pair, plan in zip(small_corpus.pairs, small_corpus.plans):
        o, m = pair.original, pair.candidate
        km = haversine_km((o.spatial.gps_latitude, o.spatial.gps_longitude), (m.spatial.gps_latitude, m.spatial.gps_longitude))
        to, tm = o.temporal.datetime_original, m.temporal.datetime_original
        if plan.magnitude["spatial"] == "minor":
            assert km <= 1.0 + 1e-6
        else:
            assert km >= 100.0 - 1e-6
        if plan.magnitude["temporal"] == "minor":
            assert (to.year, to.month, to.day, to.hour) == (tm.year, tm.month, tm.day, tm.hour)
            assert temporal_manhattan(to, tm) <= 5
        else:
            assert abs(to.year - tm.year) >= 1
        seen.add((plan.magnitude["spatial"], plan.magnitude["temporal"], plan.magnitude["contextual"]))
    assert len(seen) >= 6  # most minor/major combinations occur


def test_pattern_table_examples():
    n = 4
    # pure relocation, tiny time change, keywords intact -> well intention
    assert level_for_severity(severity({"spatial": 0.5, "temporal": 0.0, "contextual": 0.0}), n) == L.WELL_INTENTION
    # full context rewrite alone -> ill
    assert level_for_severity(severity({"spatial": 0.0, "temporal": 0.0, "contextual": 1.0}), n) >= L.MODERATELY_ILL
    # everything rewritten -> the top level
    assert level_for_severity(severity({"spatial": 1.0, "temporal": 1.0, "contextual": 1.0}), n) == L(3)
    with pytest.raises(ValueError):
        MutationPlan({"spatial": "major"}, {"spatial": 1.0}, {}, L(3), 4, 0)


def test_ideal_context_shift_matches_cosine():
    for n in range(1, 9):
        for k in range(n + 1):
            a = np.array([n, 0.0])
            b = np.array([n - k, k], dtype=float)
            cos = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
            assert ideal_context_shift(k, n) == pytest.approx(1 - cos, abs=1e-12)


@given(st.floats(-80, 80), st.floats(-180, 180), st.floats(0, 360), st.floats(0, 15000))
def test_destination_distance(lat, lon, bearing, km):
    lat2, lon2 = destination(lat, lon, bearing, km)
    assert haversine_km((lat, lon), (lat2, lon2)) == pytest.approx(km, abs=1e-6)


@given(st.integers(1, 100), st.sampled_from([-1, 1]), st.integers(0, 2**32 - 1))
def test_major_time_shift_budget_exact(budget, sign, seed):
    tp = TimePoint(2015, 6, 14, 12, 30, 30)
    new = shift_time(tp, budget, sign, np.random.default_rng(seed), True)
    assert temporal_manhattan(tp, new) == budget
    assert (new.year - tp.year) * sign >= 1


def test_plan_and_mutation_determinism():
    o = original()
    for level in range(4):
        p1 = make_plan(o, level, 4, seed=3)
        p2 = make_plan(o, level, 4, seed=3)
        assert p1 == p2
        assert MutationPlan.from_dict(p1.to_dict()) == p1
        m1, l1 = mutate(o, p1, "x")
        m2, _ = mutate(o, p2, "x")
        assert m1.raw_tags == m2.raw_tags and l1 == L(level)
        assert derive_label(o, m1) == L(level)


def test_missing_channel_raises():
    o = original()
    tags = dict(o.raw_tags)
    for tag in (T.GPS_LATITUDE, T.GPS_LONGITUDE):
        tags.pop(tag)
    no_gps = record_from_tags(tags)
    plan = make_plan(o, 1, 4, seed=1)
    with pytest.raises(ChannelMissing):
        mutate(no_gps, plan)


def test_paraphrase_keeps_topic():
    o = original(topic="flood")
    plans = [make_plan(o, 0, 4, seed=s, paraphrase_rate=1.0) for s in range(20)]
    plan = next(p for p in plans if p.params["swap_count"] == 0)
    m, _ = mutate(o, plan)
    assert m.contextual.keywords != o.contextual.keywords
    assert all(DEFAULT_LEXICON.topic_of(w) == "flood" for w in m.contextual.keywords)
    assert derive_intensities(o, m)["contextual"] == 0.0


def test_user_originals_and_anchors():
    seeds = [synthesize_original(f"u{i}", np.random.default_rng(i)) for i in range(3)]
    lc = generate_corpus(12, 4, seed=1, originals=seeds, anchor_fraction=1.0)
    assert all(l == L.WELL_INTENTION for l in lc.labels)
    assert all(p.candidate.id.startswith(p.original.id + "_m") for p in lc.pairs)
    with pytest.raises(EmptyCorpus):
        generate_corpus(4, 4, originals=[])
    with pytest.raises(ValueError):
        generate_corpus(4, 7)
