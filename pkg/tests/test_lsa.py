import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from metatrust.errors import DimensionMismatch, EmptyCorpus, EmptyVocabulary, RankDeficient, ZeroMatrix
from metatrust.lsa import (
    SemanticSpace,
    VectorizerConfig,
    build_matrix,
    channel_semantic_delta,
    choose_rank,
    embed,
    fit_channel_space,
    fit_space,
    fit_vectorizer,
    semantic_distance,
    vectorize,
    zero_rows,
)
from metatrust.records import ServicePair, record_from_tags
from metatrust.text import spatial_tokens, temporal_tokens, tokenize

from oracles import best_rank_r_error


def rec(rid, kw="", **tags):
    t = {"id": rid, **tags}
    if kw:
        t["Keywords"] = kw
    return record_from_tags(t)


def test_tokenizer():
    assert tokenize("Hello, World! héllo_wörld 42") == ["hello", "world", "héllo", "wörld", "42"]
    assert tokenize("") == []


def test_channel_tokens():
    r = rec("a", City="New York", GPSLatitude="40.71", GPSLongitude="-74.0", DateTimeOriginal="2015:04:25 11:56:00")
    assert spatial_tokens(r)[:2] == ["city-new", "city-york"]
    assert spatial_tokens(r)[-1].startswith("cell-")
    assert temporal_tokens(r) == ["year-2015", "month-04", "day-25", "hour-11"]


def test_build_matrix_examples():
    M, cfg = build_matrix([rec("1", "x"), rec("2", "y")], weighting="binary")
    assert cfg.vocabulary == ("x", "y")
    assert M.tolist() == [[1, 0], [0, 1]]
    cfg = VectorizerConfig("contextual", "term-frequency", ("x", "y"))
    M, _ = build_matrix([rec("1", "x; x; y"), rec("2", "zzz")], cfg)
    assert M.tolist() == [[2, 1], [0, 0]]
    assert zero_rows(M) == [1]
    with pytest.raises(EmptyCorpus):
        build_matrix([])
    with pytest.raises(EmptyVocabulary):
        build_matrix([rec("1")])


def test_tfidf_weighting_matches_hand_computation():
    docs = [["a", "b"], ["a"], ["a", "c", "c"]]
    cfg = fit_vectorizer(docs, weighting="tf-idf")
    row = vectorize(["a", "c", "c"], cfg)
    assert row[cfg.vocabulary.index("a")] == pytest.approx(1 * (math.log(4 / 4) + 1))
    assert row[cfg.vocabulary.index("c")] == pytest.approx(2 * (math.log(4 / 2) + 1))


def test_fit_space_examples():
    sp = fit_space(np.eye(3), energy=0.6)
    assert np.allclose(np.linalg.svd(np.eye(3), compute_uv=False), [1, 1, 1])
    assert sp.r == 2
    sp = fit_space(np.array([[1.0, 2.0], [2.0, 4.0]]), energy=0.999999)
    assert sp.r == 1
    assert sp.S[0] == pytest.approx(5.0)
    for theta in (0.1, 0.5, 1.0):
        assert fit_space(np.array([[1.0, 2.0], [2.0, 4.0]]), energy=theta).r == 1
    with pytest.raises(ZeroMatrix):
        fit_space(np.zeros((2, 2)))


def test_energy_rule_picks_smallest_rank():
    s = np.array([3.0, 2.0, 1.0])
    # energies 9/14, 13/14, 1
    assert choose_rank(s, energy=9 / 14) == 1
    assert choose_rank(s, energy=0.65) == 2
    assert choose_rank(s, energy=1.0) == 3

def test_default_energy_is_ninety_percent():
    s = np.array([3.0, 2.0, 1.0])
    assert choose_rank(s, energy=None) == choose_rank(s, energy=0.9) == 2


def test_svd_oracles_on_random_matrices():
    rng = np.random.default_rng(0)
    for _ in range(100):
        M = rng.normal(size=(20, 10))
        full = fit_space(M, rank=10)
        assert np.linalg.norm(full.U @ np.diag(full.S) @ full.V.T - M) <= 1e-8
        assert np.abs(full.U.T @ full.U - np.eye(10)).max() <= 1e-8
        assert np.abs(full.V.T @ full.V - np.eye(10)).max() <= 1e-8
        assert np.all(np.diff(full.S) <= 0)
        r = int(rng.integers(1, 10))
        sp = fit_space(M, rank=r)
        err = np.linalg.norm(sp.U @ np.diag(sp.S) @ sp.V.T - M)
        assert abs(err - best_rank_r_error(M, r)) <= 1e-9
        # fold-in reproduces the U rows
        assert np.abs(embed(M, sp) - sp.U).max() <= 1e-8


def test_truncation_beats_other_choices_of_singular_values():
    rng = np.random.default_rng(1)
    M = rng.normal(size=(20, 10))
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    sp = fit_space(M, rank=3)
    best = np.linalg.norm(sp.U @ np.diag(sp.S) @ sp.V.T - M)
    for keep in ([0, 1, 3], [1, 2, 3], [0, 5, 9]):
        approx = U[:, keep] @ np.diag(s[keep]) @ Vt[keep]
        assert best <= np.linalg.norm(approx - M) + 1e-12


def test_sign_convention_is_stable():
    M = np.random.default_rng(2).normal(size=(6, 4))
    a, b = fit_space(M, rank=3), fit_space(-(-M), rank=3)
    assert np.array_equal(a.V, b.V)
    idx = np.argmax(np.abs(a.V), axis=0)
    assert np.all(a.V[idx, np.arange(3)] > 0)


def test_embed_examples_and_errors():
    M = np.random.default_rng(3).normal(size=(5, 4))
    sp = fit_space(M, rank=3)
    assert np.array_equal(embed(np.zeros(4), sp), np.zeros(3))
    assert np.allclose(embed(M[2].copy(), sp), sp.U[2], atol=1e-8)
    with pytest.raises(DimensionMismatch):
        embed(np.zeros(5), sp)
    deficient = SemanticSpace(sp.U, np.array([1.0, 0.5, 0.0]), sp.V)
    with pytest.raises(RankDeficient):
        embed(M[0], deficient)


def test_semantic_distance_examples():
    assert semantic_distance([1, 2], [1, 2]) == 0
    assert semantic_distance([1, 0], [0, 1]) == 1
    assert semantic_distance([1, 1], [1, 0]) == pytest.approx(1 - 1 / math.sqrt(2))
    assert semantic_distance([0, 0], [1, 0]) == 1.0
    assert semantic_distance([1, 0], [-1, 0]) == 2.0
    with pytest.raises(DimensionMismatch):
        semantic_distance([1, 0], [1, 0, 0])


vec = arrays(np.float64, 4, elements=st.floats(-10, 10, allow_nan=False))


@given(vec, vec, st.floats(0.01, 100))
def test_semantic_distance_symmetric_and_scale_invariant(a, b, k):
    d = semantic_distance(a, b)
    assert 0.0 <= d <= 2.0
    assert d == pytest.approx(semantic_distance(b, a), abs=1e-12)
    if np.linalg.norm(a) > 1e-3 and np.linalg.norm(b) > 1e-3:
        assert d == pytest.approx(semantic_distance(a * k, b), abs=1e-9)


def test_synonym_closer_than_unrelated():
    # "car" and "auto" never co-occur but share the context word "road",
    # so one latent dimension captures both.
    corpus = [rec("1", "car; road"), rec("2", "auto; road"), rec("3", "cake; oven")]
    space = fit_channel_space(corpus, rank=2)
    orig = rec("o", "car; road")
    syn = channel_semantic_delta(ServicePair(orig, rec("s", "auto; road")), space)
    unrelated = channel_semantic_delta(ServicePair(orig, rec("u", "cake; oven")), space)
    assert syn < unrelated
    # oracle: same ordering from a dense SVD computed by hand
    M = np.array([[1, 0, 0, 0, 1], [0, 1, 0, 0, 1], [0, 0, 1, 1, 0]], float)  # auto, car, cake, oven, road
    U, s, Vt = np.linalg.svd(M)
    lat = lambda x: (x @ Vt[:2].T) / s[:2]
    cos = lambda a, b: 1 - a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
    assert cos(lat(M[1]), lat(M[0])) < cos(lat(M[1]), lat(M[2]))


def test_identical_and_empty_channel():
    corpus = [rec("1", "car; road"), rec("2", "cake; oven")]
    space = fit_channel_space(corpus, rank=2)
    o = rec("o", "car; road")
    assert channel_semantic_delta(ServicePair(o, rec("c", "car; road")), space) == 0.0
    assert channel_semantic_delta(ServicePair(o, rec("e")), space) == 1.0


def test_space_round_trip():
    corpus = [rec("1", "car; road"), rec("2", "cake; oven"), rec("3", "car; oven")]
    sp = fit_channel_space(corpus, rank=2)
    back = SemanticSpace.from_dict(sp.to_dict())
    assert np.array_equal(back.U, sp.U) and np.array_equal(back.S, sp.S) and np.array_equal(back.V, sp.V)
    assert back.config == sp.config
