import json
import warnings

import numpy as np
import pytest

from metatrust.errors import ModelVersionError
from metatrust.harness import generate_corpus
from metatrust.intention import IntentionLevel
from metatrust.model import DEFAULT_POLICY, IntentionModel, estimate_intention, pair_deltas, parse_policy, train_model
from metatrust.records import ServicePair, record_from_tags

L = IntentionLevel


def test_parse_policy():
    assert parse_policy(None) == DEFAULT_POLICY
    assert parse_policy("contextual=tfidf")["contextual"] == "tfidf"
    assert parse_policy({"spatial": "semantic"})["spatial"] == "semantic"
    with pytest.raises(ValueError):
        parse_policy("contextual=magic")


def test_model_fields_and_round_trip(small_model, small_corpus, tmp_path):
    m = small_model
    assert [p.level for p in m.planes] == [L(i) for i in range(4)]
    assert m.weights == (5, 5, 5)
    path = tmp_path / "m.json"
    m.save(path)
    back = IntentionModel.load(path)
    assert back.dumps() == m.dumps()
    X = m.points(m.deltas(small_corpus.pairs))
    assert m.assign(X)[0] == back.assign(back.points(back.deltas(small_corpus.pairs)))[0]


def test_wrong_format_rejected(small_model, tmp_path):
    d = small_model.to_dict()
    d["format"] = "metatrust-intention-model/0"
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    with pytest.raises(ModelVersionError):
        IntentionModel.load(p)
    p.write_text("not json")
    with pytest.raises(ModelVersionError):
        IntentionModel.load(p)


def test_unmodified_pair_is_well_intention(small_model, small_corpus):
    orig = small_corpus.originals[0]
    tags = dict(orig.raw_tags)
    tags["id"] = orig.id + "_copy"
    (est,) = estimate_intention([ServicePair(orig, record_from_tags(tags))], small_model)
    assert est.level == L.WELL_INTENTION
    assert est.delta.as_tuple() == (0.0, 0.0, 0.0)
    assert small_model.anchor_level == L.WELL_INTENTION


def test_ill_pattern_gets_ill_level(small_model, small_corpus):
    # low spatial/temporal change, contextual rewrite to another topic
    orig = small_corpus.originals[0]
    tags = dict(orig.raw_tags)
    tags["id"] = orig.id + "_ill"
    tags["Keywords"] = "concert; stage; band; crowd; guitar; encore; festival; music"
    (est,) = estimate_intention([ServicePair(orig, record_from_tags(tags))], small_model)
    assert est.level.is_ill


def test_training_is_deterministic(small_corpus):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = train_model(small_corpus.pairs, small_corpus.labels, lsa_rank=6, seed=3)
        b = train_model(small_corpus.pairs, small_corpus.labels, lsa_rank=6, seed=3)
    assert a.dumps() == b.dumps()


def test_level_subset_and_given_labels(small_corpus):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        m = train_model(small_corpus.pairs, small_corpus.labels, lsa_rank=6, levels=[0, 3], plane_labels="given")
    assert [int(p.level) for p in m.planes] == [0, 3]
    assert m.theta.classes == (0, 3)


def test_brute_equals_clustered_with_k_equal_n(small_model, small_corpus):
    from metatrust.intention import KMeansConfig

    X = small_model.points(small_model.deltas(small_corpus.pairs))
    n = len(np.unique(X, axis=0))
    b, _ = small_model.assign(X, "brute-force")
    c, _ = small_model.assign(X, "clustered", KMeansConfig(n, 0))
    assert b == c


def test_provenance_propagates(small_model):
    o = record_from_tags({"id": "p", "Keywords": "flood; water"})
    c = record_from_tags({"id": "p_m", "Keywords": "flood; rain"})
    (est,) = estimate_intention([ServicePair(o, c)], small_model)
    assert est.provenance == {"spatial": "missing", "temporal": "missing", "contextual": "semantic"}


def test_tfidf_policy_uses_raw_vectors(small_corpus):
    from metatrust.model import fit_spaces

    records = [r for p in small_corpus.pairs for r in (p.original, p.candidate)]
    pol = parse_policy("contextual=tfidf")
    spaces = fit_spaces(records, pol)
    dv = pair_deltas(small_corpus.pairs[0], pol, spaces)
    assert 0.0 <= dv.d_contextual <= 1.0
