import warnings

import pytest

from metatrust.corpus import (
    Corpus,
    SkippedFile,
    corpus_manifest,
    corpus_to_jsonl,
    load_corpus,
    load_sample_corpus,
    parse_jsonl,
    write_directory,
)
from metatrust.errors import MalformedInput
from metatrust.harness import generate_corpus


@pytest.fixture(scope="module")
def corpus():
    return Corpus.from_labeled(generate_corpus(20, 4, seed=3))


def same(a: Corpus, b: Corpus):
    key = lambda rs: sorted((r.id, tuple(sorted(r.raw_tags.items()))) for r in rs)
    return key(a.originals) == key(b.originals) and key(a.candidates) == key(b.candidates) and a.labels == b.labels


def test_jsonl_round_trip(corpus, tmp_path):
    text = corpus_to_jsonl(corpus)
    back = parse_jsonl(text)
    assert same(corpus, back)
    assert corpus_to_jsonl(back) == text
    path = tmp_path / "c.jsonl"
    path.write_text(text)
    assert same(corpus, load_corpus(path))


def test_directory_round_trip(corpus, tmp_path):
    write_directory(corpus, tmp_path / "d")
    back = load_corpus(tmp_path / "d")
    assert same(corpus, back)
    assert back.n_levels == 4
    lc = back.labeled()
    assert len(lc) == 20


def test_flat_directory_split(corpus, tmp_path):
    from metatrust.records import serialize_sidecar

    for r in corpus.originals + corpus.candidates:
        (tmp_path / f"{r.id}.json").write_bytes(serialize_sidecar(r))
    back = load_corpus(tmp_path)
    assert {r.id for r in back.originals} == {r.id for r in corpus.originals}
    assert len(back.pairs()) == 20


def test_strict_and_skip(corpus, tmp_path):
    write_directory(corpus, tmp_path)
    bad = tmp_path / "candidates" / "zz_bad.json"
    bad.write_text('{"id": "zz", "GPSLatitude": "north-ish"')
    with pytest.raises(MalformedInput, match="zz_bad.json"):
        load_corpus(tmp_path, strict=True)
    with pytest.warns(SkippedFile):
        back = load_corpus(tmp_path, strict=False)
    assert len(back.skipped) == 1 and back.skipped[0][0].endswith("zz_bad.json")
    assert corpus_manifest(back)["skipped"][0]["path"].endswith("zz_bad.json")


def test_jsonl_bad_lines():
    text = '{"role": "original", "tags": {"id": "a"}}\nnot json\n{"role": "alien", "tags": {}}\n'
    with pytest.raises(MalformedInput, match="line 2"):
        parse_jsonl(text, strict=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        c = parse_jsonl(text, strict=False)
    assert len(c.originals) == 1 and len(c.skipped) == 2


def test_missing_labels_and_path():
    c = parse_jsonl('{"role": "original", "tags": {"id": "a"}}\n{"role": "candidate", "tags": {"id": "a_1"}}\n')
    with pytest.raises(MalformedInput):
        c.labeled()
    with pytest.raises(MalformedInput):
        load_corpus("/nonexistent/corpus.jsonl")


def test_sample_corpus_bundled():
    c = load_sample_corpus()
    lc = c.labeled()
    assert len(lc) == 200 and lc.n_levels == 4
    m = corpus_manifest(c)
    assert m["pairs"] == 200 and m["skipped"] == []
