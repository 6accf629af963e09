import json
import subprocess
import sys

import pytest

from metatrust.cli import main
from metatrust.corpus import Corpus, write_directory
from metatrust.harness import generate_corpus

FLAGS = ["--corpus", "--model", "--profile", "--out", "--strategy", "--planes", "--seed", "--normalization",
         "--channel-policy", "--strict", "--lsa-rank", "--lsa-energy", "--weights"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    write_directory(Corpus.from_labeled(generate_corpus(40, 4, seed=4)), root)
    return root


@pytest.mark.parametrize("cmd", ["ingest", "diff", "train", "score", "evaluate", "bench", "mutate"])
def test_help_lists_common_flags(cmd, capsys):
    with pytest.raises(SystemExit) as exc:
        main([cmd, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for flag in FLAGS:
        assert flag in text


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "metatrust", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout


def test_ingest_valid(corpus_dir, tmp_path, capsys):
    code, out, _ = run(capsys, "ingest", "--corpus", corpus_dir, "--out", tmp_path / "c.jsonl")
    assert code == 0
    m = json.loads(out)
    assert m["pairs"] == 40 and m["skipped"] == []
    assert (tmp_path / "c.jsonl").read_text().count("\n") == 1 + m["originals"] + 40


def test_ingest_malformed_strict_and_lenient(corpus_dir, tmp_path, capsys):
    import shutil

    root = tmp_path / "bad"
    shutil.copytree(corpus_dir, root)
    (root / "originals" / "broken.json").write_text("{ not json")
    code, _, err = run(capsys, "ingest", "--corpus", root, "--strict")
    assert code == 2
    assert "broken.json" in json.loads(err)["message"]
    with pytest.warns(UserWarning):
        code, out, _ = run(capsys, "ingest", "--corpus", root)
    assert code == 0
    assert json.loads(out)["skipped"][0]["path"].endswith("broken.json")


def test_missing_path_is_input_error(tmp_path, capsys):
    code, _, err = run(capsys, "train", "--corpus", tmp_path / "nope")
    assert code == 2 and json.loads(err)["exit_code"] == 2


def test_score_bad_model_version(fixtures_dir, corpus_dir, tmp_path, capsys):
    model = json.loads((fixtures_dir / "golden_model.json").read_text())
    model["format"] = "metatrust-model/999"
    path = tmp_path / "m.json"
    path.write_text(json.dumps(model))
    code, _, err = run(capsys, "score", "--corpus", corpus_dir, "--model", path)
    assert code == 3
    assert json.loads(err)["error"] == "ModelVersionError"


def test_train_and_score_match_goldens(fixtures_dir, tmp_path, capsys):
    from importlib import resources

    sample = resources.files("metatrust").joinpath("data", "sample_corpus.jsonl")
    code, model_text, _ = run(capsys, "train", "--corpus", sample, "--lsa-rank", "6", "--seed", "0")
    assert code == 0
    assert model_text == (fixtures_dir / "golden_model.json").read_text()
    (tmp_path / "m.json").write_text(model_text)
    for strategy, golden in (("brute", "golden_scores.jsonl"), ("cluster", "golden_scores_cluster.jsonl")):
        code, out, _ = run(capsys, "score", "--corpus", sample, "--model", tmp_path / "m.json", "--strategy", strategy)
        assert code == 0
        assert out == (fixtures_dir / golden).read_text()


def test_evaluate_rows(tmp_path, capsys):
    corpus_dir = tmp_path / "c"
    write_directory(Corpus.from_labeled(generate_corpus(160, 4, seed=4)), corpus_dir)
    code, out, _ = run(capsys, "evaluate", "--corpus", corpus_dir, "--planes", "2,3,4", "--lsa-rank", "6", "--strategies", "brute")
    assert code == 0
    rows = out.strip().splitlines()[1:]
    assert [r.split(",")[1] for r in rows] == ["2", "3", "4"]
    code, _, _ = run(capsys, "evaluate", "--corpus", corpus_dir, "--planes", "4", "--lsa-rank", "6", "--out", tmp_path / "rep")
    assert code == 0
    assert len(json.loads((tmp_path / "rep" / "report.json").read_text())["results"]) == 3


def test_bench_all_strategies(capsys):
    code, out, _ = run(capsys, "bench", "--strategies", "all", "--n", "300")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "strategy,ns_per_record,n_points,n_planes"
    assert [l.split(",")[0] for l in lines[1:]] == ["brute-force", "heuristic", "clustered"]


def test_seed_from_environment(monkeypatch, capsys):
    base = ["mutate", "--n-records", "8"]
    monkeypatch.setenv("METATRUST_SEED", "5")
    _, env_out, _ = run(capsys, *base)
    monkeypatch.delenv("METATRUST_SEED")
    _, flag_out, _ = run(capsys, *base, "--seed", "5")
    _, default_out, _ = run(capsys, *base)
    assert env_out == flag_out != default_out
    monkeypatch.setenv("METATRUST_SEED", "x")
    code, _, _ = run(capsys, *base)
    assert code == 2


def test_mutate_directory_and_diff(tmp_path, capsys):
    code, _, _ = run(capsys, "mutate", "--n-records", "12", "--seed", "1", "--out", tmp_path / "d")
    assert code == 0
    assert (tmp_path / "d" / "plans.jsonl").read_text().count("\n") == 12
    code, out, _ = run(capsys, "diff", "--corpus", tmp_path / "d", "--lsa-rank", "3")
    assert code == 0
    assert len(out.strip().splitlines()) == 13


def test_bad_weights(corpus_dir, capsys):
    code, _, _ = run(capsys, "train", "--corpus", corpus_dir, "--weights", "9,1,1")
    assert code == 2
