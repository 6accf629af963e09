"""Regenerate the bundled sample corpus, the default model and the test goldens.

Run from the repository root:  python3 scripts/make_fixtures.py
"""

import argparse
import shutil
import tempfile
from pathlib import Path

from metatrust.cli import main

ROOT = Path(__file__).resolve().parents[1]
DATA = ROOT / "src" / "metatrust" / "data"
FIXTURES = ROOT / "tests" / "fixtures"

SAMPLE_ARGS = ["--n-records", "200", "--levels", "4", "--seed", "7", "--anchor-fraction", "0.1"]
TRAIN_ARGS = ["--lsa-rank", "6", "--seed", "0"]


def run(*argv):
    code = main([str(a) for a in argv])
    if code != 0:
        raise SystemExit(f"command failed ({code}): {' '.join(map(str, argv))}")


def main_(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="only report whether regenerated files differ")
    args = ap.parse_args(argv)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        run("mutate", *SAMPLE_ARGS, "--out", tmp / "sample_corpus.jsonl")
        run("train", "--corpus", tmp / "sample_corpus.jsonl", *TRAIN_ARGS, "--out", tmp / "default_model.json")
        run("score", "--corpus", tmp / "sample_corpus.jsonl", "--model", tmp / "default_model.json",
            "--out", tmp / "golden_scores.jsonl")
        run("score", "--corpus", tmp / "sample_corpus.jsonl", "--model", tmp / "default_model.json",
            "--strategy", "cluster", "--out", tmp / "golden_scores_cluster.jsonl")
        targets = {
            "sample_corpus.jsonl": [DATA],
            "default_model.json": [DATA, FIXTURES],
            "golden_scores.jsonl": [FIXTURES],
            "golden_scores_cluster.jsonl": [FIXTURES],
        }
        for name, dirs in targets.items():
            for d in dirs:
                dest = d / ("golden_model.json" if d == FIXTURES and name == "default_model.json" else name)
                same = dest.exists() and dest.read_bytes() == (tmp / name).read_bytes()
                print(f"{'same   ' if same else 'changed'} {dest.relative_to(ROOT)}")
                if not args.check:
                    d.mkdir(parents=True, exist_ok=True)
                    shutil.copyfile(tmp / name, dest)


if __name__ == "__main__":
    main_()
