"""Accuracy / precision across plane counts and strategies, plus the tf-idf baseline.

Trains on one synthetic corpus and evaluates on an independently seeded one.
Writes report.json and report.csv to --out.
"""

import argparse
import time
import warnings
from pathlib import Path

from metatrust.evaluation import TrainingConfig, plane_sweep, report
from metatrust.harness import generate_corpus


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-records", type=int, default=1000)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--train-seed", type=int, default=1)
    ap.add_argument("--test-seed", type=int, default=2)
    ap.add_argument("--eta", type=float, default=0.5)
    ap.add_argument("--paraphrase-rate", type=float, default=0.5)
    ap.add_argument("--out", type=Path, default=Path("results/accuracy"))
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    kw = dict(n_levels=args.levels, eta=args.eta, paraphrase_rate=args.paraphrase_rate)
    train = generate_corpus(args.n_records, seed=args.train_seed, **kw)
    test = generate_corpus(args.n_records, seed=args.test_seed, **kw)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = plane_sweep(train, test, range(2, args.levels + 1), config=TrainingConfig(), with_baseline=True)
    js, csv_text = report(results)
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "report.json").write_text(js)
    (args.out / "report.csv").write_text(csv_text)
    print(csv_text, end="")
    print(f"# {time.perf_counter() - t0:.1f}s, written to {args.out}")


if __name__ == "__main__":
    main()
