"""metatrust command line: ingest, diff, train, score, evaluate, bench, mutate.

Exit codes: 0 ok, 2 bad input, 3 model/profile version problem, 4 internal
error. Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import Corpus, corpus_manifest, corpus_to_jsonl, load_corpus, write_directory
from .deltas import Normalizer, deltas_to_csv
from .errors import MetaTrustError, ModelVersionError
from .evaluation import TrainingConfig, benchmark_runtime, fit_for_corpus, parallel_planes, plane_sweep, report
from .fakeness import ContextProfile, load_builtin_profile, reports_to_csv, reports_to_jsonl, score_pairs
from .harness import generate_corpus
from .intention import STRATEGIES, KMeansConfig, canonical_strategy
from .model import IntentionModel, fit_spaces, pair_deltas, parse_policy

log = logging.getLogger("metatrust")

EXIT_OK, EXIT_INPUT, EXIT_MODEL, EXIT_INTERNAL = 0, 2, 3, 4
DEFAULT_SEED = 0
STRATEGY_FLAGS = {"brute": "brute-force", "heur": "heuristic", "cluster": "clustered"}


class InputError(Exception):
    """Bad command-line input detected by the CLI itself."""


@dataclass
class RunConfig:
    command: str
    corpus: Path | None = None
    model: Path | None = None
    profile: str | None = None
    out: Path | None = None
    policy: dict = field(default_factory=dict)
    normalization: str = "per-channel"
    strategy: str = "brute-force"
    planes: list = field(default_factory=list)
    seed: int = DEFAULT_SEED
    verbosity: int = 0

    def __post_init__(self):
        needs = {
            "ingest": ("corpus",),
            "diff": ("corpus",),
            "train": ("corpus",),
            "score": ("corpus", "model"),
            "evaluate": ("corpus",),
        }
        for name in needs.get(self.command, ()):
            path = getattr(self, name)
            if path is None:
                raise InputError(f"--{name} is required for {self.command}")
            if not Path(path).exists():
                raise InputError(f"{name} path does not exist: {path}")


def resolve_seed(value):
    if value is not None:
        return int(value)
    env = os.environ.get("METATRUST_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"METATRUST_SEED is not an integer: {env!r}") from None
    return DEFAULT_SEED


def _int_list(text):
    try:
        return [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _strategies(text):
    if text == "all":
        return list(STRATEGIES)
    out = []
    for part in text.split(","):
        part = part.strip()
        out.append(canonical_strategy(STRATEGY_FLAGS.get(part, part)))
    return out


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _load_profile(spec):
    if spec is None:
        return load_builtin_profile("default")
    if Path(spec).is_file():
        return ContextProfile.load(spec)
    try:
        return load_builtin_profile(spec)
    except FileNotFoundError:
        raise InputError(f"no profile file or built-in profile named {spec!r}") from None


def _training_config(args, seed):
    return TrainingConfig(
        policy=args.channel_policy,
        normalization=args.normalization,
        weights=tuple(args.weights),
        seed=seed,
        kmeans_seed=seed,
        lsa_rank=args.lsa_rank,
        lsa_energy=None if args.lsa_rank is not None else args.lsa_energy,
    )


# ---------------------------------------------------------------- commands

def cmd_ingest(args, cfg: RunConfig):
    corpus = load_corpus(cfg.corpus, strict=args.strict)
    manifest = corpus_manifest(corpus)
    if cfg.out is not None:
        _emit(corpus_to_jsonl(corpus), cfg.out)
    sys.stdout.write(json.dumps(manifest, sort_keys=True, indent=1) + "\n")


def cmd_diff(args, cfg: RunConfig):
    corpus = load_corpus(cfg.corpus, strict=args.strict)
    pairs = corpus.pairs()
    records = [r for p in pairs for r in (p.original, p.candidate)]
    spaces = fit_spaces(records, cfg.policy, rank=args.lsa_rank, energy=None if args.lsa_rank else args.lsa_energy)
    deltas = [pair_deltas(p, cfg.policy, spaces) for p in pairs]
    normalizer = Normalizer.fit(deltas, cfg.normalization)
    _emit(deltas_to_csv(deltas, [normalizer.apply(d) for d in deltas]), cfg.out)


def cmd_train(args, cfg: RunConfig):
    labeled = load_corpus(cfg.corpus, strict=args.strict).labeled()
    plane_count = cfg.planes[0] if cfg.planes else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = fit_for_corpus(labeled, plane_count, _training_config(args, cfg.seed))
    _emit(model.dumps(), cfg.out)


def cmd_score(args, cfg: RunConfig):
    model = IntentionModel.load(cfg.model)
    profile = _load_profile(cfg.profile)
    corpus = load_corpus(cfg.corpus, strict=args.strict)
    kcfg = KMeansConfig(args.k, cfg.seed)
    reports = score_pairs(corpus.pairs(), model, profile, cfg.strategy, kcfg)
    text = reports_to_csv(reports) if args.format == "csv" else reports_to_jsonl(reports)
    _emit(text, cfg.out)


def cmd_evaluate(args, cfg: RunConfig):
    train = load_corpus(cfg.corpus, strict=args.strict).labeled()
    if args.test_corpus:
        test = load_corpus(args.test_corpus, strict=args.strict).labeled()
    else:
        rng = np.random.default_rng(cfg.seed)
        idx = rng.permutation(len(train))
        half = len(train) // 2
        train, test = train.subset(sorted(idx[:half].tolist())), train.subset(sorted(idx[half:].tolist()))
    planes = cfg.planes or list(range(2, train.n_levels + 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        results = plane_sweep(train, test, planes, _strategies(args.strategies), _training_config(args, cfg.seed),
                              KMeansConfig(args.k, cfg.seed), with_baseline=args.baseline)
    js, csv_text = report(results)
    if cfg.out is None:
        sys.stdout.write(csv_text)
    else:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(js, encoding="utf-8")
        (out / "report.csv").write_text(csv_text, encoding="utf-8")


def cmd_bench(args, cfg: RunConfig):
    if cfg.model is not None and cfg.corpus is not None:
        model = IntentionModel.load(cfg.model)
        corpus = load_corpus(cfg.corpus, strict=args.strict)
        planes = model.planes
        X = model.points(model.deltas(corpus.pairs()))
    else:
        n_planes = cfg.planes[0] if cfg.planes else 8
        planes = parallel_planes(n_planes)
        X = np.random.default_rng(cfg.seed).random((args.n, 3))
    times = benchmark_runtime(planes, X, _strategies(args.strategies), args.repeats, args.k, cfg.seed)
    lines = ["strategy,ns_per_record,n_points,n_planes\n"]
    for s in STRATEGIES:
        if s in times:
            lines.append(f"{s},{times[s]:.1f},{len(X)},{len(planes)}\n")
    _emit("".join(lines), cfg.out)


def cmd_mutate(args, cfg: RunConfig):
    originals = None
    if cfg.corpus is not None:
        originals = load_corpus(cfg.corpus, strict=args.strict).originals
    lc = generate_corpus(
        n_records=args.n_records,
        n_levels=args.levels,
        seed=cfg.seed,
        eta=args.eta,
        paraphrase_rate=args.paraphrase_rate,
        anchor_fraction=args.anchor_fraction,
        originals=originals,
    )
    manifest = {
        "seed": cfg.seed,
        "n_levels": args.levels,
        "n_records": args.n_records,
        "eta": args.eta,
        "paraphrase_rate": args.paraphrase_rate,
        "anchor_fraction": args.anchor_fraction,
        "counts": {lv.label: sum(1 for l in lc.labels if l == lv) for lv in sorted(set(lc.labels))},
    }
    corpus = Corpus.from_labeled(lc, manifest)
    if cfg.out is None or str(cfg.out).endswith(".jsonl"):
        _emit(corpus_to_jsonl(corpus), cfg.out)
    else:
        write_directory(corpus, cfg.out)
        plans = [
            {"record_id": p.id, "plan": None if plan is None else plan.to_dict()} for p, plan in zip(lc.pairs, lc.plans)
        ]
        (Path(cfg.out) / "plans.jsonl").write_text(
            "".join(json.dumps(x, sort_keys=True) + "\n" for x in sorted(plans, key=lambda x: x["record_id"])),
            encoding="utf-8",
        )


COMMANDS = {
    "ingest": (cmd_ingest, "validate a directory of sidecars and write a corpus file"),
    "diff": (cmd_diff, "per-pair raw and normalized deltas as CSV"),
    "train": (cmd_train, "fit an intention model on a labeled corpus"),
    "score": (cmd_score, "score candidates into fakeness reports (JSON lines)"),
    "evaluate": (cmd_evaluate, "accuracy and precision across plane counts and strategies"),
    "bench": (cmd_bench, "per-strategy scoring time in ns/record"),
    "mutate": (cmd_mutate, "generate a labeled corpus of mutated records"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--corpus", type=Path, help="corpus directory or JSON-lines file")
    common.add_argument("--model", type=Path, help="intention model file")
    common.add_argument("--profile", help="context profile file or built-in name (default: default)")
    common.add_argument("--out", type=Path, help="output file or directory (default: stdout)")
    common.add_argument("--strategy", choices=sorted(STRATEGY_FLAGS), default="brute", help="plane assignment strategy")
    common.add_argument("--planes", type=_int_list, default=None, help="plane count(s), e.g. 4 or 2,3,4")
    common.add_argument("--seed", type=int, default=None, help="master seed (fallback: $METATRUST_SEED, then 0)")
    common.add_argument("--normalization", choices=["per-channel", "paper"], default="per-channel")
    common.add_argument("--channel-policy", default=None, help="e.g. contextual=semantic,spatial=quantitative")
    common.add_argument("--strict", action="store_true", help="fail on the first malformed input instead of skipping it")
    common.add_argument("--lsa-rank", type=int, default=None, help="fixed latent rank (default: energy rule)")
    common.add_argument("--lsa-energy", type=float, default=0.9, help="retained singular-value energy when no rank is given")
    common.add_argument("--weights", type=_int_list, default=[5, 5, 5], help="channel weights 1..5 (spatial,temporal,contextual)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(prog="metatrust", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}
    for name, (_, help_text) in COMMANDS.items():
        subs[name] = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    subs["score"].add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    subs["score"].add_argument("--k", type=int, default=None, help="clusters for the clustered strategy")
    subs["evaluate"].add_argument("--test-corpus", type=Path, default=None, help="held-out corpus (default: seeded half split)")
    subs["evaluate"].add_argument("--strategies", default="all", help="'all' or comma list of brute,heur,cluster")
    subs["evaluate"].add_argument("--baseline", action="store_true", help="also report the raw tf-idf baseline")
    subs["evaluate"].add_argument("--k", type=int, default=None)
    subs["bench"].add_argument("--strategies", default="all")
    subs["bench"].add_argument("--n", type=int, default=10_000, help="synthetic points when no model/corpus given")
    subs["bench"].add_argument("--repeats", type=int, default=5)
    subs["bench"].add_argument("--k", type=int, default=None)
    subs["mutate"].add_argument("--n-records", type=int, default=1000)
    subs["mutate"].add_argument("--levels", type=int, default=4)
    subs["mutate"].add_argument("--eta", type=float, default=0.5)
    subs["mutate"].add_argument("--paraphrase-rate", type=float, default=0.5)
    subs["mutate"].add_argument("--anchor-fraction", type=float, default=0.0)
    return parser


def _fail(code, kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}, sort_keys=True) + "\n")
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig(
            command=args.command,
            corpus=args.corpus,
            model=args.model,
            profile=args.profile,
            out=args.out,
            policy=parse_policy(args.channel_policy),
            normalization=args.normalization,
            strategy=STRATEGY_FLAGS[args.strategy],
            planes=args.planes or [],
            seed=resolve_seed(args.seed),
            verbosity=args.verbose,
        )
        if any(not 1 <= w <= 5 for w in args.weights) or len(args.weights) != 3:
            raise InputError("--weights needs three integers within 1..5")
        COMMANDS[args.command][0](args, cfg)
    except ModelVersionError as exc:
        return _fail(EXIT_MODEL, type(exc).__name__, str(exc))
    except (MetaTrustError, InputError, ValueError, OSError) as exc:
        return _fail(EXIT_INPUT, type(exc).__name__, str(exc))
    except Exception as exc:  # pragma: no cover - last-resort guard
        log.debug("internal error", exc_info=True)
        return _fail(EXIT_INTERNAL, type(exc).__name__, str(exc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
