"""Accuracy, precision, runtime and baseline measurements on labeled corpora."""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCorpus
from .harness import DEFAULT_LEXICON, LabeledCorpus
from .intention import (
    IntentionLevel,
    IntentionPlane,
    KMeansConfig,
    STRATEGIES,
    assign_brute_force,
    assign_clustered,
    assign_heuristic,
    canonical_strategy,
    default_k,
    fit_clusters,
    heuristic_order,
    prepare_planes,
)
from .model import IntentionModel, train_model

log = logging.getLogger(__name__)

ILL_THRESHOLD = IntentionLevel.MODERATELY_ILL


@dataclass(frozen=True)
class TrainingConfig:
    """Knobs for fitting models on harness corpora.

    ``lsa_rank`` of None means one latent dimension per lexicon topic.
    """

    policy: str | dict | None = None
    normalization: str = "per-channel"
    weights: tuple = (5, 5, 5)
    seed: int = 0
    kmeans_seed: int = 0
    lsa_rank: int | None = None
    lsa_energy: float | None = None
    plane_labels: str = "theta"

    def resolved_rank(self):
        if self.lsa_rank is None and self.lsa_energy is None:
            return len(DEFAULT_LEXICON.names)
        return self.lsa_rank


def levels_for_plane_count(n_levels, plane_count):
    """Evenly spaced subset of ``n_levels`` ordinals, always keeping both ends."""
    if not 1 <= plane_count <= n_levels:
        raise ValueError(f"plane_count must be within 1..{n_levels}")
    if plane_count == 1:
        return [IntentionLevel(0)]
    picks = sorted({int(round(v)) for v in np.linspace(0, n_levels - 1, plane_count)})
    return [IntentionLevel(p) for p in picks]


def fit_for_corpus(corpus: LabeledCorpus, plane_count=None, config=TrainingConfig()) -> IntentionModel:
    levels = None
    if plane_count is not None and plane_count != corpus.n_levels:
        levels = levels_for_plane_count(corpus.n_levels, plane_count)
    return train_model(
        corpus.pairs,
        corpus.labels,
        policy=config.policy,
        normalization=config.normalization,
        weights=config.weights,
        levels=levels,
        seed=config.seed,
        kmeans_seed=config.kmeans_seed,
        lsa_rank=config.resolved_rank(),
        lsa_energy=config.lsa_energy,
        plane_labels=config.plane_labels,
    )


# ----------------------------------------------------------------- accuracy

@dataclass
class AccuracyResult:
    correct: int
    total: int
    levels: list
    confusion: list  # rows: true level, columns: predicted level

    @property
    def accuracy(self):
        return self.correct / self.total

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "correct": self.correct,
            "total": self.total,
            "levels": [int(l) for l in self.levels],
            "confusion": self.confusion,
        }


def confusion_matrix(true, pred, levels):
    pos = {int(l): i for i, l in enumerate(levels)}
    m = [[0] * len(levels) for _ in levels]
    for t, p in zip(true, pred):
        m[pos[int(t)]][pos[int(p)]] += 1
    return m


def accuracy_of(true, pred, n_levels) -> AccuracyResult:
    true = [int(t) for t in true]
    pred = [int(p) for p in pred]
    if not true:
        raise EmptyCorpus("nothing to evaluate")
    levels = [IntentionLevel(i) for i in range(max(n_levels, max(true + pred) + 1))]
    correct = sum(t == p for t, p in zip(true, pred))
    return AccuracyResult(correct, len(true), levels, confusion_matrix(true, pred, levels))


def predict_levels(model: IntentionModel, corpus: LabeledCorpus, strategy="brute-force", kmeans_cfg=None):
    X = model.points(model.deltas(corpus.pairs))
    levels, _ = model.assign(X, strategy, kmeans_cfg)
    return levels


def evaluate_accuracy(model, corpus: LabeledCorpus, strategy="brute-force", kmeans_cfg=None) -> AccuracyResult:
    """Fraction of samples nearest to the plane of their own level.

    Samples whose level has no plane in ``model`` count as misses.
    """
    if len(corpus) == 0:
        raise EmptyCorpus("nothing to evaluate")
    pred = predict_levels(model, corpus, strategy, kmeans_cfg)
    return accuracy_of(corpus.labels, pred, corpus.n_levels)


# ---------------------------------------------------------------- precision

@dataclass
class PrecisionResult:
    true_ill: int
    predicted_ill: int

    @property
    def defined(self):
        return self.predicted_ill > 0

    @property
    def value(self):
        """None when nothing was predicted ill (precision undefined)."""
        return self.true_ill / self.predicted_ill if self.predicted_ill else None

    def to_dict(self):
        return {"precision_ill": self.value, "true_ill": self.true_ill, "predicted_ill": self.predicted_ill}


def precision_ill(true, pred, threshold=ILL_THRESHOLD) -> PrecisionResult:
    flagged = [(int(t), int(p)) for t, p in zip(true, pred) if int(p) >= threshold]
    hits = sum(1 for t, _ in flagged if t >= threshold)
    return PrecisionResult(hits, len(flagged))


def evaluate_precision(model, corpus: LabeledCorpus, strategy="brute-force", kmeans_cfg=None) -> PrecisionResult:
    if len(corpus) == 0:
        raise EmptyCorpus("nothing to evaluate")
    return precision_ill(corpus.labels, predict_levels(model, corpus, strategy, kmeans_cfg))


# ------------------------------------------------------------------ runtime

def parallel_planes(n_planes=8):
    """``n_planes`` horizontal planes z = (i + 0.5) / n_planes."""
    return [IntentionPlane.normalized(0.0, 0.0, 1.0, -(i + 0.5) / n_planes, IntentionLevel(min(i, 4))) for i in range(n_planes)]


def _time_ns(fn, repeats):
    runs = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        runs.append(time.perf_counter_ns() - t0)
    return statistics.median(runs)


def benchmark_runtime(planes, X, strategies=STRATEGIES, repeats=5, k=None, seed=0) -> dict:
    """Median scoring time per record (ns) for each strategy.

    Only the scoring phase is timed: the plane index, heuristic order and
    k-means clustering are prepared beforehand, as they would be at
    training time.
    """
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    if len(X) == 0:
        raise EmptyCorpus("no points to time")
    repeats = max(5, int(repeats))
    upper = tuple(np.maximum(1.0, X.max(axis=0)).tolist())
    index = prepare_planes(planes, upper)
    out = {}
    for name in strategies:
        s = canonical_strategy(name)
        if s == "brute-force":
            fn = lambda: assign_brute_force(X, index)
        elif s == "heuristic":
            order = heuristic_order(X, index)
            fn = lambda: assign_heuristic(X, index, order)
        else:
            clusters = fit_clusters(X, default_k(len(X)) if k is None else k, seed)
            fn = lambda: assign_clustered(clusters, index)
        fn()  # warm-up
        out[s] = _time_ns(fn, repeats) / len(X)
    return out


# ------------------------------------------------------------ experiments

@dataclass
class EvalResult:
    strategy: str
    plane_count: int
    accuracy: float
    precision_ill: float | None
    runtime_ns: float | None = None
    baseline_scores: dict = field(default_factory=dict)
    confusion: list = field(default_factory=list)
    levels: list = field(default_factory=list)

    def __post_init__(self):
        for v in (self.accuracy, self.precision_ill):
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError("rates must lie in [0, 1]")
        if self.runtime_ns is not None and self.runtime_ns <= 0:
            raise ValueError("runtime must be positive")

    def to_dict(self):
        return {
            "strategy": self.strategy,
            "plane_count": self.plane_count,
            "accuracy": self.accuracy,
            "precision_ill": self.precision_ill,
            "runtime_ns": self.runtime_ns,
            "baseline_scores": dict(sorted(self.baseline_scores.items())),
            "levels": [int(l) for l in self.levels],
            "confusion": self.confusion,
        }


def baseline_tfidf(train: LabeledCorpus, test: LabeledCorpus, plane_count=None, strategy="brute-force", config=TrainingConfig()):
    """Same pipeline with the contextual LSA distance swapped for cosine on
    raw tf-idf vectors."""
    policy = dict(config.policy) if isinstance(config.policy, dict) else config.policy
    from .model import parse_policy

    policy = parse_policy(policy)
    policy["contextual"] = "tfidf"
    cfg = TrainingConfig(policy, config.normalization, config.weights, config.seed, config.kmeans_seed, config.lsa_rank, config.lsa_energy, config.plane_labels)
    model = fit_for_corpus(train, plane_count, cfg)
    return evaluate_accuracy(model, test, strategy).accuracy


def plane_sweep(train: LabeledCorpus, test: LabeledCorpus, plane_counts=(2, 3, 4), strategies=STRATEGIES, config=TrainingConfig(), kmeans_cfg=None, with_baseline=False):
    """One EvalResult per (plane_count, strategy)."""
    results = []
    for pc in plane_counts:
        model = fit_for_corpus(train, pc, config)
        base = {}
        if with_baseline:
            base["tfidf"] = baseline_tfidf(train, test, pc, config=config)
        for s in strategies:
            s = canonical_strategy(s)
            pred = predict_levels(model, test, s, kmeans_cfg)
            acc = accuracy_of(test.labels, pred, test.n_levels)
            prec = precision_ill(test.labels, pred)
            results.append(EvalResult(s, pc, acc.accuracy, prec.value, None, dict(base), acc.confusion, acc.levels))
    return results


REPORT_COLUMNS = ("strategy", "plane_count", "accuracy", "precision_ill", "runtime_ns", "baseline_tfidf")


def report(results, runtime=None):
    """Render results as (json_text, csv_text), both deterministic."""
    rows = sorted(results, key=lambda r: (r.plane_count, STRATEGIES.index(r.strategy)))
    doc = {"results": [r.to_dict() for r in rows], "runtime_ns_per_record": dict(sorted((runtime or {}).items()))}
    js = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in rows:
        w.writerow([
            r.strategy,
            r.plane_count,
            f"{r.accuracy:.6f}",
            "" if r.precision_ill is None else f"{r.precision_ill:.6f}",
            "" if r.runtime_ns is None else f"{r.runtime_ns:.1f}",
            "" if "tfidf" not in r.baseline_scores else f"{r.baseline_scores['tfidf']:.6f}",
        ])
    return js, buf.getvalue()


__all__ = [
    "AccuracyResult",
    "EvalResult",
    "PrecisionResult",
    "TrainingConfig",
    "accuracy_of",
    "baseline_tfidf",
    "benchmark_runtime",
    "evaluate_accuracy",
    "evaluate_precision",
    "fit_for_corpus",
    "levels_for_plane_count",
    "parallel_planes",
    "plane_sweep",
    "precision_ill",
    "report",
]
