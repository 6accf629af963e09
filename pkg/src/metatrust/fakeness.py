"""Context-sensitive fakeness scoring on top of intention estimates.

A ContextProfile describes one application context (e.g. reconstructing a
road accident). It scores a modification either with a trained logistic
model or, when none is present, with declarative expert rules.
"""

from __future__ import annotations

import json
import logging
import math
import operator
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logit as _logit

from .errors import EmptyKeywordSet, ModelVersionError
from .intention import IntentionLevel
from .lsa import smoothed_idf
from .regression import LogisticModel, fit_logistic
from .text import contextual_tokens

log = logging.getLogger(__name__)

PROFILE_FORMAT = "metatrust-profile/1"
DEFAULT_THRESHOLDS = (0.33, 0.66)
VERDICTS = ("trustworthy", "suspect", "fake")
FEATURES = ("intention", "dz_hat", "dt_hat", "dc_hat", "keyword_significance")
CHANNEL_FEATURES = {"spatial": "dz_hat", "temporal": "dt_hat", "contextual": "dc_hat"}


class NoApplicableRule(UserWarning):
    pass


# ------------------------------------------------------------ weight rules

@dataclass(frozen=True)
class WeightRule:
    significance: str
    lo: float
    hi: float
    weight: int
    lo_inclusive: bool = True
    hi_inclusive: bool = True

    def __post_init__(self):
        if not 1 <= self.weight <= 5:
            raise ValueError("weight must be within 1..5")

    def contains(self, p):
        above = p > self.lo or (self.lo_inclusive and p == self.lo)
        below = p < self.hi or (self.hi_inclusive and p == self.hi)
        return above and below


# High >90% -> 5, High 80-90% -> 4, Medium 60-70% -> 3, Low <90% -> 2.
# The remaining rows close gaps so every (tier, precision) pair resolves.
WEIGHT_RULES = (
    WeightRule("high", 90.0, 100.0, 5, lo_inclusive=False),
    WeightRule("high", 80.0, 90.0, 4),
    WeightRule("high", 0.0, 80.0, 3, hi_inclusive=False),
    WeightRule("medium", 60.0, 70.0, 3),
    WeightRule("medium", 0.0, 60.0, 2, hi_inclusive=False),
    WeightRule("low", 0.0, 90.0, 2, hi_inclusive=False),
)


def resolve_weight(significance: str, precision_percent: float, rules=WEIGHT_RULES) -> int:
    """Look up a channel weight; a precision between bands falls to the
    nearest band below it."""
    tier = str(significance).strip().lower()
    p = float(precision_percent)
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"precision {p} outside [0, 100]")
    bands = [r for r in rules if r.significance == tier]
    if not bands:
        raise ValueError(f"unknown significance tier {significance!r}")
    for r in bands:
        if r.contains(p):
            return r.weight
    lower = [r for r in bands if r.hi <= p]
    if lower:
        return max(lower, key=lambda r: r.hi).weight
    return 1


# -------------------------------------------------------- keyword weights

def modified_keywords(pair):
    """Tokens added or removed between original and candidate."""
    return set(contextual_tokens(pair.original)) ^ set(contextual_tokens(pair.candidate))


def keyword_significance(modified, corpus_docs) -> dict:
    """TF-IDF weight of each modified token relative to a reference corpus,
    scaled so the most significant token scores 1."""
    counts = Counter(modified)
    if not counts:
        raise EmptyKeywordSet("no modified keywords")
    corpus_docs = [set(d) for d in corpus_docs]
    if not corpus_docs:
        raise ValueError("reference corpus is empty")
    n = len(corpus_docs)
    df = Counter()
    for d in corpus_docs:
        df.update(d)
    raw = {t: c * smoothed_idf(n, df.get(t, 0)) for t, c in counts.items()}
    top = max(raw.values())
    return {t: v / top for t, v in sorted(raw.items())}


def max_keyword_significance(pair, corpus_docs) -> float:
    mods = modified_keywords(pair)
    if not mods:
        return 0.0
    return max(keyword_significance(mods, corpus_docs).values())


# --------------------------------------------------------------- profiles

_OPS = {">": operator.gt, ">=": operator.ge, "<": operator.lt, "<=": operator.le, "==": operator.eq}


@dataclass(frozen=True)
class ExpertRule:
    conditions: tuple  # ((feature, op, threshold), ...), all must hold
    harm: bool
    confidence: float
    name: str = ""

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must lie in [0, 1]")
        for feat, op, _ in self.conditions:
            if feat not in FEATURES:
                raise ValueError(f"unknown rule feature {feat!r}")
            if op not in _OPS:
                raise ValueError(f"unknown operator {op!r}")

    def matches(self, features: dict) -> bool:
        return all(_OPS[op](features[feat], thr) for feat, op, thr in self.conditions)

    @property
    def score(self):
        return float(self.harm) * self.confidence


@dataclass(frozen=True)
class ContextProfile:
    name: str
    harm: dict = field(default_factory=lambda: {"spatial": 1.0, "temporal": 1.0, "contextual": 1.0})
    expert_rules: tuple = ()
    trained: LogisticModel | None = None
    thresholds: tuple = DEFAULT_THRESHOLDS

    def __post_init__(self):
        if not self.expert_rules and self.trained is None:
            raise ValueError(f"profile {self.name!r} needs expert rules or a trained model")
        lo, hi = self.thresholds
        if not 0.0 < lo < hi <= 1.0:
            raise ValueError(f"thresholds must satisfy 0 < suspect < fake <= 1, got {self.thresholds}")

    def verdict(self, score):
        lo, hi = self.thresholds
        if score < lo:
            return "trustworthy"
        if score < hi:
            return "suspect"
        return "fake"

    def to_dict(self):
        return {
            "format": PROFILE_FORMAT,
            "name": self.name,
            "harm": dict(sorted(self.harm.items())),
            "thresholds": list(self.thresholds),
            "rules": [
                {"name": r.name, "when": [list(c) for c in r.conditions], "harm": r.harm, "confidence": r.confidence}
                for r in self.expert_rules
            ],
            "trained": None if self.trained is None else self.trained.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != PROFILE_FORMAT:
            raise ModelVersionError(f"unsupported profile format {d.get('format')!r}; expected {PROFILE_FORMAT}")
        rules = tuple(
            ExpertRule(tuple(tuple(c) for c in r["when"]), bool(r["harm"]), float(r["confidence"]), r.get("name", ""))
            for r in d.get("rules", [])
        )
        trained = LogisticModel.from_dict(d["trained"]) if d.get("trained") else None
        return cls(d["name"], dict(d.get("harm", {})), rules, trained, tuple(d.get("thresholds", DEFAULT_THRESHOLDS)))

    def dumps(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ModelVersionError(f"profile is not JSON: {exc}") from None
        return cls.from_dict(d)


def load_builtin_profile(name="default") -> ContextProfile:
    from importlib import resources

    text = resources.files("metatrust").joinpath("data", "profiles", f"{name}.json").read_text(encoding="utf-8")
    return ContextProfile.from_dict(json.loads(text))


# ------------------------------------------------------------ translation

@dataclass
class FakenessReport:
    record_id: str
    intention: IntentionLevel
    fakeness_score: float
    verdict: str
    contributions: dict
    path: str
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "record_id": self.record_id,
            "intention": int(self.intention),
            "intention_label": self.intention.label,
            "fakeness_score": self.fakeness_score,
            "verdict": self.verdict,
            "path": self.path,
            "contributions": dict(sorted(self.contributions.items())),
            "warnings": list(self.warnings),
        }


def feature_dict(level, delta, keyword_sig, profile: ContextProfile) -> dict:
    dz, dt, dc = delta.as_tuple() if hasattr(delta, "as_tuple") else tuple(delta)
    h = profile.harm
    return {
        "intention": float(int(level)),
        "dz_hat": h.get("spatial", 1.0) * dz,
        "dt_hat": h.get("temporal", 1.0) * dt,
        "dc_hat": h.get("contextual", 1.0) * dc,
        "keyword_significance": float(keyword_sig),
    }


def translate(level, delta, keyword_sig, profile: ContextProfile, record_id="") -> FakenessReport:
    """Turn an intention estimate plus deltas into a fakeness report."""
    level = IntentionLevel(level)
    feats = feature_dict(level, delta, keyword_sig, profile)
    notes = []
    if profile.trained is not None:
        x = np.array([feats[f] for f in FEATURES])
        coef = profile.trained.coef
        contributions = {f: float(c * v) for f, c, v in zip(FEATURES, coef, x)}
        contributions["bias"] = float(profile.trained.intercept)
        z = math.fsum(contributions.values())
        score = float(1.0 / (1.0 + math.exp(-z)))
        path = "trained"
    else:
        hits = [r for r in profile.expert_rules if r.matches(feats)]
        contributions = {ch: 0.0 for ch in CHANNEL_FEATURES}
        contributions["intention"] = 0.0
        if not hits:
            notes.append("NoApplicableRule")
            warnings.warn(f"{record_id}: no expert rule applies in profile {profile.name!r}", NoApplicableRule, stacklevel=2)
            score = 0.0
        else:
            best = max(hits, key=lambda r: r.score)
            score = best.score
            # credit every input the winning rule conditions on
            names = {feat: ch for ch, feat in CHANNEL_FEATURES.items()}
            names["intention"] = "intention"
            for feat, _, _ in best.conditions:
                if feat in names:
                    contributions[names[feat]] = best.score
        path = "rules"
    score = min(1.0, max(0.0, score))
    return FakenessReport(record_id, level, score, profile.verdict(score), contributions, path, notes)


def train_translator(features, labels, seed=0, l2=1e-2, monotone=True, anchor=True, thresholds=DEFAULT_THRESHOLDS) -> LogisticModel:
    """Logistic fakeness model over FEATURES rows.

    ``monotone`` keeps the intention coefficient non-negative. ``anchor``
    adds an unmodified, well-intentioned sample labeled not-fake and, if
    the fit still scores it at or above the suspect threshold, lowers the
    intercept until it sits at half that threshold.
    """
    X = np.asarray(features, dtype=float).reshape(-1, len(FEATURES))
    y = np.asarray(labels, dtype=float)
    if anchor:
        X = np.vstack([X, np.zeros(len(FEATURES))])
        y = np.append(y, 0.0)
    bounds = [(0.0, None) if (monotone and f == "intention") else (None, None) for f in FEATURES]
    model = fit_logistic(X, y, seed=seed, l2=l2, bounds=bounds)
    if anchor and 1.0 / (1.0 + math.exp(-model.intercept)) >= thresholds[0]:
        model = LogisticModel(model.coef, float(_logit(thresholds[0] / 2)), model.train_accuracy, model.converged)
    n = len(labels)
    acc = float(np.mean((model.predict_proba(X[:n]) >= 0.5) == (np.asarray(labels) >= 0.5)))
    return LogisticModel(model.coef, model.intercept, acc, model.converged)


def score_pairs(pairs, model, profile: ContextProfile, strategy="brute-force", kmeans_cfg=None, reference_docs=None):
    """Intention estimation followed by translation, sorted by record id.

    ``reference_docs`` (token sets) anchor keyword significance; by default
    the originals of ``pairs`` are used.
    """
    from .model import estimate_intention

    pairs = sorted(pairs, key=lambda p: p.id)
    if reference_docs is None:
        seen = {}
        for p in pairs:
            seen.setdefault(p.original.id, set(contextual_tokens(p.original)))
        reference_docs = [seen[k] for k in sorted(seen)]
    estimates = estimate_intention(pairs, model, strategy, kmeans_cfg)
    reports = []
    for pair, est in zip(pairs, estimates):
        sig = max_keyword_significance(pair, reference_docs) if reference_docs else 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NoApplicableRule)
            reports.append(translate(est.level, est.delta, sig, profile, est.record_id))
    return reports


REPORT_CSV_COLUMNS = ("record_id", "intention", "intention_label", "fakeness_score", "verdict", "path",
                      "contrib_spatial", "contrib_temporal", "contrib_contextual", "warnings")


def reports_to_jsonl(reports) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in sorted(reports, key=lambda r: r.record_id))


def reports_to_csv(reports) -> str:
    import csv
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_CSV_COLUMNS)
    for r in sorted(reports, key=lambda r: r.record_id):
        c = r.contributions
        w.writerow([r.record_id, int(r.intention), r.intention.label, repr(r.fakeness_score), r.verdict, r.path,
                    repr(c.get("spatial", c.get("dz_hat", 0.0))), repr(c.get("temporal", c.get("dt_hat", 0.0))),
                    repr(c.get("contextual", c.get("dc_hat", 0.0))), ";".join(r.warnings)])
    return buf.getvalue()
