"""Trained intention model and the end-to-end estimation pipeline.

Training: deltas -> normalization -> channel weights -> intention function
(multinomial regression) -> intention planes fitted to the regression's
labels. Scoring: deltas -> same normalization and weights -> nearest plane.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import lsa
from .deltas import MISSING, QUANTITATIVE, SEMANTIC, DeltaVector, NormalizedDelta, Normalizer, quantitative_deltas
from .errors import CollinearClass, ModelVersionError
from .intention import (
    IntentionLevel,
    IntentionPlane,
    KMeansConfig,
    PlaneIndex,
    apply_weights,
    assign_clustered,
    assign_brute_force,
    assign_heuristic,
    canonical_strategy,
    fit_clusters,
    fit_plane,
    prepare_planes,
)
from .records import ServicePair
from .regression import SoftmaxModel, fit_softmax
from .text import channel_tokens

log = logging.getLogger(__name__)

MODEL_FORMAT = "metatrust-intention-model/1"

DEFAULT_POLICY = {"spatial": "quantitative", "temporal": "quantitative", "contextual": "semantic"}
POLICY_CHOICES = {
    "spatial": ("quantitative", "semantic"),
    "temporal": ("quantitative", "semantic"),
    # tfidf: cosine on raw tf-idf vectors, the no-SVD baseline
    "contextual": ("semantic", "quantitative", "tfidf"),
}


def parse_policy(text_or_dict=None) -> dict:
    """``"contextual=semantic,spatial=quantitative"`` or a dict -> full policy."""
    policy = dict(DEFAULT_POLICY)
    if not text_or_dict:
        return policy
    items = text_or_dict.items() if isinstance(text_or_dict, dict) else (
        part.split("=", 1) for part in str(text_or_dict).split(",") if part.strip()
    )
    for ch, mode in items:
        ch, mode = ch.strip(), mode.strip()
        if ch not in POLICY_CHOICES or mode not in POLICY_CHOICES[ch]:
            raise ValueError(f"invalid channel policy entry {ch}={mode}")
        policy[ch] = mode
    return policy


def fit_spaces(records, policy, weighting="term-frequency", rank=None, energy=None) -> dict:
    """One semantic space (or tf-idf vectorizer) per channel that needs it."""
    records = list({r.id: r for r in records}.values())
    spaces = {}
    for ch, mode in policy.items():
        if mode == "semantic":
            spaces[ch] = lsa.fit_channel_space(records, ch, weighting, rank=rank, energy=energy)
        elif ch == "contextual" and mode == "tfidf":
            docs = [channel_tokens(r, ch) for r in records]
            spaces[ch] = lsa.fit_vectorizer(docs, ch, "tf-idf")
    return spaces


def pair_deltas(pair: ServicePair, policy=None, spaces=None) -> DeltaVector:
    """Raw deltas under a channel policy; semantic channels replace the
    quantitative value with a cosine distance between latent vectors."""
    policy = policy or DEFAULT_POLICY
    spaces = spaces or {}
    dv = quantitative_deltas(pair)
    attr = {"spatial": "d_spatial_km", "temporal": "d_temporal", "contextual": "d_contextual"}
    for ch, mode in policy.items():
        if mode == "quantitative":
            continue
        o = channel_tokens(pair.original, ch)
        m = channel_tokens(pair.candidate, ch)
        if not o and not m:
            setattr(dv, attr[ch], None)
            dv.provenance[ch] = MISSING
            continue
        space = spaces[ch]
        if isinstance(space, lsa.SemanticSpace):
            value = lsa.channel_semantic_delta(pair, space)
        else:
            value = lsa.raw_vector_distance(pair, space)
        setattr(dv, attr[ch], value)
        dv.provenance[ch] = SEMANTIC
    return dv


@dataclass
class IntentionEstimate:
    record_id: str
    level: IntentionLevel
    distance: float
    delta: NormalizedDelta
    provenance: dict
    raw: DeltaVector | None = None


@dataclass
class IntentionModel:
    theta: SoftmaxModel
    planes: list[IntentionPlane]
    weights: tuple[int, int, int]
    normalizer: Normalizer
    policy: dict
    spaces: dict = field(default_factory=dict)
    seed: int = 0
    kmeans_seed: int = 0
    plane_labels: str = "theta"
    weights_before_planes: bool = True
    anchor_level: IntentionLevel | None = None
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def levels_used(self):
        return [p.level for p in self.planes]

    # -- scoring -----------------------------------------------------------

    def deltas(self, pairs):
        return [pair_deltas(p, self.policy, self.spaces) for p in pairs]

    def points(self, deltas) -> np.ndarray:
        X = np.array([self.normalizer.scale(dv.values()) for dv in deltas], dtype=float).reshape(-1, 3)
        return apply_weights(X, self.weights) if self.weights_before_planes else X

    def plane_index(self) -> PlaneIndex:
        if "planes" not in self._index:
            self._index["planes"] = prepare_planes(self.planes, (1.0, 1.0, 1.0))
        return self._index["planes"]

    def assign(self, X, strategy="brute-force", kmeans_cfg: KMeansConfig | None = None):
        strategy = canonical_strategy(strategy)
        X = np.asarray(X, dtype=float).reshape(-1, 3)
        if len(X) == 0:
            return [], []
        index = self.plane_index()
        if strategy == "brute-force":
            levels, dists = assign_brute_force(X, index)
        elif strategy == "heuristic":
            levels, dists = assign_heuristic(X, index)
        else:
            cfg = kmeans_cfg or KMeansConfig(None, self.kmeans_seed)
            k = cfg.k
            if k is not None:
                k = min(k, len(np.unique(X, axis=0)))
            clusters = fit_clusters(X, k, cfg.seed)
            levels, dists = assign_clustered(clusters, index)
        return [IntentionLevel(l) for l in levels], dists

    def predict_theta(self, X):
        return [IntentionLevel(int(c)) for c in self.theta.predict(X)]

    # -- persistence ---------------------------------------------------------

    def to_dict(self):
        spaces = {}
        for ch, sp in sorted(self.spaces.items()):
            if isinstance(sp, lsa.SemanticSpace):
                spaces[ch] = {"kind": "lsa", "space": sp.to_dict()}
            else:
                spaces[ch] = {
                    "kind": "tfidf",
                    "config": {
                        "channel": sp.channel,
                        "weighting": sp.weighting,
                        "vocabulary": list(sp.vocabulary),
                        "min_token_count": sp.min_token_count,
                        "idf": list(sp.idf),
                    },
                }
        return {
            "format": MODEL_FORMAT,
            "levels": [{"ordinal": int(p.level), "label": p.level.label} for p in self.planes],
            "planes": [p.to_dict() for p in self.planes],
            "theta": self.theta.to_dict(),
            "weights": list(self.weights),
            "normalizer": self.normalizer.to_dict(),
            "channel_policy": dict(sorted(self.policy.items())),
            "spaces": spaces,
            "seeds": {"regression": self.seed, "kmeans": self.kmeans_seed},
            "plane_labels": self.plane_labels,
            "weights_before_planes": self.weights_before_planes,
            "anchor_level": None if self.anchor_level is None else int(self.anchor_level),
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != MODEL_FORMAT:
            raise ModelVersionError(f"unsupported model format {d.get('format')!r}; expected {MODEL_FORMAT}")
        spaces = {}
        for ch, entry in d.get("spaces", {}).items():
            if entry["kind"] == "lsa":
                spaces[ch] = lsa.SemanticSpace.from_dict(entry["space"])
            else:
                c = entry["config"]
                spaces[ch] = lsa.VectorizerConfig(c["channel"], c["weighting"], tuple(c["vocabulary"]), c["min_token_count"], tuple(c["idf"]))
        anchor = d.get("anchor_level")
        return cls(
            theta=SoftmaxModel.from_dict(d["theta"]),
            planes=[IntentionPlane.from_dict(p) for p in d["planes"]],
            weights=tuple(d["weights"]),
            normalizer=Normalizer.from_dict(d["normalizer"]),
            policy=dict(d["channel_policy"]),
            spaces=spaces,
            seed=d["seeds"]["regression"],
            kmeans_seed=d["seeds"]["kmeans"],
            plane_labels=d.get("plane_labels", "theta"),
            weights_before_planes=d.get("weights_before_planes", True),
            anchor_level=None if anchor is None else IntentionLevel(anchor),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            try:
                d = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ModelVersionError(f"model file is not JSON: {exc}") from None
        return cls.from_dict(d)


def load_default_model() -> IntentionModel:
    """Model trained on the bundled sample corpus."""
    from importlib import resources

    text = resources.files("metatrust").joinpath("data", "default_model.json").read_text(encoding="utf-8")
    return IntentionModel.from_dict(json.loads(text))


class CalibrationWarning(UserWarning):
    pass


def train_model(
    pairs,
    labels,
    *,
    policy=None,
    normalization="per-channel",
    weights=(5, 5, 5),
    levels=None,
    seed=0,
    kmeans_seed=0,
    lsa_rank=None,
    lsa_energy=None,
    lsa_weighting="term-frequency",
    plane_labels="theta",
    weights_before_planes=True,
    space_records=None,
) -> IntentionModel:
    """Fit an intention model on labeled pairs.

    ``levels`` restricts the model to a subset of intention levels (one
    plane each); samples with other labels are ignored. ``plane_labels``
    chooses whether planes are fitted to the regression's predicted labels
    ("theta") or to the given labels ("given").
    """
    pairs = list(pairs)
    labels = [IntentionLevel.parse(l) for l in labels]
    policy = parse_policy(policy)
    if space_records is None:
        space_records = [r for p in pairs for r in (p.original, p.candidate)]
    spaces = fit_spaces(space_records, policy, lsa_weighting, lsa_rank, lsa_energy)
    deltas = [pair_deltas(p, policy, spaces) for p in pairs]
    normalizer = Normalizer.fit(deltas, normalization)
    X = np.array([normalizer.scale(dv.values()) for dv in deltas], dtype=float)
    Xw = apply_weights(X, weights)
    y = np.array([int(l) for l in labels])
    if levels is not None:
        keep = np.isin(y, [int(l) for l in levels])
        Xw, X, y = Xw[keep], X[keep], y[keep]
    theta = fit_softmax(Xw, y, seed=seed, min_per_class=4)
    log.info("intention regression training accuracy %.4f", theta.train_accuracy)

    Xp = Xw if weights_before_planes else X
    fit_on = theta.predict(Xw) if plane_labels == "theta" else y
    planes = []
    for level in sorted(set(y.tolist())):
        pts = Xp[fit_on == level]
        try:
            planes.append(fit_plane(pts, IntentionLevel(level)))
        except CollinearClass:
            # regression left this level too thin, fall back to the given labels
            planes.append(fit_plane(Xp[y == level], IntentionLevel(level)))
    model = IntentionModel(
        theta=theta,
        planes=planes,
        weights=tuple(int(w) for w in weights),
        normalizer=normalizer,
        policy=policy,
        spaces=spaces,
        seed=seed,
        kmeans_seed=kmeans_seed,
        plane_labels=plane_labels,
        weights_before_planes=weights_before_planes,
    )
    origin_level = model.assign(np.zeros((1, 3)))[0][0]
    model.anchor_level = origin_level
    if origin_level != min(p.level for p in planes):
        warnings.warn(
            f"zero-delta point maps to {origin_level.label}, not the lowest level", CalibrationWarning, stacklevel=2
        )
    return model


def estimate_intention(pairs, model: IntentionModel, strategy="brute-force", kmeans_cfg=None) -> list[IntentionEstimate]:
    pairs = list(pairs)
    deltas = model.deltas(pairs)
    X = model.points(deltas)
    levels, dists = model.assign(X, strategy, kmeans_cfg)
    out = []
    for dv, lv, dist in zip(deltas, levels, dists):
        nd = model.normalizer.apply(dv)
        out.append(IntentionEstimate(dv.record_id, lv, float(dist), nd, dict(dv.provenance), dv))
    return out


__all__ = [
    "DEFAULT_POLICY",
    "IntentionEstimate",
    "IntentionModel",
    "load_default_model",
    "MODEL_FORMAT",
    "estimate_intention",
    "fit_spaces",
    "pair_deltas",
    "parse_policy",
    "train_model",
    "QUANTITATIVE",
    "SEMANTIC",
]
