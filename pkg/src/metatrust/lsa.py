"""Latent semantic analysis over one metadata channel.

Records are turned into an image-attribute matrix (rows = images,
columns = vocabulary tokens), factored with a truncated SVD, and compared
by cosine distance between latent image vectors.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyCorpus, EmptyVocabulary, RankDeficient, ZeroMatrix
from .records import ServicePair
from .text import CHANNELS, channel_tokens

log = logging.getLogger(__name__)

SPACE_FORMAT = "metatrust-semantic-space/1"
WEIGHTINGS = ("binary", "term-frequency", "tf-idf")


@dataclass(frozen=True)
class VectorizerConfig:
    channel: str = "contextual"
    weighting: str = "term-frequency"
    vocabulary: tuple[str, ...] = ()
    min_token_count: int = 1
    idf: tuple[float, ...] = ()  # only used by tf-idf weighting

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"unknown weighting {self.weighting!r}")
        if self.min_token_count < 1:
            raise ValueError("min_token_count must be >= 1")
        if len(set(self.vocabulary)) != len(self.vocabulary):
            raise ValueError("vocabulary tokens must be unique")


def smoothed_idf(n_docs, doc_freq):
    return math.log((1 + n_docs) / (1 + doc_freq)) + 1.0


def fit_vectorizer(documents, channel="contextual", weighting="term-frequency", min_token_count=1) -> VectorizerConfig:
    """Vocabulary (sorted) of tokens seen at least ``min_token_count`` times."""
    counts = Counter()
    df = Counter()
    for doc in documents:
        counts.update(doc)
        df.update(set(doc))
    vocab = tuple(sorted(t for t, c in counts.items() if c >= min_token_count))
    if not vocab:
        raise EmptyVocabulary(f"no {channel} token reaches min count {min_token_count}")
    idf = ()
    if weighting == "tf-idf":
        n = len(documents)
        idf = tuple(smoothed_idf(n, df[t]) for t in vocab)
    return VectorizerConfig(channel, weighting, vocab, min_token_count, idf)


def vectorize(tokens, config: VectorizerConfig) -> np.ndarray:
    if not config.vocabulary:
        raise EmptyVocabulary("config has no vocabulary")
    col = {t: j for j, t in enumerate(config.vocabulary)}
    row = np.zeros(len(config.vocabulary))
    for tok in tokens:
        j = col.get(tok)
        if j is not None:
            row[j] += 1.0
    if config.weighting == "binary":
        row = (row > 0).astype(float)
    elif config.weighting == "tf-idf":
        row = row * np.asarray(config.idf)
    return row


def build_matrix(records, config: VectorizerConfig | None = None, channel="contextual", weighting="term-frequency"):
    """Image-attribute matrix for ``records``.

    Without a config the vocabulary is learned from the records. Returns
    ``(M, config)``; rows with no in-vocabulary token are all-zero and
    logged.
    """
    records = list(records)
    if not records:
        raise EmptyCorpus("no records to vectorize")
    docs = [channel_tokens(r, config.channel if config else channel) for r in records]
    if config is None:
        config = fit_vectorizer(docs, channel, weighting)
    M = np.vstack([vectorize(d, config) for d in docs])
    empty = [records[i].id for i in np.flatnonzero(~M.any(axis=1))]
    if empty:
        log.warning("%d record(s) with no %s vocabulary: %s", len(empty), config.channel, ", ".join(empty[:5]))
    return M, config


def zero_rows(M) -> list[int]:
    return [int(i) for i in np.flatnonzero(~np.asarray(M).any(axis=1))]


@dataclass(frozen=True)
class SemanticSpace:
    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    config: VectorizerConfig | None = None

    @property
    def r(self):
        return int(self.S.shape[0])

    def to_dict(self):
        c = self.config
        return {
            "format": SPACE_FORMAT,
            "r": self.r,
            "config": None
            if c is None
            else {
                "channel": c.channel,
                "weighting": c.weighting,
                "vocabulary": list(c.vocabulary),
                "min_token_count": c.min_token_count,
                "idf": list(c.idf),
            },
            "U": self.U.tolist(),
            "S": self.S.tolist(),
            "V": self.V.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        from .errors import ModelVersionError

        if d.get("format") != SPACE_FORMAT:
            raise ModelVersionError(f"unsupported semantic space format {d.get('format')!r}")
        c = d["config"]
        config = None
        if c is not None:
            config = VectorizerConfig(c["channel"], c["weighting"], tuple(c["vocabulary"]), c["min_token_count"], tuple(c["idf"]))
        r = d["r"]
        U = np.asarray(d["U"], dtype=float).reshape(-1, r)
        V = np.asarray(d["V"], dtype=float).reshape(-1, r)
        return cls(U, np.asarray(d["S"], dtype=float), V, config)


def choose_rank(s, rank=None, energy=None) -> int:
    """Fixed ``rank``, or the smallest r whose cumulative energy reaches ``energy``."""
    if rank is not None:
        if not 1 <= rank <= len(s):
            raise ValueError(f"rank {rank} outside 1..{len(s)}")
        return int(rank)
    if energy is None:
        energy = 0.90
    if not 0.0 < energy <= 1.0:
        raise ValueError("energy threshold must lie in (0, 1]")
    sq = np.asarray(s) ** 2
    ratio = np.cumsum(sq) / sq.sum()
    # tolerance keeps theta = 1 from failing on round-off
    return int(np.searchsorted(ratio, energy - 1e-12) + 1)


def fit_space(M, rank: int | None = None, energy: float | None = None, config: VectorizerConfig | None = None) -> SemanticSpace:
    """Truncated SVD of ``M``; default rank rule keeps 90% of the energy."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or not np.any(M):
        raise ZeroMatrix("matrix has no nonzero entry")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    r = choose_rank(s, rank, energy)
    U, s, V = U[:, :r], s[:r], Vt[:r].T
    # sign convention: largest-magnitude entry of each V column positive
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(r)])
    signs[signs == 0] = 1.0
    return SemanticSpace(U * signs, s.copy(), V * signs, config)


def embed(record_row, space: SemanticSpace) -> np.ndarray:
    """Fold a row into the latent space: x V diag(S)^-1."""
    x = np.asarray(record_row, dtype=float)
    if x.shape[-1] != space.V.shape[0]:
        raise DimensionMismatch(f"row has {x.shape[-1]} columns, space expects {space.V.shape[0]}")
    if np.any(space.S <= 0):
        raise RankDeficient("retained singular value is zero; lower the rank")
    return (x @ space.V) / space.S


def semantic_distance(v_o, v_m) -> float:
    """1 - cosine similarity; an all-zero vector is maximally dissimilar (1)."""
    a = np.asarray(v_o, dtype=float)
    b = np.asarray(v_m, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 1.0
    if np.array_equal(a, b):
        return 0.0
    cos = float(a @ b) / (na * nb)
    return min(2.0, max(0.0, 1.0 - cos))


def fit_channel_space(records, channel="contextual", weighting="term-frequency", rank=None, energy=None) -> SemanticSpace:
    M, config = build_matrix(records, channel=channel, weighting=weighting)
    return fit_space(M, rank=rank, energy=energy, config=config)


def channel_semantic_delta(pair: ServicePair, space: SemanticSpace) -> float:
    if space.config is None:
        raise ValueError("space carries no vectorizer config")
    ch = space.config.channel
    v_o = embed(vectorize(channel_tokens(pair.original, ch), space.config), space)
    v_m = embed(vectorize(channel_tokens(pair.candidate, ch), space.config), space)
    return semantic_distance(v_o, v_m)


def raw_vector_distance(pair: ServicePair, config: VectorizerConfig) -> float:
    """Cosine distance on un-reduced weighted vectors (no SVD)."""
    ch = config.channel
    return semantic_distance(
        vectorize(channel_tokens(pair.original, ch), config), vectorize(channel_tokens(pair.candidate, ch), config)
    )
