"""Quantitative deltas between an original and a candidate record.

Spatial deltas are great-circle kilometres, temporal deltas are the
Manhattan distance over calendar components, contextual deltas are
one minus the Jaccard similarity of token sets. ``normalize_deltas``
maps a corpus of deltas onto [0, 1].
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .errors import EmptyCorpus, MissingChannel
from .records import ServicePair, TimePoint
from .text import contextual_tokens

EARTH_RADIUS_KM = 6371.0

QUANTITATIVE = "quantitative"
SEMANTIC = "semantic"
MISSING = "missing"

CHANNEL_KEYS = ("spatial", "temporal", "contextual")

# which temporal attribute feeds the Manhattan delta, first present on both sides wins
TEMPORAL_FALLBACK = ("datetime_original", "date_digitized", "gps_timestamp")


def temporal_manhattan(t_o: TimePoint | None, t_m: TimePoint | None) -> float:
    if t_o is None or t_m is None:
        raise MissingChannel("temporal")
    return float(sum(abs(a - b) for a, b in zip(t_o.components(), t_m.components())))


def haversine_km(s_o, s_m, radius_km: float = EARTH_RADIUS_KM) -> float:
    """Great-circle distance between two (lat, lon) pairs in degrees."""
    if s_o is None or s_m is None or None in tuple(s_o) or None in tuple(s_m):
        raise MissingChannel("spatial")
    lat1, lon1 = map(math.radians, s_o)
    lat2, lon2 = map(math.radians, s_m)
    dphi = lat2 - lat1
    dlam = lon2 - lon1
    a = math.sin(dphi / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlam / 2) ** 2
    a = min(1.0, max(0.0, a))
    c = 2 * math.atan2(math.sqrt(a), math.sqrt(1 - a))
    return radius_km * c


def contextual_jaccard(c_o, c_m) -> float:
    c_o, c_m = set(c_o), set(c_m)
    union = c_o | c_m
    if not union:
        return 1.0  # nothing on either side: no change observed
    return len(c_o & c_m) / len(union)


def contextual_distance(c_o, c_m) -> float:
    return 1.0 - contextual_jaccard(c_o, c_m)


@dataclass
class DeltaVector:
    record_id: str
    d_spatial_km: float | None = None
    d_temporal: float | None = None
    d_contextual: float | None = None
    provenance: dict = field(default_factory=lambda: {k: MISSING for k in CHANNEL_KEYS})

    def values(self):
        """Channel values with missing channels imputed as 0."""
        return tuple(0.0 if v is None else float(v) for v in (self.d_spatial_km, self.d_temporal, self.d_contextual))


@dataclass(frozen=True)
class NormalizedDelta:
    dz_hat: float
    dt_hat: float
    dc_hat: float

    def __post_init__(self):
        for v in (self.dz_hat, self.dt_hat, self.dc_hat):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"normalized delta {v} outside [0, 1]")

    def as_tuple(self):
        return (self.dz_hat, self.dt_hat, self.dc_hat)


def _temporal_pair(pair: ServicePair):
    for name in TEMPORAL_FALLBACK:
        a = getattr(pair.original.temporal, name)
        b = getattr(pair.candidate.temporal, name)
        if a is not None and b is not None:
            return a, b
    return None


def quantitative_deltas(pair: ServicePair) -> DeltaVector:
    """All three channels measured quantitatively; absent channels flagged missing."""
    dv = DeltaVector(pair.candidate.id)
    so, sm = pair.original.spatial, pair.candidate.spatial
    if so.has_gps and sm.has_gps:
        dv.d_spatial_km = haversine_km((so.gps_latitude, so.gps_longitude), (sm.gps_latitude, sm.gps_longitude))
        dv.provenance["spatial"] = QUANTITATIVE
    tp = _temporal_pair(pair)
    if tp is not None:
        dv.d_temporal = temporal_manhattan(*tp)
        dv.provenance["temporal"] = QUANTITATIVE
    co, cm = set(contextual_tokens(pair.original)), set(contextual_tokens(pair.candidate))
    if co or cm:
        dv.d_contextual = contextual_distance(co, cm)
        dv.provenance["contextual"] = QUANTITATIVE
    return dv


@dataclass(frozen=True)
class Normalizer:
    """Min-max bounds learned from a corpus, reusable on new deltas.

    ``per-channel`` keeps separate bounds for each channel. ``paper-literal``
    pools min and max across all three channels. Values outside the learned
    range are clipped; a degenerate range maps to 0.
    """

    mode: str
    lows: tuple[float, float, float]
    highs: tuple[float, float, float]

    @classmethod
    def fit(cls, corpus_deltas, mode: str = "per-channel") -> "Normalizer":
        rows = [dv.values() for dv in corpus_deltas]
        if not rows:
            raise EmptyCorpus("cannot normalize an empty corpus")
        if mode == "per-channel":
            lows = tuple(min(r[i] for r in rows) for i in range(3))
            highs = tuple(max(r[i] for r in rows) for i in range(3))
        elif mode in ("paper-literal", "paper"):
            mode = "paper-literal"
            lo = min(min(r) for r in rows)
            hi = max(max(r) for r in rows)
            lows, highs = (lo,) * 3, (hi,) * 3
        else:
            raise ValueError(f"unknown normalization mode {mode!r}")
        return cls(mode, lows, highs)

    def scale(self, values) -> tuple[float, float, float]:
        out = []
        for v, lo, hi in zip(values, self.lows, self.highs):
            if hi <= lo:
                out.append(0.0)
            else:
                out.append(min(1.0, max(0.0, (v - lo) / (hi - lo))))
        return tuple(out)

    def apply(self, dv: DeltaVector) -> NormalizedDelta:
        return NormalizedDelta(*self.scale(dv.values()))

    def to_dict(self):
        return {"mode": self.mode, "lows": list(self.lows), "highs": list(self.highs)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["mode"], tuple(d["lows"]), tuple(d["highs"]))


def normalize_deltas(corpus_deltas, mode: str = "per-channel") -> list[NormalizedDelta]:
    corpus_deltas = list(corpus_deltas)
    norm = Normalizer.fit(corpus_deltas, mode)
    return [norm.apply(dv) for dv in corpus_deltas]


DELTA_CSV_COLUMNS = (
    "id",
    "d_spatial_km",
    "d_temporal",
    "d_contextual",
    "dz_hat",
    "dt_hat",
    "dc_hat",
    "prov_spatial",
    "prov_temporal",
    "prov_contextual",
)


def _fmt(v):
    return "" if v is None else repr(float(v))


def deltas_to_csv(deltas, normalized) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DELTA_CSV_COLUMNS)
    for dv, nd in sorted(zip(deltas, normalized), key=lambda p: p[0].record_id):
        w.writerow(
            [dv.record_id, _fmt(dv.d_spatial_km), _fmt(dv.d_temporal), _fmt(dv.d_contextual)]
            + [_fmt(x) for x in nd.as_tuple()]
            + [dv.provenance[k] for k in CHANNEL_KEYS]
        )
    return buf.getvalue()
