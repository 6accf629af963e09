"""Intention levels, intention planes, k-means and nearest-plane assignment.

Points live in normalized (dz, dt, dc) space. Each intention level owns a
plane fitted to its labeled points; a point is assigned the level of the
plane at the smallest orthogonal distance.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from enum import IntEnum
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from .errors import CollinearClass, KTooLarge, NoPlanes, VerticalPlane


class IntentionLevel(IntEnum):
    WELL_INTENTION = 0
    BORDER_LINE = 1
    MODERATELY_ILL = 2
    VERY_ILL = 3
    EXTREMELY_ILL = 4

    @property
    def label(self):
        return self.name.lower().replace("_", "-")

    @classmethod
    def parse(cls, value):
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        text = str(value).strip().lower().replace("_", "-")
        if text.isdigit():
            return cls(int(text))
        for level in cls:
            if level.label == text:
                return level
        raise ValueError(f"unknown intention level {value!r}")

    @property
    def is_ill(self):
        return self >= IntentionLevel.MODERATELY_ILL


ILL_THRESHOLD = IntentionLevel.MODERATELY_ILL


@dataclass(frozen=True)
class ModificationPoint:
    dz_hat: float
    dt_hat: float
    dc_hat: float
    record_id: str = ""

    def __post_init__(self):
        for v in (self.dz_hat, self.dt_hat, self.dc_hat):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"component {v} outside [0, 1]")

    def as_array(self):
        return np.array([self.dz_hat, self.dt_hat, self.dc_hat])


def as_points(points) -> np.ndarray:
    """Accept ModificationPoints, tuples or an (N, 3) array."""
    if isinstance(points, np.ndarray):
        arr = points.astype(float, copy=False)
    else:
        points = list(points)
        if points and isinstance(points[0], ModificationPoint):
            arr = np.array([p.as_array() for p in points])
        else:
            arr = np.asarray(points, dtype=float)
    return arr.reshape(-1, 3)


# ------------------------------------------------------------------ planes

@dataclass(frozen=True)
class IntentionPlane:
    """a*dz + b*dt + c*dc + d = 0, stored with unit normal whose first
    nonzero component is positive."""

    a: float
    b: float
    c: float
    d: float
    level: IntentionLevel = IntentionLevel.WELL_INTENTION
    residual_rms: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.a == 0 and self.b == 0 and self.c == 0:
            raise ValueError("plane normal must be nonzero")

    @classmethod
    def normalized(cls, a, b, c, d, level=IntentionLevel.WELL_INTENTION, residual_rms=0.0):
        a, b, c, d = float(a), float(b), float(c), float(d)
        n = math.sqrt(a * a + b * b + c * c)
        if n == 0:
            raise ValueError("plane normal must be nonzero")
        # already unit length up to round-off: leave the bits alone so that
        # normalizing twice is exactly a no-op
        if abs(n - 1.0) > 4 * sys.float_info.epsilon:
            a, b, c, d = a / n, b / n, c / n, d / n
        first = next(v for v in (a, b, c) if v != 0)
        if first < 0:
            a, b, c, d = -a, -b, -c, -d
        return cls(a + 0.0, b + 0.0, c + 0.0, d + 0.0, IntentionLevel(level), residual_rms)

    def normalize(self):
        return IntentionPlane.normalized(self.a, self.b, self.c, self.d, self.level, self.residual_rms)

    @property
    def coefficients(self):
        return (self.a, self.b, self.c, self.d)

    def to_dict(self):
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d, "level": int(self.level), "residual_rms": self.residual_rms}

    @classmethod
    def from_dict(cls, d):
        return cls(d["a"], d["b"], d["c"], d["d"], IntentionLevel(d["level"]), d.get("residual_rms", 0.0))


def point_plane_distance(p, plane: IntentionPlane) -> float:
    x, y, z = p.as_array() if isinstance(p, ModificationPoint) else p
    a, b, c, d = plane.coefficients
    return abs(a * x + b * y + c * z + d) / math.sqrt(a * a + b * b + c * c)


def plane_distances(points, planes) -> np.ndarray:
    """(N, P) matrix of orthogonal distances."""
    X = as_points(points)
    coef = np.array([pl.coefficients for pl in planes], dtype=float)
    norms = np.linalg.norm(coef[:, :3], axis=1)
    return np.abs(X @ coef[:, :3].T + coef[:, 3]) / norms


def fit_plane(points, level=IntentionLevel.WELL_INTENTION, rel_tol=1e-9) -> IntentionPlane:
    """Orthogonal least-squares plane: normal is the least-variance direction."""
    X = as_points(points)
    if len(X) < 3:
        raise CollinearClass(f"level {IntentionLevel(level).label}: need >= 3 points, got {len(X)}")
    centroid = X.mean(axis=0)
    _, s, vt = np.linalg.svd(X - centroid, full_matrices=False)
    scale = max(s[0], 1e-300)
    if len(s) < 2 or s[1] <= rel_tol * scale or s[0] == 0:
        raise CollinearClass(f"level {IntentionLevel(level).label}: points are collinear, plane underdetermined")
    normal = vt[-1]
    d = -float(normal @ centroid)
    rms = float(np.sqrt(np.mean((X @ normal + d) ** 2)))
    return IntentionPlane.normalized(*normal.tolist(), d, level, rms)


def fit_planes(points, levels) -> list[IntentionPlane]:
    X = as_points(points)
    y = np.asarray([int(l) for l in levels])
    planes = []
    for level in sorted(set(y.tolist())):
        planes.append(fit_plane(X[y == level], IntentionLevel(level)))
    return planes


def plane_area(plane: IntentionPlane) -> float:
    """Integral of the plane height dc(dz, dt) over the unit square."""
    a, b, c, d = plane.coefficients
    if abs(c) < 1e-15:
        raise VerticalPlane("plane has no dc component; height undefined")
    return -(a / 2 + b / 2 + d) / c


def apply_weights(points, weights):
    """Scale each channel by weight / 5; weight 5 leaves a channel untouched."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (3,) or np.any(w < 1) or np.any(w > 5):
        raise ValueError(f"weights must be three values in 1..5, got {weights}")
    if isinstance(points, ModificationPoint):
        v = points.as_array() * w / 5.0
        return ModificationPoint(*v.tolist(), points.record_id)
    return as_points(points) * (w / 5.0)


# ------------------------------------------------------------------ k-means

@dataclass
class KMeansResult:
    centroids: np.ndarray
    labels: np.ndarray
    wcss_history: list[float]
    n_iter: int

    @property
    def wcss(self):
        return self.wcss_history[-1]


def _sq_dists(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def kmeans_plus_plus(X, k, rng):
    n = len(X)
    centers = [X[rng.integers(n)]]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # remaining points coincide with chosen centres
            idx = int(np.flatnonzero(d2 >= 0)[rng.integers(n)])
        else:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(X[idx])
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def kmeans(points, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-9) -> KMeansResult:
    """Lloyd iterations from a seeded k-means++ start."""
    X = as_points(points)
    if k < 1:
        raise ValueError("k must be >= 1")
    distinct = len(np.unique(X, axis=0))
    if k > distinct:
        raise KTooLarge(f"k={k} exceeds {distinct} distinct points")
    rng = np.random.default_rng(seed)
    C = kmeans_plus_plus(X, k, rng)
    history = []
    labels = None
    it = 0
    for it in range(1, max_iter + 1):
        D = _sq_dists(X, C)
        labels = np.argmin(D, axis=1)
        history.append(float(D[np.arange(len(X)), labels].sum()))
        newC = C.copy()
        for j in range(k):
            members = X[labels == j]
            if len(members):
                newC[j] = members.mean(axis=0)
        shift = float(np.max(np.linalg.norm(newC - C, axis=1)))
        C = newC
        if shift < tol:
            break
    D = _sq_dists(X, C)
    final = np.argmin(D, axis=1)
    wcss = float(D[np.arange(len(X)), final].sum())
    if wcss < history[-1] or not np.array_equal(final, labels):
        history.append(wcss)
    return KMeansResult(C, final, history, it)


def default_k(n_points: int) -> int:
    return max(1, math.ceil(math.sqrt(n_points / 2)))


# -------------------------------------------------------------- assignment

STRATEGIES = ("brute-force", "heuristic", "clustered")
_ALIASES = {"brute": "brute-force", "heur": "heuristic", "cluster": "clustered"}


def canonical_strategy(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in STRATEGIES:
        raise ValueError(f"unknown strategy {name!r}; expected one of {STRATEGIES}")
    return name


def _plane_rows(planes):
    """Unit-normal coefficient tuples sorted by level, for the scalar loops."""
    rows = []
    for pl in sorted(planes, key=lambda p: int(p.level)):
        n = math.sqrt(pl.a * pl.a + pl.b * pl.b + pl.c * pl.c)
        rows.append((pl.a / n, pl.b / n, pl.c / n, pl.d / n, int(pl.level)))
    return rows


def plane_separation(p: IntentionPlane, q: IntentionPlane, upper) -> float:
    """min over the box [0, upper] of dist(x, p) + dist(x, q).

    Zero when the planes meet inside the box. Solved as a small LP.
    """
    (a1, b1, c1, d1, _), (a2, b2, c2, d2, _) = _plane_rows([p]) + _plane_rows([q])
    # variables x, y, z, u, v ; minimise u + v with u >= |n1.x + d1|, v >= |n2.x + d2|
    A = [
        [a1, b1, c1, -1, 0],
        [-a1, -b1, -c1, -1, 0],
        [a2, b2, c2, 0, -1],
        [-a2, -b2, -c2, 0, -1],
    ]
    rhs = [-d1, d1, -d2, d2]
    bounds = [(0, upper[0]), (0, upper[1]), (0, upper[2]), (0, None), (0, None)]
    res = linprog([0, 0, 0, 1, 1], A_ub=A, b_ub=rhs, bounds=bounds, method="highs")
    if not res.success:
        return 0.0
    return max(0.0, float(res.fun))


@dataclass(frozen=True)
class PlaneIndex:
    """Plane data prepared once per model for repeated scoring."""

    rows: tuple
    min_separation: float
    domain_upper: tuple[float, float, float]

    @property
    def exit_bound(self):
        # strictly below half the closest separation -> no other plane can be nearer;
        # shaved slightly to stay safe against LP round-off
        return 0.5 * self.min_separation * (1 - 1e-9)


def prepare_planes(planes, domain_upper=(1.0, 1.0, 1.0)) -> PlaneIndex:
    if not planes:
        raise NoPlanes("no intention planes")
    planes = list(planes)
    if len(planes) == 1:
        sep = math.inf
    else:
        sep = min(plane_separation(p, q, domain_upper) for p, q in combinations(planes, 2))
    return PlaneIndex(tuple(_plane_rows(planes)), sep, tuple(domain_upper))


def _nearest_scan(x, y, z, rows):
    best = math.inf
    best_level = -1
    for a, b, c, d, level in rows:
        dist = abs(a * x + b * y + c * z + d)
        if dist < best or (dist == best and level < best_level):
            best = dist
            best_level = level
    return best_level, best


def assign_brute_force(X, index: PlaneIndex):
    rows = index.rows
    levels, dists = [], []
    for x, y, z in X.tolist():
        lv, dv = _nearest_scan(x, y, z, rows)
        levels.append(lv)
        dists.append(dv)
    return levels, dists


def heuristic_order(X, index: PlaneIndex):
    """Planes sorted by distance from the corpus centroid."""
    cx, cy, cz = np.asarray(X).mean(axis=0).tolist()
    return tuple(sorted(index.rows, key=lambda r: (abs(r[0] * cx + r[1] * cy + r[2] * cz + r[3]), r[4])))


def assign_heuristic(X, index: PlaneIndex, order=None):
    """Visit planes nearest-to-centroid first and stop as soon as the current
    best is provably the nearest plane."""
    if order is None:
        order = heuristic_order(X, index)
    bound = index.exit_bound
    levels, dists = [], []
    for x, y, z in X.tolist():
        best = math.inf
        best_level = -1
        for a, b, c, d, level in order:
            dist = abs(a * x + b * y + c * z + d)
            if dist < best or (dist == best and level < best_level):
                best = dist
                best_level = level
                if best < bound:
                    break
        levels.append(best_level)
        dists.append(best)
    return levels, dists


@dataclass
class ClusterIndex:
    centroids: np.ndarray
    labels: np.ndarray
    k: int
    seed: int


def fit_clusters(X, k=None, seed=0) -> ClusterIndex:
    X = as_points(X)
    k = default_k(len(X)) if k is None else k
    res = kmeans(X, k, seed)
    return ClusterIndex(res.centroids, res.labels, k, seed)


def assign_clustered(clusters: ClusterIndex, index: PlaneIndex):
    """Nearest plane per centroid, broadcast to the members.

    The reported distance is the centroid's, not the member's.
    """
    rows = index.rows
    c_levels, c_dists = [], []
    for x, y, z in clusters.centroids.tolist():
        lv, dv = _nearest_scan(x, y, z, rows)
        c_levels.append(lv)
        c_dists.append(dv)
    c_levels = np.asarray(c_levels)
    c_dists = np.asarray(c_dists)
    return c_levels[clusters.labels].tolist(), c_dists[clusters.labels].tolist()


@dataclass(frozen=True)
class KMeansConfig:
    k: int | None = None
    seed: int = 0


def assign_nearest_plane(points, planes, strategy="brute-force", kmeans_cfg: KMeansConfig | None = None, index=None):
    """Nearest intention plane per point.

    Returns ``(levels, distances)`` as lists aligned with ``points``. Ties
    go to the lower level.
    """
    strategy = canonical_strategy(strategy)
    X = as_points(points)
    if index is None:
        if not planes:
            raise NoPlanes("no intention planes")
        upper = tuple(np.maximum(1.0, X.max(axis=0)).tolist()) if len(X) else (1.0, 1.0, 1.0)
        index = prepare_planes(planes, upper) if strategy == "heuristic" else PlaneIndex(tuple(_plane_rows(planes)), 0.0, upper)
    if len(X) == 0:
        return [], []
    if strategy == "brute-force":
        levels, dists = assign_brute_force(X, index)
    elif strategy == "heuristic":
        levels, dists = assign_heuristic(X, index)
    else:
        if kmeans_cfg is None:
            raise ValueError("clustered strategy needs a KMeansConfig")
        clusters = fit_clusters(X, kmeans_cfg.k, kmeans_cfg.seed)
        levels, dists = assign_clustered(clusters, index)
    return [IntentionLevel(l) for l in levels], dists
