"""Reference implementations written independently of the package code."""

import itertools
import math

import numpy as np

R = 6371.0


def unit_vector(lat, lon):
    phi, lam = math.radians(lat), math.radians(lon)
    return np.array([math.cos(phi) * math.cos(lam), math.cos(phi) * math.sin(lam), math.sin(phi)])


def great_circle_km(p, q):
    """Central angle from atan2(|u x v|, u . v) on 3-D unit vectors."""
    u, v = unit_vector(*p), unit_vector(*q)
    return R * math.atan2(np.linalg.norm(np.cross(u, v)), float(u @ v))


def manhattan(a, b):
    return sum(abs(x - y) for x, y in zip(a, b))


def plane_distance(p, coef):
    a, b, c, d = coef
    x, y, z = p
    return abs(a * x + b * y + c * z + d) / math.sqrt(a * a + b * b + c * c)


def exhaustive_nearest(points, planes):
    """Per point: (level, distance) of the nearest plane, lowest level on ties."""
    out = []
    for p in points:
        cands = sorted((plane_distance(p, (pl.a, pl.b, pl.c, pl.d)), int(pl.level)) for pl in planes)
        best = cands[0][0]
        level = min(lv for dist, lv in cands if dist == best)
        out.append((level, best))
    return out


def grid_normal_search(points, steps=400):
    """Unit normal minimising the spread of n.x over a fine grid of directions."""
    X = np.asarray(points, dtype=float)
    Xc = X - X.mean(axis=0)
    best, best_n = math.inf, None
    for i in range(steps + 1):
        theta = math.pi * i / steps
        for j in range(2 * steps):
            phi = math.pi * j / steps
            n = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
            spread = float(np.sum((Xc @ n) ** 2))
            if spread < best:
                best, best_n = spread, n
    return best_n


def best_rank_r_error(M, r):
    """Frobenius error of the best rank-r approximation: tail singular values."""
    s = np.linalg.svd(M, compute_uv=False)
    return math.sqrt(float(np.sum(s[r:] ** 2)))


def lloyd_assign(X, C):
    """Nearest centroid per point by explicit loops."""
    out = []
    for x in X:
        d = [sum((xi - ci) ** 2 for xi, ci in zip(x, c)) for c in C]
        out.append(int(np.argmin(d)))
    return out


def hand_tfidf(token, doc_tokens, corpus):
    n = len(corpus)
    df = sum(1 for d in corpus if token in d)
    return doc_tokens.count(token) * (math.log((1 + n) / (1 + df)) + 1)


def all_subsets(items):
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)
