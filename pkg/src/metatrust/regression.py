"""L2-regularised multinomial logistic regression fitted with L-BFGS-B.

Small and deterministic; used for the intention function and for the
fakeness translator. Box bounds on individual coefficients let callers
impose sign constraints.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import expit, log_softmax, softmax

from .errors import DegenerateLabels

log = logging.getLogger(__name__)


class NonConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SoftmaxModel:
    """``coef`` is (K, D), ``intercept`` is (K,), ``classes`` the label per row."""

    coef: np.ndarray
    intercept: np.ndarray
    classes: tuple[int, ...]
    train_accuracy: float = float("nan")
    converged: bool = True

    def logits(self, X):
        return np.asarray(X, dtype=float) @ self.coef.T + self.intercept

    def predict_proba(self, X):
        return softmax(self.logits(X), axis=1)

    def predict(self, X):
        idx = np.argmax(self.logits(X), axis=1)
        return np.asarray(self.classes)[idx]

    def to_dict(self):
        return {
            "classes": list(self.classes),
            "coef": self.coef.tolist(),
            "intercept": self.intercept.tolist(),
            "train_accuracy": self.train_accuracy,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            np.asarray(d["coef"], dtype=float),
            np.asarray(d["intercept"], dtype=float),
            tuple(d["classes"]),
            d.get("train_accuracy", float("nan")),
            d.get("converged", True),
        )


def fit_softmax(X, y, seed=0, l2=1e-3, max_iter=1000, min_per_class=1) -> SoftmaxModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise DegenerateLabels(f"need at least two classes, got {classes}")
    counts = {c: int(np.sum(y == c)) for c in classes}
    thin = {c: n for c, n in counts.items() if n < min_per_class}
    if thin:
        raise DegenerateLabels(f"classes below {min_per_class} samples: {thin}")
    n, d = X.shape
    K = len(classes)
    Y = (y[:, None] == np.asarray(classes)[None, :]).astype(float)

    def loss(w):
        W = w[: K * d].reshape(K, d)
        b = w[K * d :]
        Z = X @ W.T + b
        logp = log_softmax(Z, axis=1)
        P = np.exp(logp)
        val = -np.sum(Y * logp) / n + 0.5 * l2 * np.sum(W * W)
        G = (P - Y) / n
        gW = G.T @ X + l2 * W
        gb = G.sum(axis=0)
        return val, np.concatenate([gW.ravel(), gb])

    rng = np.random.default_rng(seed)
    w0 = rng.normal(scale=1e-3, size=K * d + K)
    res = minimize(loss, w0, jac=True, method="L-BFGS-B", options={"maxiter": max_iter, "gtol": 1e-9})
    if not res.success:
        warnings.warn(f"softmax regression did not converge: {res.message}", NonConvergenceWarning, stacklevel=2)
    W = res.x[: K * d].reshape(K, d)
    b = res.x[K * d :]
    model = SoftmaxModel(W, b, classes, converged=bool(res.success))
    acc = float(np.mean(model.predict(X) == y))
    return SoftmaxModel(W, b, classes, acc, bool(res.success))


@dataclass(frozen=True)
class LogisticModel:
    coef: np.ndarray
    intercept: float
    train_accuracy: float = float("nan")
    converged: bool = True

    def logit(self, X):
        return np.asarray(X, dtype=float) @ self.coef + self.intercept

    def predict_proba(self, X):
        return expit(self.logit(X))

    def to_dict(self):
        return {
            "coef": self.coef.tolist(),
            "intercept": self.intercept,
            "train_accuracy": self.train_accuracy,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(np.asarray(d["coef"], dtype=float), float(d["intercept"]), d.get("train_accuracy", float("nan")), d.get("converged", True))


def fit_logistic(X, y, seed=0, l2=1e-3, bounds=None, sample_weight=None, max_iter=1000) -> LogisticModel:
    """Binary logistic regression on targets in [0, 1].

    ``bounds`` is an optional per-coefficient list of (lo, hi) pairs; the
    intercept is always free.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    hard = y >= 0.5
    if hard.all() or (~hard).all():
        raise DegenerateLabels("both classes must be present")
    n, d = X.shape
    sw = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    total = sw.sum()

    def loss(w):
        coef, b = w[:d], w[d]
        z = X @ coef + b
        # log(1 + e^z) - y z, computed stably
        val = np.sum(sw * (np.logaddexp(0.0, z) - y * z)) / total + 0.5 * l2 * coef @ coef
        g = sw * (expit(z) - y) / total
        return val, np.concatenate([X.T @ g + l2 * coef, [g.sum()]])

    rng = np.random.default_rng(seed)
    w0 = rng.normal(scale=1e-3, size=d + 1)
    box = None
    if bounds is not None:
        box = list(bounds) + [(None, None)]
        w0[:d] = np.clip(w0[:d], [lo if lo is not None else -np.inf for lo, _ in bounds], [hi if hi is not None else np.inf for _, hi in bounds])
    res = minimize(loss, w0, jac=True, method="L-BFGS-B", bounds=box, options={"maxiter": max_iter, "gtol": 1e-10})
    if not res.success:
        warnings.warn(f"logistic regression did not converge: {res.message}", NonConvergenceWarning, stacklevel=2)
    model = LogisticModel(res.x[:d].copy(), float(res.x[d]), converged=bool(res.success))
    acc = float(np.mean((model.predict_proba(X) >= 0.5) == hard))
    return LogisticModel(model.coef, model.intercept, acc, bool(res.success))
