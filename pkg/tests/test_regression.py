import warnings

import numpy as np
import pytest

from metatrust.errors import DegenerateLabels
from metatrust.regression import LogisticModel, SoftmaxModel, fit_logistic, fit_softmax


def separable(seed=0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.uniform(0, 0.4, (20, 3)), rng.uniform(0.6, 1, (20, 3))])
    return X, np.array([0] * 20 + [1] * 20)


def test_softmax_separable_two_levels():
    X, y = separable()
    m = fit_softmax(X, y, seed=0, l2=1e-6)
    assert m.train_accuracy == 1.0
    assert m.classes == (0, 1)
    assert np.allclose(m.predict_proba(X).sum(axis=1), 1.0)


def test_softmax_three_levels_and_determinism():
    rng = np.random.default_rng(1)
    centers = np.array([[0.1, 0.1, 0.1], [0.5, 0.5, 0.5], [0.9, 0.9, 0.9]])
    y = np.repeat([0, 2, 3], 30)
    X = centers[np.repeat([0, 1, 2], 30)] + rng.normal(scale=0.03, size=(90, 3))
    a, b = fit_softmax(X, y, seed=3), fit_softmax(X, y, seed=3)
    assert np.array_equal(a.coef, b.coef) and np.array_equal(a.intercept, b.intercept)
    assert a.classes == (0, 2, 3)
    assert set(a.predict(X).tolist()) <= {0, 2, 3}
    assert a.train_accuracy == 1.0
    back = SoftmaxModel.from_dict(a.to_dict())
    assert np.array_equal(back.predict(X), a.predict(X))


def test_softmax_degenerate():
    with pytest.raises(DegenerateLabels):
        fit_softmax(np.zeros((5, 3)), np.zeros(5))
    X, y = separable()
    with pytest.raises(DegenerateLabels):
        fit_softmax(X[:23], y[:23], min_per_class=4)


def test_softmax_gradient_matches_finite_differences():
    # the fitted optimum has (near) zero regularised gradient
    X, y = separable(2)
    y = y.copy()
    y[:3] = 1  # make it non-separable so the optimum is interior
    m = fit_softmax(X, y, seed=0, l2=1e-2)
    W, b = m.coef, m.intercept
    Y = np.eye(2)[y]

    def loss(W, b):
        Z = X @ W.T + b
        Z = Z - Z.max(axis=1, keepdims=True)
        logp = Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
        return -np.sum(Y * logp) / len(X) + 0.5 * 1e-2 * np.sum(W * W)

    eps = 1e-6
    for idx in np.ndindex(W.shape):
        Wp, Wm = W.copy(), W.copy()
        Wp[idx] += eps
        Wm[idx] -= eps
        assert abs((loss(Wp, b) - loss(Wm, b)) / (2 * eps)) < 1e-4


def test_logistic_bounds_and_conflicts():
    X, y = separable()
    m = fit_logistic(X, y, bounds=[(0, None), (None, 0), (None, None)])
    assert m.coef[0] >= 0 and m.coef[1] <= 0
    Xc = np.ones((10, 2))
    yc = np.array([0, 1] * 5)
    c = fit_logistic(Xc, yc)
    assert c.predict_proba(Xc) == pytest.approx(np.full(10, 0.5), abs=1e-4)
    assert c.train_accuracy == 0.5
    with pytest.raises(DegenerateLabels):
        fit_logistic(Xc, np.ones(10))
    back = LogisticModel.from_dict(m.to_dict())
    assert np.array_equal(back.coef, m.coef) and back.intercept == m.intercept
