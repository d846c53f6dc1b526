"""Conditional quantile estimators for interval families.

Two deliberately small regressors: a k-nearest-neighbour estimator and a
linear model fit by full-batch subgradient descent on the pinball loss.
Both predict all requested levels at once and repair quantile crossing by
rearrangement (sorting the levels at each point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.samples import Dataset
from ..errors import DegenerateError, DomainError, ValidationError

METHODS = ("knn", "linear-pinball")


@dataclass(frozen=True)
class QuantileRegressor:
    """Fitted conditional quantile estimator.

    ``levels`` are sorted ascending; :meth:`predict` returns one value per
    level, non-crossing by construction.
    """

    method: str
    levels: tuple
    _state: dict

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float).reshape(-1)
        if self.method == "knn":
            s = self._state
            d2 = ((s["x"] - x[None, :]) ** 2).sum(axis=1)
            idx = np.argpartition(d2, s["k"] - 1)[: s["k"]]
            q = np.quantile(s["y"][idx], self.levels)
        else:
            s = self._state
            xn = (x - s["x_mean"]) / s["x_scale"]
            z = s["weights"][:, 0] + s["weights"][:, 1:] @ xn
            q = s["y_mean"] + s["y_scale"] * z
        return np.sort(q)  # rearrangement: levels may not cross

    def predict_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        return np.stack([self.predict(x) for x in xs])


def _fit_knn(x: np.ndarray, y: np.ndarray, levels, k: int) -> dict:
    if k is None:
        k = math.ceil(math.sqrt(x.shape[0]))
    if not 1 <= k <= x.shape[0]:
        raise DomainError(f"k={k} out of range for n={x.shape[0]}")
    return {"x": x, "y": y, "k": int(k)}


def _fit_linear_pinball(x: np.ndarray, y: np.ndarray, levels,
                        epochs: int, step0: float) -> dict:
    # standardize internally so the fixed step schedule is scale-robust
    x_mean = x.mean(axis=0)
    x_scale = np.where(x.std(axis=0) > 0, x.std(axis=0), 1.0)
    y_mean = float(y.mean())
    y_scale = float(y.std()) or 1.0
    xn = (x - x_mean) / x_scale
    yn = (y - y_mean) / y_scale
    design = np.hstack([np.ones((xn.shape[0], 1)), xn])

    weights = np.zeros((len(levels), design.shape[1]))
    tail = epochs // 2  # average the late iterates; raw ones oscillate
    for j, q in enumerate(levels):
        w = np.zeros(design.shape[1])
        acc = np.zeros_like(w)
        for epoch in range(1, epochs + 1):
            r = yn - design @ w
            g = ((r <= 0).astype(float) - q) @ design / design.shape[0]
            w -= (step0 / math.sqrt(epoch)) * g
            if epoch > tail:
                acc += w
        weights[j] = acc / (epochs - tail)
    return {"weights": weights, "x_mean": x_mean, "x_scale": x_scale,
            "y_mean": y_mean, "y_scale": y_scale}


def fit_quantile_regressor(ds: Dataset, levels, method: str = "knn", *,
                           k: int = None, epochs: int = 2000,
                           step0: float = 0.5) -> QuantileRegressor:
    """Fit a quantile regressor on a scalar-response dataset.

    Parameters
    ----------
    ds : Dataset
        Training data; response must be scalar.
    levels : sequence of float
        Quantile levels in (0, 1); stored sorted.
    method : {"knn", "linear-pinball"}
    k : int, optional
        Neighbour count for knn; default ceil(sqrt(n)).
    epochs, step0 : int, float
        Subgradient schedule for linear-pinball: ``step0 / sqrt(epoch)``,
        with the weights averaged over the last half of the epochs.
    """
    if method not in METHODS:
        raise DomainError(f"unknown quantile method {method!r}; "
                          f"expected one of {', '.join(METHODS)}")
    if len(ds) < 2:
        raise DegenerateError("need at least 2 training points")
    levels = tuple(sorted(float(q) for q in levels))
    if not levels or any(not 0.0 < q < 1.0 for q in levels):
        raise ValidationError(f"levels must lie in (0, 1), got {levels!r}")
    x, y = ds.x, ds.y_flat
    if method == "knn":
        state = _fit_knn(x, y, levels, k)
    else:
        state = _fit_linear_pinball(x, y, levels, epochs, step0)
    return QuantileRegressor(method, levels, state)
