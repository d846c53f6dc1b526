"""Evaluation metrics for calibrated methods.

Three numbers summarize a method on a test set: marginal coverage, the
worst coverage over high-mass feature slabs (a proxy for conditional
validity), and the mean set size in units of the response spread.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conformal import CalibratedMethod, predict_set
from .core.samples import Dataset
from .core.sets import IntervalUnion
from .errors import CapabilityError, DegenerateError, DomainError
from .rng import substream


def marginal_coverage(covered) -> float:
    covered = np.asarray(covered, dtype=bool)
    if covered.size == 0:
        raise DegenerateError("no evaluation points")
    return float(covered.mean())


def _direction_min(flags: np.ndarray, m0: int) -> float:
    # minimum mean over every contiguous window of length >= m0
    n = flags.size
    prefix = np.concatenate([[0.0], np.cumsum(flags)])
    best = 1.0
    for length in range(m0, n + 1):
        means = (prefix[length:] - prefix[:-length]) / length
        m = float(means.min())
        if m < best:
            best = m
    return best


def worst_slab_coverage(xs: np.ndarray, covered, delta: float,
                        n_directions: int = 1000, seed: int = 0) -> float:
    """Worst coverage over feature slabs holding mass at least ``1 - delta``.

    A slab is ``{x : a < v.x < b}``; the search scans, for sampled unit
    directions ``v`` plus the canonical axes, every contiguous window of
    at least ``ceil((1-delta) n)`` points in projection order.  The full
    window is always a candidate, so the result never exceeds the
    marginal coverage.  In one dimension the two directions give the same
    window family, so a single axis scan is exact.
    """
    xs = np.asarray(xs, dtype=float)
    xs = xs[:, None] if xs.ndim == 1 else np.atleast_2d(xs)
    covered = np.asarray(covered, dtype=float)
    n, d = xs.shape
    if covered.shape != (n,):
        raise DomainError("one coverage flag per row required")
    if not 0.0 < 1.0 - delta <= 1.0:
        raise DomainError(f"need slab mass 1-delta in (0, 1], got delta={delta!r}")
    m0 = math.ceil((1.0 - delta) * n)
    if n < 2 or m0 < 1:
        raise DegenerateError(f"too few points (n={n}) for the window "
                              f"fraction {1.0 - delta!r}")
    if m0 > n:
        raise DegenerateError("window larger than the sample")

    if d == 1:
        directions = np.ones((1, 1))
    else:
        rng = substream(seed, "wsc")
        raw = rng.standard_normal((n_directions, d))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        directions = np.vstack([np.eye(d), raw])

    best = 1.0
    for v in directions:
        order = np.argsort(xs @ v, kind="stable")
        best = min(best, _direction_min(covered[order], m0))
    return best


def scaled_size(measures, y_std: float) -> float:
    """Mean set measure over the response standard deviation.

    Infinite (whole-line) members make the result ``inf``.
    """
    measures = np.asarray(measures, dtype=float)
    if measures.size == 0:
        raise DegenerateError("no evaluation points")
    if not y_std > 0.0:
        raise DomainError(f"y_std must be positive, got {y_std!r}")
    if np.isinf(measures).any():
        return math.inf
    return float(measures.mean() / y_std)


@dataclass(frozen=True)
class EvaluationReport:
    """Per-method evaluation on one test set."""

    method: str
    alpha: float
    covered: np.ndarray
    measures: np.ndarray
    marginal: float
    wsc: dict
    mean_scaled_size: float
    n_unbounded: int

    def __post_init__(self):
        for delta, value in self.wsc.items():
            if value > self.marginal + 1e-12:
                raise DomainError(f"slab coverage {value!r} above marginal "
                                  f"{self.marginal!r} at delta={delta!r}")

    def to_jsonable(self) -> dict:
        return {
            "method": self.method,
            "alpha": self.alpha,
            "n_test": int(self.covered.size),
            "marginal_coverage": self.marginal,
            "wsc": {repr(k): v for k, v in sorted(self.wsc.items())},
            "mean_scaled_size": self.mean_scaled_size,
            "n_unbounded": self.n_unbounded,
        }


def evaluate(cm: CalibratedMethod, test: Dataset, deltas=(0.9,),
             n_directions: int = 1000, wsc_seed: int = None) -> EvaluationReport:
    """Predict on every test row and collect the three metrics.

    Test rows are keyed by their ids, so two methods sharing a master
    seed are compared on identical exogenous draws.
    """
    if test.p != 1:
        raise CapabilityError("evaluation tracks interval measures; "
                              "response must be scalar")
    n = len(test)
    covered = np.empty(n, dtype=bool)
    measures = np.empty(n, dtype=float)
    for i in range(n):
        ps = predict_set(cm, test.x[i], point_id=int(test.ids[i]))
        if not isinstance(ps, IntervalUnion):
            raise CapabilityError("evaluation needs interval-valued sets")
        covered[i] = ps.contains(test.y[i, 0])
        measures[i] = ps.measure
    y_std = float(test.y_flat.std())
    wsc_seed = cm.seed if wsc_seed is None else wsc_seed
    wsc = {float(delta): worst_slab_coverage(test.x, covered, delta,
                                             n_directions, wsc_seed)
           for delta in deltas}
    return EvaluationReport(
        method=cm.method.name,
        alpha=cm.alpha,
        covered=covered,
        measures=measures,
        marginal=marginal_coverage(covered),
        wsc=wsc,
        mean_scaled_size=scaled_size(measures, y_std),
        n_unbounded=int(np.isinf(measures).sum()),
    )
