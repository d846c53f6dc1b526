"""Prediction set representations.

Scalar-response methods canonicalize their output to an
:class:`IntervalUnion`; vector responses keep the :class:`BallUnionSet`
form, whose Lebesgue measure is not tracked.  Both are immutable and
support deterministic membership tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, ValidationError


def merge_intervals(intervals) -> tuple:
    """Canonicalize closed intervals: drop empties, sort, merge overlaps.

    Touching intervals ([0,1], [1,2]) merge, since the sets are closed.
    """
    items = []
    for a, b in intervals:
        a, b = float(a), float(b)
        if math.isnan(a) or math.isnan(b):
            raise ValidationError("interval endpoints must not be NaN")
        if a <= b:
            items.append((a, b))
    items.sort()
    merged = []
    for a, b in items:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of disjoint closed intervals on the line.

    ``unbounded=True`` marks the whole-line set produced when the
    calibrated quantile is infinite; ``intervals`` then holds the support
    bracket used for reporting, membership is always true and the measure
    is ``inf``.
    """

    intervals: tuple
    unbounded: bool = False

    def __post_init__(self):
        object.__setattr__(self, "intervals", merge_intervals(self.intervals))
        if self.unbounded and not self.intervals:
            raise ValidationError("unbounded sets carry a support bracket")

    def contains(self, y) -> bool:
        if self.unbounded:
            return True
        y = float(np.asarray(y).reshape(()))
        return any(a <= y <= b for a, b in self.intervals)

    @property
    def measure(self) -> float:
        if self.unbounded:
            return math.inf
        return float(sum(b - a for a, b in self.intervals))

    @property
    def count(self) -> int:
        """Number of disjoint intervals (0 for the empty set)."""
        return len(self.intervals)

    def to_jsonable(self) -> dict:
        return {"kind": "intervals",
                "intervals": [[a, b] for a, b in self.intervals],
                "unbounded": self.unbounded}


@dataclass(frozen=True)
class BallUnionSet:
    """Union of closed Euclidean balls with a common radius (vector y)."""

    centers: np.ndarray
    radius: float

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if not np.isfinite(c).all():
            raise ValidationError("ball centers must be finite")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, y) -> bool:
        if self.radius < 0.0:
            return False
        y = np.asarray(y, dtype=float).reshape(-1)
        d = np.linalg.norm(self.centers - y[None, :], axis=1)
        return bool(d.min() <= self.radius)

    def to_jsonable(self) -> dict:
        return {"kind": "balls",
                "centers": self.centers.tolist(),
                "radius": self.radius}


def interval_union_from_balls(centers, radius: float) -> IntervalUnion:
    """Union of scalar balls [c - r, c + r], canonicalized.

    Negative radius gives the empty set.
    """
    c = np.asarray(centers, dtype=float).reshape(-1)
    if c.size == 0:
        raise DomainError("need at least one center")
    radius = float(radius)
    if not math.isfinite(radius):
        raise DomainError(f"radius must be finite, got {radius!r}")
    if radius < 0.0:
        return IntervalUnion(())
    return IntervalUnion(tuple((x - radius, x + radius) for x in c))


def whole_line(bracket: tuple) -> IntervalUnion:
    """The flagged whole-line set, carrying ``bracket`` for reporting."""
    return IntervalUnion((bracket,), unbounded=True)
