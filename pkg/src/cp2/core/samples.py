"""Labeled data containers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True)
class LabeledSample:
    """One (x, y) pair; x has shape (d,), y has shape (p,)."""

    x: np.ndarray
    y: np.ndarray


@dataclass(frozen=True)
class SplitSpec:
    """Fractions for the train / calibration / test partition.

    Fractions must be positive and sum to 1 within 1e-9.  Sizes are
    apportioned by largest remainder on floor(fraction * n), so e.g.
    (0.5, 0.3, 0.2) on n=10 gives parts of 5, 3 and 2 exactly.
    """

    train: float
    calib: float
    test: float

    def __post_init__(self):
        parts = (self.train, self.calib, self.test)
        if any(not np.isfinite(f) or f <= 0.0 for f in parts):
            raise ValidationError("split fractions must be positive and finite")
        if abs(sum(parts) - 1.0) > 1e-9:
            raise ValidationError(f"split fractions sum to {sum(parts)!r}, expected 1")

    def sizes(self, n: int) -> tuple[int, int, int]:
        fracs = np.array([self.train, self.calib, self.test])
        base = np.floor(fracs * n).astype(int)
        rem = fracs * n - base
        # hand leftover slots to the largest remainders, earlier part on ties
        for i in np.argsort(-rem, kind="stable")[: n - int(base.sum())]:
            base[i] += 1
        return int(base[0]), int(base[1]), int(base[2])


@dataclass(frozen=True)
class Dataset:
    """A homogeneous batch of labeled samples.

    Attributes
    ----------
    x : ndarray, shape (n, d)
    y : ndarray, shape (n, p)
    ids : ndarray of int64, shape (n,)
        Stable row identities.  Fresh datasets get 0..n-1; splits and
        permutations carry the original ids along, which keys the
        per-point draw streams and aligns ingested per-row models.
    feature_transform : tuple of (means, scales) or None
        Recorded when the loader standardized the features.
    """

    x: np.ndarray
    y: np.ndarray
    ids: np.ndarray = None
    feature_transform: tuple = None

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        y = np.asarray(self.y, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if x.shape[0] != y.shape[0]:
            raise ValidationError(f"x has {x.shape[0]} rows, y has {y.shape[0]}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise ValidationError("samples must be finite")
        ids = self.ids
        if ids is None:
            ids = np.arange(x.shape[0], dtype=np.int64)
        else:
            ids = np.asarray(ids, dtype=np.int64)
            if ids.shape != (x.shape[0],):
                raise ValidationError("ids must have one entry per row")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def p(self) -> int:
        return self.y.shape[1]

    @property
    def y_flat(self) -> np.ndarray:
        """The responses as shape (n,); only defined for scalar y."""
        if self.p != 1:
            raise ValidationError(f"y is {self.p}-dimensional, not scalar")
        return self.y[:, 0]

    def __getitem__(self, k: int) -> LabeledSample:
        return LabeledSample(self.x[k], self.y[k])

    @property
    def samples(self) -> list[LabeledSample]:
        return [self[k] for k in range(len(self))]

    def take(self, index: np.ndarray) -> "Dataset":
        """Row subset preserving ids and any recorded transform."""
        index = np.asarray(index)
        return Dataset(self.x[index], self.y[index], self.ids[index],
                       self.feature_transform)
