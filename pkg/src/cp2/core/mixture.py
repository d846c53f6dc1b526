"""Diagonal Gaussian mixtures as plain data.

The numeric operations on mixtures (density, cdf, sampling, fitting,
conditioning) live in :mod:`cp2.models.gmm`; this type only validates and
carries the parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

# lower bound applied to every component variance; avoids singular densities
VARIANCE_FLOOR = 1e-8


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture of axis-aligned Gaussians.

    Attributes
    ----------
    weights : ndarray, shape (k,)
        Non-negative, summing to 1 within 1e-10.
    means : ndarray, shape (k, dim)
    variances : ndarray, shape (k, dim)
        Per-coordinate variances; floored at ``VARIANCE_FLOOR``.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        mu = np.atleast_2d(np.asarray(self.means, dtype=float))
        var = np.atleast_2d(np.asarray(self.variances, dtype=float))
        if mu.shape != var.shape or mu.shape[0] != w.shape[0]:
            raise ValidationError(
                f"inconsistent shapes: weights {w.shape}, means {mu.shape}, "
                f"variances {var.shape}")
        if w.shape[0] == 0:
            raise ValidationError("mixture needs at least one component")
        if not (np.isfinite(w).all() and np.isfinite(mu).all()
                and np.isfinite(var).all()):
            raise ValidationError("mixture parameters must be finite")
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-10:
            raise ValidationError("weights must be non-negative and sum to 1")
        if (var < 0).any():
            raise ValidationError("variances must be non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", np.maximum(var, VARIANCE_FLOOR))

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def support_bracket(self, spread: float = 8.0) -> tuple[float, float]:
        """Interval holding all but ~erfc(spread/sqrt 2) of the mass (dim 1)."""
        if self.dim != 1:
            raise ValidationError("support bracket is defined for scalar mixtures")
        s = spread * float(np.sqrt(self.variances.max()))
        return float(self.means.min()) - s, float(self.means.max()) + s
