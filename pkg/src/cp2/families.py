"""Nested confidence-set families.

A family binds one feature point (plus whatever context its kind needs:
exogenous draws, a conditional mixture, quantile estimates) and exposes a
nested, right-continuous curve of sets ``t -> set_at(t)``: non-decreasing
in ``t``, empty at the bottom, the whole response space at the top.  The
conformity value of a response is the smallest ``t`` whose set contains
it,

    lam(y) = inf{t : y in set_at(t)},

available in closed form for every kind here, and membership is exactly
``lam(y) <= t`` since the sets are closed.

Kinds
-----
ball-union
    Union of closed balls around exogenous model draws; ``t`` is the
    radius and ``lam`` the distance to the nearest draw.
hpd-superlevel
    Density superlevel sets of an explicit conditional mixture.  The
    internal parameter is the *negated* threshold, ``t = -c``, so that the
    curve grows with ``t``; ``lam(y) = -density(y)``.
fixed-width
    Symmetric interval around a point prediction; ``lam(y) = |y - pred|``.
cqr-additive
    Quantile band widened additively: ``[q_lo - t, q_hi + t]``.
cqr-multiplicative
    Quantile band widened in units of its own width:
    ``[q_lo - t*w, q_hi + t*w]`` with ``w = q_hi - q_lo``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core.mixture import GaussianMixture
from .core.sets import (BallUnionSet, IntervalUnion, interval_union_from_balls,
                        whole_line)
from .errors import (CapabilityError, DegenerateError, DomainError,
                     NumericalError, ValidationError)
from .models.conditional import ConditionalModel
from .models.gmm import gmm_cdf, gmm_density
from .models.quantile import QuantileRegressor

FAMILY_KINDS = ("ball-union", "hpd-superlevel", "fixed-width",
                "cqr-additive", "cqr-multiplicative")

HPD_GRID_POINTS = 4096
HPD_SPREAD = 8.0
HPD_REFINE_TOL = 1e-10

# fallback half-width for the reporting bracket of whole-line sets produced
# by families that carry no natural scale
_REPORT_SPAN = 1e6


def hpd_superlevel_intervals(m: GaussianMixture, threshold: float,
                             grid: tuple = None) -> tuple:
    """Intervals of ``{y : density(y) >= threshold}`` for a scalar mixture.

    Scans ``HPD_GRID_POINTS`` points across the mixture's support bracket
    (means +- HPD_SPREAD sigma_max) for sign changes of
    ``density - threshold`` and refines each crossing by bisection to
    ``HPD_REFINE_TOL``.  Mass outside the bracket is below 1e-15 for the
    default spread, so thresholds that keep the whole bracket above level
    yield the bracket itself.

    Parameters
    ----------
    m : GaussianMixture
        Scalar mixture.
    threshold : float
        Positive density level.
    grid : (ys, ps), optional
        Precomputed scan grid (as built by :class:`HpdFamily`); passing it
        skips the density sweep but changes nothing else.
    """
    if m.dim != 1:
        raise DomainError("superlevel extraction is defined for scalar mixtures")
    if not (math.isfinite(threshold) and threshold > 0.0):
        raise DomainError(f"threshold must be positive, got {threshold!r}")
    if grid is None:
        lo, hi = m.support_bracket(HPD_SPREAD)
        ys = np.linspace(lo, hi, HPD_GRID_POINTS)
        ps = gmm_density(m, ys)
    else:
        ys, ps = grid
    above = ps >= threshold
    if not above.any():
        return ()

    # cells straddling the level: refine the crossing ordinate by bisection
    flips = np.flatnonzero(above[:-1] != above[1:])
    lo_y = ys[flips].astype(float)
    hi_y = ys[flips + 1].astype(float)
    lo_above = above[flips].copy()
    if flips.size:
        for _ in range(64):
            if float(np.max(hi_y - lo_y)) <= HPD_REFINE_TOL:
                break
            mid = 0.5 * (lo_y + hi_y)
            mid_above = gmm_density(m, mid) >= threshold
            same = mid_above == lo_above
            lo_y = np.where(same, mid, lo_y)
            hi_y = np.where(same, hi_y, mid)
    # round each crossing outward (toward the below-level bracket end) so
    # the closed superlevel set is never clipped at its boundary
    cross = np.where(lo_above, hi_y, lo_y)

    edges = []
    if above[0]:
        edges.append(float(ys[0]))
    edges.extend(float(c) for c in cross)
    if above[-1]:
        edges.append(float(ys[-1]))
    # alternating up/down crossings pair into disjoint sorted intervals
    return tuple((edges[i], edges[i + 1]) for i in range(0, len(edges), 2))


@dataclass(frozen=True)
class ConfidenceFamily:
    """Base for per-point families; see module docstring for the contract."""

    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x",
                           np.asarray(self.x, dtype=float).reshape(-1))

    kind = None

    def set_at(self, t: float):
        raise NotImplementedError

    def lam(self, y) -> float:
        raise NotImplementedError

    def lam_batch(self, ys: np.ndarray) -> np.ndarray:
        return np.array([self.lam(y) for y in np.asarray(ys, dtype=float)])

    def mass_analytic(self, t: float, mixture: GaussianMixture) -> float:
        raise CapabilityError(f"{self.kind} family has no analytic mass")

    def support_bracket(self) -> tuple:
        raise NotImplementedError


def _interval_mass(intervals, mixture: GaussianMixture) -> float:
    if not intervals:
        return 0.0
    arr = np.asarray(intervals, dtype=float)
    return float(np.sum(gmm_cdf(mixture, arr[:, 1]) - gmm_cdf(mixture, arr[:, 0])))


@dataclass(frozen=True)
class BallUnionFamily(ConfidenceFamily):
    """Union of closed balls around exogenous draws."""

    centers: np.ndarray = None
    kind = "ball-union"

    def __post_init__(self):
        super().__post_init__()
        c = np.asarray(self.centers, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[0] < 1 or not np.isfinite(c).all():
            raise ValidationError("centers must be a finite (m, p) array")
        object.__setattr__(self, "centers", c)

    @property
    def p(self) -> int:
        return self.centers.shape[1]

    def set_at(self, t: float):
        if self.p == 1:
            return interval_union_from_balls(self.centers[:, 0], t)
        return BallUnionSet(self.centers, float(t))

    def lam(self, y) -> float:
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape[0] != self.p:
            raise DomainError(f"response of length {y.shape[0]}, expected {self.p}")
        return float(np.linalg.norm(self.centers - y[None, :], axis=1).min())

    def lam_batch(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        if ys.ndim == 1:
            ys = ys[:, None]
        d = np.linalg.norm(ys[:, None, :] - self.centers[None, :, :], axis=2)
        return d.min(axis=1)

    def mass_analytic(self, t: float, mixture: GaussianMixture) -> float:
        if self.p != 1:
            raise CapabilityError("analytic ball-union mass needs scalar y")
        if mixture is None:
            raise CapabilityError("analytic mass needs a conditional mixture")
        return _interval_mass(self.set_at(t).intervals if t >= 0 else (),
                              mixture)

    def support_bracket(self) -> tuple:
        span = HPD_SPREAD * max(float(self.centers.std()), 1.0)
        return float(self.centers.min()) - span, float(self.centers.max()) + span


@dataclass(frozen=True)
class HpdFamily(ConfidenceFamily):
    """Density superlevel sets of an explicit conditional mixture.

    Internal parameter is the negated threshold, so ``t >= 0`` already
    covers the whole line.  The scan grid over the support bracket
    (densities and cdf values) is computed once per point; set extraction
    refines crossings by bisection, while mass evaluation under the
    family's own mixture interpolates the cached cdf at the crossings.
    The interpolation error is quadratic in the grid step (well below
    1e-5 mass at the default resolution), which only perturbs where the
    calibration root-find lands, never the sets themselves.
    """

    mixture: GaussianMixture = None
    kind = "hpd-superlevel"

    def __post_init__(self):
        super().__post_init__()
        if self.mixture is None or self.mixture.dim != 1:
            raise ValidationError("hpd family needs a scalar conditional mixture")
        lo, hi = self.mixture.support_bracket(HPD_SPREAD)
        ys = np.linspace(lo, hi, HPD_GRID_POINTS)
        object.__setattr__(self, "_grid", (ys, gmm_density(self.mixture, ys)))
        object.__setattr__(self, "_cdf", gmm_cdf(self.mixture, ys))

    def set_at(self, t: float) -> IntervalUnion:
        t = float(t)
        if t >= 0.0:
            return whole_line(self.support_bracket())
        ivs = hpd_superlevel_intervals(self.mixture, -t, grid=self._grid)
        return IntervalUnion(ivs)

    def lam(self, y) -> float:
        return -float(gmm_density(self.mixture, float(np.asarray(y).reshape(()))))

    def lam_batch(self, ys: np.ndarray) -> np.ndarray:
        return -gmm_density(self.mixture, np.asarray(ys, dtype=float).reshape(-1))

    def mass_analytic(self, t: float, mixture: GaussianMixture = None) -> float:
        if t >= 0.0:
            return 1.0
        if mixture is not None and mixture is not self.mixture:
            ivs = hpd_superlevel_intervals(self.mixture, -t, grid=self._grid)
            return _interval_mass(ivs, mixture)
        ys, ps = self._grid
        fs = self._cdf
        c = -t
        above = ps >= c
        if not above.any():
            return 0.0
        flips = np.flatnonzero(above[:-1] != above[1:])
        # cdf at each crossing, interpolated linearly in the density
        frac = (c - ps[flips]) / (ps[flips + 1] - ps[flips])
        f_cross = fs[flips] + frac * (fs[flips + 1] - fs[flips])
        edges = []
        if above[0]:
            edges.append(float(fs[0]))
        edges.extend(float(f) for f in f_cross)
        if above[-1]:
            edges.append(float(fs[-1]))
        return float(sum(edges[i + 1] - edges[i]
                         for i in range(0, len(edges), 2)))

    def support_bracket(self) -> tuple:
        return self.mixture.support_bracket(HPD_SPREAD)


@dataclass(frozen=True)
class FixedWidthFamily(ConfidenceFamily):
    """Symmetric interval of half-width ``t`` around a point prediction."""

    pred: float = None
    kind = "fixed-width"

    def __post_init__(self):
        super().__post_init__()
        pred = float(self.pred)
        if not math.isfinite(pred):
            raise ValidationError("prediction must be finite")
        object.__setattr__(self, "pred", pred)

    def set_at(self, t: float) -> IntervalUnion:
        t = float(t)
        if t < 0.0:
            return IntervalUnion(())
        return IntervalUnion(((self.pred - t, self.pred + t),))

    def lam(self, y) -> float:
        return abs(float(np.asarray(y).reshape(())) - self.pred)

    def lam_batch(self, ys: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(ys, dtype=float).reshape(-1) - self.pred)

    def mass_analytic(self, t: float, mixture: GaussianMixture) -> float:
        if mixture is None:
            raise CapabilityError("analytic mass needs a conditional mixture")
        if t < 0.0:
            return 0.0
        return float(gmm_cdf(mixture, self.pred + t)
                     - gmm_cdf(mixture, self.pred - t))

    def support_bracket(self) -> tuple:
        return self.pred - _REPORT_SPAN, self.pred + _REPORT_SPAN


class _QuantileBandFamily(ConfidenceFamily):
    """Shared plumbing for the two quantile-band kinds."""

    def _band(self, t: float) -> tuple:
        raise NotImplementedError

    def set_at(self, t: float) -> IntervalUnion:
        a, b = self._band(float(t))
        return IntervalUnion(((a, b),) if a <= b else ())

    def mass_analytic(self, t: float, mixture: GaussianMixture) -> float:
        if mixture is None:
            raise CapabilityError("analytic mass needs a conditional mixture")
        a, b = self._band(float(t))
        if a > b:
            return 0.0
        return float(gmm_cdf(mixture, b) - gmm_cdf(mixture, a))

    def support_bracket(self) -> tuple:
        return self.q_lo - _REPORT_SPAN, self.q_hi + _REPORT_SPAN


@dataclass(frozen=True)
class CqrAdditiveFamily(_QuantileBandFamily):
    """Quantile band widened additively by ``t`` on both sides."""

    q_lo: float = None
    q_hi: float = None
    kind = "cqr-additive"

    def __post_init__(self):
        super().__post_init__()
        if not (math.isfinite(self.q_lo) and math.isfinite(self.q_hi)
                and self.q_lo <= self.q_hi):
            raise ValidationError(f"need finite q_lo <= q_hi, got "
                                  f"({self.q_lo!r}, {self.q_hi!r})")

    def _band(self, t: float) -> tuple:
        return self.q_lo - t, self.q_hi + t

    def lam(self, y) -> float:
        y = float(np.asarray(y).reshape(()))
        return max(self.q_lo - y, y - self.q_hi)

    def lam_batch(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=float).reshape(-1)
        return np.maximum(self.q_lo - ys, ys - self.q_hi)


@dataclass(frozen=True)
class CqrMultiplicativeFamily(_QuantileBandFamily):
    """Quantile band widened by ``t`` band-widths on both sides."""

    q_lo: float = None
    q_hi: float = None
    kind = "cqr-multiplicative"

    def __post_init__(self):
        super().__post_init__()
        if not (math.isfinite(self.q_lo) and math.isfinite(self.q_hi)
                and self.q_lo < self.q_hi):
            raise ValidationError("multiplicative band needs q_lo < q_hi")

    @property
    def width(self) -> float:
        return self.q_hi - self.q_lo

    def _band(self, t: float) -> tuple:
        return self.q_lo - t * self.width, self.q_hi + t * self.width

    def lam(self, y) -> float:
        y = float(np.asarray(y).reshape(()))
        return max(self.q_lo - y, y - self.q_hi) / self.width

    def lam_batch(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=float).reshape(-1)
        return np.maximum(self.q_lo - ys, ys - self.q_hi) / self.width


def family_set(fam: ConfidenceFamily, t: float):
    """The family's set at parameter ``t`` (canonical representation)."""
    return fam.set_at(float(t))


def family_lambda(fam: ConfidenceFamily, y) -> float:
    """Conformity value ``inf{t : y in set_at(t)}``; always finite."""
    val = fam.lam(y)
    if not math.isfinite(val):
        raise NumericalError(f"non-finite conformity value {val!r} "
                             f"from {fam.kind} family")
    return val


def family_mass(fam: ConfidenceFamily, t: float, *,
                mixture: GaussianMixture = None,
                draws: np.ndarray = None) -> float:
    """Model mass of the set at ``t``.

    Analytic when a conditional ``mixture`` is supplied (or the family
    carries one), empirical when ``draws`` from the conditional law are
    supplied instead: the fraction of draws the set contains, evaluated
    through the closed-form conformity values.
    """
    if mixture is not None and draws is not None:
        raise CapabilityError("supply at most one of mixture= or draws=")
    if draws is not None:
        vals = fam.lam_batch(draws)
        return float(np.mean(vals <= float(t)))
    return fam.mass_analytic(float(t), mixture)


# ---------------------------------------------------------------------------
# per-point builders used by the calibration engine

@dataclass(frozen=True)
class BallUnionBuilder:
    """Draws ``m`` exogenous samples per point and wraps them as a family."""

    model: ConditionalModel
    m: int = 50
    family_kind = "ball-union"

    def __post_init__(self):
        if self.m < 1:
            raise DegenerateError("need at least one exogenous draw")

    def build(self, x, point_id, rng: np.random.Generator) -> BallUnionFamily:
        draws = self.model.sample(x, self.m, rng, point_id)
        return BallUnionFamily(x, draws.reshape(self.m, -1))


@dataclass(frozen=True)
class HpdBuilder:
    model: ConditionalModel
    family_kind = "hpd-superlevel"

    def build(self, x, point_id, rng=None) -> HpdFamily:
        return HpdFamily(x, self.model.mixture_at(x, point_id))


@dataclass(frozen=True)
class FixedWidthBuilder:
    """Centers the family on the model's conditional mean."""

    model: ConditionalModel
    family_kind = "fixed-width"

    def build(self, x, point_id, rng=None) -> FixedWidthFamily:
        pred = self.model.mean(x, point_id)
        if pred.shape != (1,):
            raise CapabilityError("fixed-width family needs a scalar response")
        return FixedWidthFamily(x, float(pred[0]))


@dataclass(frozen=True)
class CqrBuilder:
    """Binds a two-level quantile regressor; additive or multiplicative."""

    regressor: QuantileRegressor
    multiplicative: bool = False
    family_kind = "cqr-additive"

    def __post_init__(self):
        if len(self.regressor.levels) != 2:
            raise ValidationError("cqr families need exactly two levels")
        if self.multiplicative:
            object.__setattr__(self, "family_kind", "cqr-multiplicative")

    def build(self, x, point_id, rng=None):
        q_lo, q_hi = self.regressor.predict(x)
        if self.multiplicative:
            return CqrMultiplicativeFamily(x, q_lo=q_lo, q_hi=q_hi)
        return CqrAdditiveFamily(x, q_lo=q_lo, q_hi=q_hi)
