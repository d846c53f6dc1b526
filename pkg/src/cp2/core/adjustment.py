"""Adjustment functions.

An adjustment is a family of monotone maps ``f_tau`` linking the raw
conformity value of a point to the calibrated score actually ranked by the
conformal step.  Two monotonicity clauses make the construction work:

* for a fixed admissible ``tau``, ``lam -> f_tau(lam)`` is strictly
  increasing on its domain, so set membership transfers through ``f``;
* ``tau -> f_tau(phi)`` (the *anchor map*, with ``phi`` a fixed anchor
  point) is strictly increasing and bijective onto its range, so the
  mass-calibration step can be inverted.

Two degenerate kinds sit at the poles and each waives one clause:
``trivial`` (``f_tau(lam) = lam``) ignores the model entirely and has a
constant anchor map, while ``constant`` (``f_tau(lam) = tau``) ignores the
conformity value and has no inverse in ``lam``.

Kinds
-----
=========  ==================  ====================  ===========
kind       f_tau(lam)          inverse in lam        default phi
=========  ==================  ====================  ===========
trivial    lam                 v                     (unused)
linear     tau * lam           v / tau               1.0
additive   lam + tau           v - tau               0.0
exp        exp(tau * lam)      log(v) / tau          1.0
tan        tan(tau * lam)      arctan(v) / tau       1.0
sigmoid    1/(1+exp(-lam tau)) log(v/(1-v)) / tau    1.0
constant   tau                 (none)                (unused)
=========  ==================  ====================  ===========

The ``tan`` kind is named after the formulas it computes; its lam domain is
the principal branch ``|tau * lam| < pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import BracketError, DomainError

KINDS = ("trivial", "linear", "additive", "exp", "tan", "sigmoid", "constant")

# kinds whose anchor phi enters the formulas multiplicatively and must be > 0
_PHI_POSITIVE = frozenset({"linear", "exp", "tan", "sigmoid"})
_PHI_UNUSED = frozenset({"trivial", "constant"})

DEFAULT_PHI = {
    "trivial": 0.0,
    "linear": 1.0,
    "additive": 0.0,
    "exp": 1.0,
    "tan": 1.0,
    "sigmoid": 1.0,
    "constant": 0.0,
}


@dataclass(frozen=True)
class AdjustmentFunction:
    """A named adjustment kind with its anchor point ``phi``."""

    kind: str
    phi: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown adjustment kind {self.kind!r}; "
                              f"expected one of {', '.join(KINDS)}")
        phi = DEFAULT_PHI[self.kind] if self.phi is None else float(self.phi)
        if not math.isfinite(phi):
            raise DomainError("phi must be finite")
        if self.kind in _PHI_POSITIVE and phi <= 0.0:
            raise DomainError(f"{self.kind} adjustment needs phi > 0, got {phi!r}")
        object.__setattr__(self, "phi", phi)


def _require_tau_positive(f: AdjustmentFunction, tau: float):
    if not (tau > 0.0):
        raise DomainError(f"{f.kind} adjustment needs tau > 0, got {tau!r}")


def adjustment_apply(f: AdjustmentFunction, tau: float, lam: float) -> float:
    """Evaluate ``f_tau(lam)``.

    Raises :class:`DomainError` when ``tau`` or ``lam`` falls outside the
    kind's domain (a misconfigured method, not a data problem).
    """
    tau = float(tau)
    lam = float(lam)
    if not (math.isfinite(tau) and math.isfinite(lam)):
        raise DomainError("tau and lam must be finite")
    if f.kind == "trivial":
        return lam
    if f.kind == "constant":
        return tau
    if f.kind == "additive":
        return lam + tau
    _require_tau_positive(f, tau)
    if f.kind == "linear":
        return tau * lam
    if f.kind == "exp":
        try:
            return math.exp(tau * lam)
        except OverflowError:
            return math.inf  # monotone limit
    if f.kind == "sigmoid":
        # expit computed stably on both tails
        z = lam * tau
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)
    # tan: principal branch only
    z = tau * lam
    if not abs(z) < math.pi / 2:
        raise DomainError(f"tan adjustment needs |tau*lam| < pi/2, got {z!r}")
    return math.tan(z)


def adjustment_invert(f: AdjustmentFunction, tau: float, v: float) -> float:
    """Return the ``lam`` with ``f_tau(lam) = v``.

    Exact inverse of :func:`adjustment_apply` on each kind's range; the
    ``constant`` kind has no functional inverse and raises.
    """
    tau = float(tau)
    v = float(v)
    if not (math.isfinite(tau) and math.isfinite(v)):
        raise DomainError("tau and v must be finite")
    if f.kind == "trivial":
        return v
    if f.kind == "constant":
        raise DomainError("constant adjustment has no inverse in lam")
    if f.kind == "additive":
        return v - tau
    _require_tau_positive(f, tau)
    if f.kind == "linear":
        return v / tau
    if f.kind == "exp":
        if not v > 0.0:
            raise DomainError(f"exp adjustment only takes positive values, got {v!r}")
        return math.log(v) / tau
    if f.kind == "sigmoid":
        if not 0.0 < v < 1.0:
            raise DomainError(f"sigmoid adjustment only takes values in (0,1), got {v!r}")
        return math.log(v / (1.0 - v)) / tau
    return math.atan(v) / tau


def tau_domain(f: AdjustmentFunction) -> tuple[float, float]:
    """Open interval of ``tau`` values the anchor map sweeps through."""
    if f.kind == "trivial":
        raise DomainError("trivial adjustment has a constant anchor map")
    if f.kind == "tan":
        half = math.pi / 2 / f.phi
        return -half, half
    return -math.inf, math.inf


def anchor_value(f: AdjustmentFunction, tau: float) -> float:
    """Evaluate the anchor map ``tau -> f_tau(phi)``.

    Unlike :func:`adjustment_apply`, negative ``tau`` is admitted: the
    anchor map is increasing over all of :func:`tau_domain`, which the
    calibration root-find sweeps even though only the crossing point must
    land where ``f_tau`` itself is monotone in ``lam``.
    """
    tau = float(tau)
    if not math.isfinite(tau):
        raise DomainError("tau must be finite")
    if f.kind == "trivial":
        raise DomainError("trivial adjustment has a constant anchor map")
    if f.kind == "constant":
        return tau
    if f.kind == "additive":
        return f.phi + tau
    if f.kind == "linear":
        return tau * f.phi
    if f.kind == "exp":
        try:
            return math.exp(tau * f.phi)
        except OverflowError:
            return math.inf
    if f.kind == "sigmoid":
        z = tau * f.phi
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)
    lo, hi = tau_domain(f)
    if not lo < tau < hi:
        raise DomainError(f"tan anchor needs tau in ({lo!r}, {hi!r}), got {tau!r}")
    return math.tan(tau * f.phi)


def anchor_inverse(f: AdjustmentFunction, v: float) -> float:
    """Return the ``tau`` with ``f_tau(phi) = v``.

    Raises :class:`BracketError` when ``v`` lies outside the open range of
    the anchor map: no ``tau`` attains the requested value, i.e. the
    feasible set of the calibration step is empty or unbounded below.
    """
    v = float(v)
    if f.kind == "trivial":
        raise DomainError("trivial adjustment has a constant anchor map")
    if f.kind == "constant":
        return v
    if f.kind == "additive":
        return v - f.phi
    if f.kind == "linear":
        return v / f.phi
    if f.kind == "exp":
        if not v > 0.0:
            raise BracketError(
                f"exp anchor range is (0, inf); no tau attains {v!r}")
        return math.log(v) / f.phi
    if f.kind == "sigmoid":
        if not 0.0 < v < 1.0:
            raise BracketError(
                f"sigmoid anchor range is (0, 1); no tau attains {v!r}")
        return math.log(v / (1.0 - v)) / f.phi
    return math.atan(v) / f.phi


def lambda_sup(f: AdjustmentFunction, tau: float) -> float:
    """Supremum of the ``lam`` domain of ``f_tau`` (``inf`` when unbounded)."""
    if f.kind == "tan":
        _require_tau_positive(f, tau)
        return math.pi / 2 / tau
    return math.inf
