"""Split-conformal calibration over nested families.

The engine turns one calibration pass into a reusable rule:

1. per calibration point, bind a family and compute the model-calibrated
   parameter ``tau`` (the smallest anchor preimage whose set reaches mass
   ``1 - alpha`` under the conditional model), the raw conformity value
   ``lam`` of the observed response, and the adjusted score
   ``V = f_tau^{-1}(lam)``;
2. rank the scores together with a point mass at infinity and keep the
   ``ceil((1-alpha)(n+1))``-th smallest as ``quantile_v``;
3. at a new point, recompute ``tau`` the same way and return the family's
   set at ``f_tau(quantile_v)``.

The two degenerate adjustment kinds collapse this to the familiar poles:
``trivial`` skips ``tau`` entirely (plain split conformal on ``lam``),
``constant`` pins every score to the anchor so the output is the purely
model-calibrated set.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core.adjustment import (AdjustmentFunction, adjustment_apply,
                              adjustment_invert, anchor_inverse, anchor_value,
                              lambda_sup, tau_domain)
from .core.samples import Dataset
from .core.sets import IntervalUnion, whole_line
from .errors import (BracketError, CapabilityError, DegenerateError,
                     DomainError, NumericalError, ValidationError)
from .families import (BallUnionBuilder, CqrBuilder, FixedWidthBuilder,
                       HpdBuilder, HpdFamily, family_lambda)
from .models.conditional import ConditionalModel
from .models.quantile import QuantileRegressor, fit_quantile_regressor
from .rng import substream

TAU_SOLVERS = ("none", "analytic", "monte-carlo")
QUANTILE_MODES = ("mu", "cbar")

# absolute tolerance of the analytic tau root-find
TAU_XTOL = 1e-10
_BRACKET_GROWTH = 4.0
_BRACKET_BUDGET = 60
# guard against float noise in ceil((1-alpha)(n+1)); far below any
# meaningful alpha resolution at usable n
_INDEX_EPS = 1e-9


def order_index(n: int, alpha: float) -> int:
    """The rank ``ceil((1-alpha)(n+1))`` of the conformal order statistic."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if n < 1:
        raise DegenerateError("need at least one calibration point")
    return int(math.ceil((1.0 - alpha) * (n + 1) - _INDEX_EPS))


def conformal_quantile(scores: np.ndarray, alpha: float,
                       mode: str = "mu") -> float:
    """Calibrated score threshold.

    ``mu`` ranks the scores together with an atom at infinity and can
    return ``inf`` when ``alpha < 1/(n+1)``.  ``cbar`` is the
    ``(1-alpha)(1+1/n)``-level empirical quantile of the scores alone;
    it needs ``alpha >= 1/(n+1)`` and then equals the ``mu`` value
    exactly.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 1 or scores.size == 0:
        raise DegenerateError("scores must be a non-empty vector")
    if not np.isfinite(scores).all():
        raise NumericalError("calibration scores must be finite")
    n = scores.size
    if mode == "mu":
        k = order_index(n, alpha)
        if k > n:
            return math.inf
        return float(np.sort(scores)[k - 1])
    if mode == "cbar":
        level = (1.0 - alpha) * (1.0 + 1.0 / n)
        if level > 1.0 + _INDEX_EPS:
            raise DomainError(f"cbar mode needs alpha >= 1/(n+1); "
                              f"alpha={alpha!r}, n={n}")
        k = int(math.ceil(level * n - _INDEX_EPS))
        return float(np.sort(scores)[min(k, n) - 1])
    raise DomainError(f"unknown quantile mode {mode!r}")


# ---------------------------------------------------------------------------
# tau calibration

def _expand_bracket(mass_of_tau, adj: AdjustmentFunction, target: float):
    """Bracket [lo, hi] with mass(lo) < target <= mass(hi).

    Starts at [-1, 1] (shrunk inside bounded anchor domains) and expands
    geometrically, approaching finite domain edges instead of crossing
    them; a budget of ``_BRACKET_BUDGET`` expansions per side guards
    against masses that never reach the target.
    """
    dom_lo, dom_hi = tau_domain(adj)
    lo = -1.0 if dom_lo < -1.0 else 0.5 * dom_lo
    hi = 1.0 if dom_hi > 1.0 else 0.5 * dom_hi

    m_hi = mass_of_tau(hi)
    for _ in range(_BRACKET_BUDGET):
        if m_hi >= target:
            break
        hi = hi * _BRACKET_GROWTH if math.isinf(dom_hi) \
            else dom_hi - (dom_hi - hi) / _BRACKET_GROWTH
        m_hi = mass_of_tau(hi)
    else:
        raise BracketError(f"mass never reached {target!r} within the "
                           f"bracket budget (model or family broken)")
    m_lo = mass_of_tau(lo)
    for _ in range(_BRACKET_BUDGET):
        if m_lo < target:
            break
        lo = lo * _BRACKET_GROWTH if math.isinf(dom_lo) \
            else dom_lo + (lo - dom_lo) / _BRACKET_GROWTH
        m_lo = mass_of_tau(lo)
    else:
        raise BracketError("mass exceeds the target arbitrarily far down; "
                           "the feasible set is unbounded below")
    return lo, hi


def _mass_target_root(mass_of_tau, adj: AdjustmentFunction,
                      target: float) -> float:
    """Smallest tau with ``mass_of_tau(tau) >= target`` for continuous mass.

    Brent's method on ``mass - target``, then a forward nudge so the
    returned point sits on the ``>=`` side of the crossing.
    """
    lo, hi = _expand_bracket(mass_of_tau, adj, target)
    root = float(brentq(lambda tau: mass_of_tau(tau) - target, lo, hi,
                        xtol=TAU_XTOL))
    step = TAU_XTOL * max(1.0, abs(root))
    for _ in range(_BRACKET_BUDGET):
        if mass_of_tau(root) >= target - 1e-12:
            break
        root = min(root + step, hi)
        step *= 2.0
    return root


def _mass_target_edge(mass_of_tau, adj: AdjustmentFunction,
                      target: float) -> float:
    """Infimum tau with ``mass_of_tau(tau) >= target`` for step masses.

    Empirical masses are flat between order statistics, so ``mass -
    target`` has zero plateaus and a plain root-find can stop anywhere on
    one.  Bisecting the predicate ``mass >= target`` instead converges to
    the left edge; the returned value is the feasible bracket end, within
    ``TAU_XTOL`` above the infimum.
    """
    lo, hi = _expand_bracket(mass_of_tau, adj, target)
    while hi - lo > TAU_XTOL:
        mid = 0.5 * (lo + hi)
        if mass_of_tau(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def _clamp_linear(adj: AdjustmentFunction, tau: float) -> float:
    # degenerate data can calibrate a non-positive linear slope; keep the
    # map increasing and warn rather than fail
    if adj.kind == "linear" and tau <= 0.0:
        warnings.warn(f"linear adjustment calibrated tau={tau!r} <= 0; "
                      f"clamped to 1e-12", RuntimeWarning, stacklevel=3)
        return 1e-12
    return tau


def compute_tau(fam, adj: AdjustmentFunction, alpha: float, *,
                mixture=None, draws: np.ndarray = None,
                solver: str = "auto") -> float:
    """Model-calibrated parameter of one point's family.

    ``tau`` is the smallest anchor preimage whose set holds conditional
    mass at least ``1 - alpha``:

    * analytic (``mixture`` given, or an hpd family): Brent root-find on
      ``tau -> mass(f_tau(phi)) - (1 - alpha)``;
    * monte-carlo (``draws`` given): closed form; the empirical
      ``(1-alpha)``-quantile of the draws' conformity values, pulled back
      through the anchor map.

    Raises :class:`BracketError` when no admissible ``tau`` attains the
    target mass (empty or unbounded-below feasible set).
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if adj.kind == "trivial":
        raise DomainError("trivial adjustment has no tau to calibrate")
    target = 1.0 - alpha

    if solver == "auto":
        solver = "monte-carlo" if draws is not None else "analytic"
    if solver == "monte-carlo":
        if draws is None:
            raise CapabilityError("monte-carlo tau needs draws")
        vals = np.sort(fam.lam_batch(draws))
        k = min(max(int(math.ceil(target * vals.size - _INDEX_EPS)), 1),
                vals.size)
        return _clamp_linear(adj, anchor_inverse(adj, float(vals[k - 1])))
    if solver == "analytic":
        if mixture is None and not isinstance(fam, HpdFamily):
            raise CapabilityError("analytic tau needs a conditional mixture")
        mass = lambda tau: fam.mass_analytic(anchor_value(adj, tau), mixture)
        return _clamp_linear(adj, _mass_target_root(mass, adj, target))
    if solver == "empirical-root":
        # edge-find on the empirical mass step function; exists as an
        # independent cross-check of the closed form
        if draws is None:
            raise CapabilityError("empirical-root tau needs draws")
        vals = fam.lam_batch(draws)
        mass = lambda tau: float(np.mean(vals <= anchor_value(adj, tau)))
        return _clamp_linear(adj, _mass_target_edge(mass, adj, target))
    raise DomainError(f"unknown tau solver {solver!r}")


# ---------------------------------------------------------------------------
# calibration records and the calibrated rule

@dataclass(frozen=True)
class CalibrationRecord:
    """Per-point calibration triple; every field is finite."""

    point_id: int
    tau: float
    lam: float
    score: float

    def __post_init__(self):
        for name in ("tau", "lam", "score"):
            if not math.isfinite(getattr(self, name)):
                raise NumericalError(f"non-finite {name} at point "
                                     f"{self.point_id}: {getattr(self, name)!r}")


@dataclass(frozen=True)
class BoundMethod:
    """A method recipe: family builder + adjustment + solver settings."""

    name: str
    builder: object
    adjustment: AdjustmentFunction
    tau_solver: str = "none"
    m2: int = 250
    quantile_mode: str = "mu"

    def __post_init__(self):
        if self.tau_solver not in TAU_SOLVERS:
            raise ValidationError(f"unknown tau solver {self.tau_solver!r}")
        if self.quantile_mode not in QUANTILE_MODES:
            raise ValidationError(f"unknown quantile mode {self.quantile_mode!r}")
        if (self.adjustment.kind == "trivial") != (self.tau_solver == "none"):
            raise ValidationError("trivial adjustment and solver 'none' "
                                  "imply each other")
        if self.tau_solver == "monte-carlo" and self.m2 < 1:
            raise ValidationError("monte-carlo solver needs m2 >= 1")
        if self.tau_solver != "none" and not hasattr(self.builder, "model"):
            raise ValidationError(f"{self.name}: builder carries no model, "
                                  f"only trivial adjustment is possible")

    def _family(self, x, point_id, seed: int, phase: str):
        return self.builder.build(x, point_id,
                                  substream(seed, phase, int(point_id), 0))

    def _tau(self, fam, x, point_id, alpha: float, seed: int,
             phase: str) -> float:
        if self.tau_solver == "monte-carlo":
            rng = substream(seed, phase, int(point_id), 1)
            draws = self.builder.model.sample(x, self.m2, rng, point_id)
            return compute_tau(fam, self.adjustment, alpha, draws=draws,
                               solver="monte-carlo")
        mixture = None
        if not isinstance(fam, HpdFamily):
            mixture = self.builder.model.mixture_at(x, point_id)
        return compute_tau(fam, self.adjustment, alpha, mixture=mixture,
                           solver="analytic")


@dataclass(frozen=True)
class CalibratedMethod:
    """Frozen result of one calibration pass, ready to predict."""

    method: BoundMethod
    alpha: float
    seed: int
    records: tuple
    quantile_v: float

    @property
    def n(self) -> int:
        return len(self.records)

    @property
    def scores(self) -> np.ndarray:
        return np.array([r.score for r in self.records])


def calibrate(calib: Dataset, method: BoundMethod, alpha: float,
              seed: int) -> CalibratedMethod:
    """Run the calibration pass of a method on one dataset.

    Draw streams are keyed by ``(seed, "calib", point_id)``, so the result
    is exactly invariant under permutations of the calibration rows and
    methods sharing a seed share their exogenous draws.
    """
    if len(calib) < 1:
        raise DegenerateError("calibration set is empty")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    adj = method.adjustment
    records = []
    for k in range(len(calib)):
        x, y, pid = calib.x[k], calib.y[k], int(calib.ids[k])
        fam = method._family(x, pid, seed, "calib")
        lam = family_lambda(fam, y)
        if adj.kind == "trivial":
            tau, score = 0.0, lam
        else:
            tau = method._tau(fam, x, pid, alpha, seed, "calib")
            if adj.kind == "constant":
                score = adj.phi  # every score collapses to the anchor
            else:
                score = adjustment_invert(adj, tau, lam)
        records.append(CalibrationRecord(pid, tau, lam, score))
    scores = np.array([r.score for r in records])
    quantile_v = conformal_quantile(scores, alpha, method.quantile_mode)
    return CalibratedMethod(method, float(alpha), int(seed),
                            tuple(records), quantile_v)


def predict_set(cm: CalibratedMethod, x, point_id: int = 0):
    """Prediction set at ``x``.

    Test-phase draws are keyed by ``(seed, "test", point_id)``; pass the
    row id when evaluating a dataset so prediction is reproducible and
    shared across methods.  An infinite calibrated quantile, or one beyond
    the adjustment's response domain, yields the flagged whole-line set.
    """
    method = cm.method
    x = np.asarray(x, dtype=float).reshape(-1)
    fam = method._family(x, point_id, cm.seed, "test")
    q = cm.quantile_v
    if method.adjustment.kind == "trivial":
        if math.isinf(q):
            return whole_line(fam.support_bracket())
        return fam.set_at(q)
    tau = method._tau(fam, x, point_id, cm.alpha, cm.seed, "test")
    if math.isinf(q) or q >= lambda_sup(method.adjustment, tau):
        return whole_line(fam.support_bracket())
    if q <= -lambda_sup(method.adjustment, tau):
        return IntervalUnion(())
    return fam.set_at(adjustment_apply(method.adjustment, tau, q))


# ---------------------------------------------------------------------------
# method constructors

def make_cp(model: ConditionalModel) -> BoundMethod:
    """Split conformal around the conditional mean (fixed-width family)."""
    return BoundMethod("CP", FixedWidthBuilder(model),
                       AdjustmentFunction("trivial"))


def make_cqr(regressor: QuantileRegressor = None, *, train: Dataset = None,
             alpha: float = None, multiplicative: bool = False,
             quantile_method: str = "knn", **fit_kw) -> BoundMethod:
    """Conformalized quantile band.

    Pass a fitted two-level ``regressor``, or ``train`` and ``alpha`` to
    fit one at levels (alpha/2, 1 - alpha/2).  Uses the ``cbar`` quantile
    mode, ranking only the observed scores at level
    ``(1-alpha)(1+1/n)``.
    """
    if regressor is None:
        if train is None or alpha is None:
            raise ValidationError("make_cqr needs a regressor, or train= "
                                  "and alpha= to fit one")
        regressor = fit_quantile_regressor(
            train, (alpha / 2, 1 - alpha / 2), quantile_method, **fit_kw)
    name = "CQR-M" if multiplicative else "CQR"
    return BoundMethod(name, CqrBuilder(regressor, multiplicative),
                       AdjustmentFunction("trivial"), quantile_mode="cbar")


def make_pcp(model: ConditionalModel, m: int = 50) -> BoundMethod:
    """Conformalized sample-ball union with a shared calibrated radius."""
    return BoundMethod("PCP", BallUnionBuilder(model, m),
                       AdjustmentFunction("trivial"))


def make_pi_yx(model: ConditionalModel, m: int = 50, m2: int = None,
               tau_solver: str = "monte-carlo") -> BoundMethod:
    """Pure model calibration: the ball union sized by ``tau`` alone.

    No conformal correction, hence no finite-sample coverage guarantee;
    included as the model-trust endpoint of the method family.
    """
    return BoundMethod("PiYX", BallUnionBuilder(model, m),
                       AdjustmentFunction("constant"),
                       tau_solver=tau_solver,
                       m2=5 * m if m2 is None else m2)


def make_cp2_pcp(model: ConditionalModel, variant: str = "L", m: int = 50,
                 m2: int = None,
                 tau_solver: str = "monte-carlo") -> BoundMethod:
    """Conditionally calibrated ball union.

    ``variant`` picks the adjustment: "L" rescales the radius by ``tau``
    (linear), "D" shifts it (additive).  The analytic ``tau_solver`` hits
    the target mass exactly but needs a mixture-typed conditional; the
    monte-carlo default works for any sampler.
    """
    variants = {"L": "linear", "D": "additive"}
    if variant not in variants:
        raise ValidationError(f"variant must be 'L' or 'D', got {variant!r}")
    return BoundMethod(f"CP2-PCP-{variant}", BallUnionBuilder(model, m),
                       AdjustmentFunction(variants[variant]),
                       tau_solver=tau_solver,
                       m2=5 * m if m2 is None else m2)


def make_cp2_hpd(model: ConditionalModel,
                 adjustment: AdjustmentFunction = None) -> BoundMethod:
    """Conditionally calibrated density superlevel sets.

    Defaults to the additive adjustment: the family's internal parameter
    is a negated density threshold, so calibrated values are negative and
    kinds requiring ``tau > 0`` do not fit.
    """
    adj = AdjustmentFunction("additive") if adjustment is None else adjustment
    return BoundMethod("CP2-HPD", HpdBuilder(model), adj,
                       tau_solver="analytic")


# ---------------------------------------------------------------------------
# finite-sample theory

def theory_bounds(alpha: float, n: int, epsilon: float = None) -> dict:
    """Finite-sample quantities behind the coverage guarantees.

    Returns the slack scale ``eps_n = sqrt(8 alpha (1-alpha) log(n) / n)``,
    the Bennett exponent ``phi`` at ``epsilon`` (default ``eps_n``) with its
    auxiliary ``u_eps``, the tail weight ``bennett_term = exp(-n phi)``,
    and ``lemma_gate``, the condition ``epsilon <= alpha(1-alpha)/8`` under
    which ``bennett_term <= 1/n`` is guaranteed.

    ``phi`` is ``p(1-p) h(u)`` with ``p = 1 - alpha - epsilon`` and
    ``h(u) = (1+u)log(1+u) - u``, equivalently
    ``epsilon[(1/u + 1)log(1+u) - 1]``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha!r}")
    if n < 2:
        raise DomainError("n must be at least 2")
    eps_n = math.sqrt(8.0 * alpha * (1.0 - alpha) * math.log(n) / n)
    eps = eps_n if epsilon is None else float(epsilon)
    if not 0.0 <= eps < 1.0 - alpha:
        raise DomainError(f"epsilon must lie in [0, 1-alpha), got {eps!r}")
    if eps == 0.0:
        u = 0.0
        phi = 0.0
    else:
        u = eps / ((alpha + eps) * (1.0 - alpha - eps))
        p = 1.0 - alpha - eps
        phi = p * (1.0 - p) * ((1.0 + u) * math.log1p(u) - u)
    return {
        "alpha": alpha,
        "n": int(n),
        "epsilon": eps,
        "u_eps": u,
        "phi": phi,
        "eps_n": eps_n,
        "bennett_term": math.exp(-n * phi),
        "lemma_gate": eps <= alpha * (1.0 - alpha) / 8.0,
    }
