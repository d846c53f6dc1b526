"""Operations on diagonal Gaussian mixtures.

Covers the numeric surface the rest of the package needs: pointwise
(log-)density, scalar cdf, sampling, EM fitting of joint mixtures, and
analytic conditioning of a joint mixture on its leading coordinates.

Conditioning is exact here: with axis-aligned components the features and
the response are independent *within* each component, so conditioning on
``x`` only reweights the components by their feature likelihood and leaves
every response marginal untouched.  Multimodal or heteroskedastic
conditionals are expressed through the number of components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, ndtr

from ..core.mixture import GaussianMixture, VARIANCE_FLOOR
from ..errors import DomainError, FitError, NumericalError
from ..rng import substream

_LOG2PI = float(np.log(2.0 * np.pi))


def _component_logpdf(m: GaussianMixture, pts: np.ndarray) -> np.ndarray:
    """Log N(pts | mu_l, diag var_l) for every component; shape (n, k)."""
    diff = pts[:, None, :] - m.means[None, :, :]          # (n, k, dim)
    with np.errstate(over="ignore"):  # huge points overflow to -inf logpdf
        q = (diff * diff / m.variances[None, :, :]).sum(axis=2)
    norm = (np.log(m.variances) + _LOG2PI).sum(axis=1)    # (k,)
    return -0.5 * (q + norm[None, :])


def _as_points(m: GaussianMixture, y) -> tuple[np.ndarray, bool]:
    """Coerce y to shape (n, dim); returns (points, was_scalar)."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0:
        if m.dim != 1:
            raise DomainError(f"scalar point given to a {m.dim}-dim mixture")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if m.dim == 1:
            return arr[:, None], False
        if arr.shape[0] == m.dim:
            return arr[None, :], True
        raise DomainError(f"point of length {arr.shape[0]} for a "
                          f"{m.dim}-dim mixture")
    if arr.ndim == 2 and arr.shape[1] == m.dim:
        return arr, False
    raise DomainError(f"cannot interpret shape {arr.shape} as points of a "
                      f"{m.dim}-dim mixture")


def gmm_logdensity(m: GaussianMixture, y) -> np.ndarray:
    pts, scalar = _as_points(m, y)
    out = logsumexp(_component_logpdf(m, pts) + np.log(m.weights)[None, :],
                    axis=1)
    return float(out[0]) if scalar else out


def gmm_density(m: GaussianMixture, y) -> np.ndarray:
    """Mixture density at y (scalar y, or rows of points)."""
    return np.exp(gmm_logdensity(m, y))


def gmm_cdf(m: GaussianMixture, y) -> np.ndarray:
    """Mixture cdf at y; scalar mixtures only."""
    if m.dim != 1:
        raise DomainError("cdf is defined for scalar mixtures")
    arr = np.asarray(y, dtype=float)
    z = (arr[..., None] - m.means[:, 0]) / np.sqrt(m.variances[:, 0])
    out = ndtr(z) @ m.weights
    return float(out) if arr.ndim == 0 else out


def gmm_sample(m: GaussianMixture, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n points; shape (n,) for scalar mixtures, else (n, dim)."""
    if n < 0:
        raise DomainError("n must be non-negative")
    comp = rng.choice(m.k, size=n, p=m.weights)
    pts = m.means[comp] + rng.standard_normal((n, m.dim)) * np.sqrt(m.variances[comp])
    return pts[:, 0] if m.dim == 1 else pts


@dataclass(frozen=True)
class GmmFit:
    """Result of an EM fit: the mixture plus its log-likelihood trace."""

    mixture: GaussianMixture
    loglik: np.ndarray
    converged: bool

    @property
    def n_iter(self) -> int:
        return len(self.loglik)


def _seed_means(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # k-means++ style: first uniform, then proportional to squared distance
    n = data.shape[0]
    means = np.empty((k, data.shape[1]))
    means[0] = data[rng.integers(n)]
    d2 = ((data - means[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            means[j] = data[rng.integers(n)]
        else:
            means[j] = data[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((data - means[j]) ** 2).sum(axis=1))
    return means


def gmm_fit_em(data: np.ndarray, k: int, seed: int, max_iter: int = 500,
               tol: float = 1e-7, restarts: int = 1) -> GmmFit:
    """Fit a k-component diagonal mixture by EM.

    Parameters
    ----------
    data : ndarray, shape (n, dim) or (n,)
    k : int
        Number of components; must satisfy 1 <= k <= n.
    seed : int
        Seeds the k-means++ initialization and any component re-seeding.
    max_iter : int
        Iteration cap; hitting it marks the fit as unconverged but is not
        an error.
    tol : float
        Stop when the relative log-likelihood improvement falls below this.
    restarts : int
        Independent EM runs from fresh initializations; the run with the
        best final log-likelihood wins.  EM is sensitive to its start, so
        a handful of restarts guards against merged-component optima.

    Raises
    ------
    FitError
        Non-finite input, k out of range, restarts < 1, or a component
        that stays empty after 3 re-seedings in every run.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    n, dim = data.shape
    if not np.isfinite(data).all():
        raise FitError("EM input must be finite")
    if not 1 <= k <= n:
        raise FitError(f"k={k} out of range for n={n}")
    if restarts < 1:
        raise FitError(f"restarts must be positive, got {restarts!r}")

    best = None
    failure = None
    for r in range(restarts):
        try:
            fit = _em_once(data, k, substream(seed, "em", r), max_iter, tol)
        except FitError as exc:
            failure = exc
            continue
        if best is None or fit.loglik[-1] > best.loglik[-1]:
            best = fit
    if best is None:
        raise failure
    return best


def _em_once(data: np.ndarray, k: int, rng: np.random.Generator,
             max_iter: int, tol: float) -> GmmFit:
    n, dim = data.shape
    global_var = np.maximum(data.var(axis=0), VARIANCE_FLOOR)

    weights = np.full(k, 1.0 / k)
    means = _seed_means(data, k, rng)
    variances = np.tile(global_var, (k, 1))

    trace = []
    reseeds = 0
    converged = False
    for _ in range(max_iter):
        m = GaussianMixture(weights, means, variances)
        logp = _component_logpdf(m, data) + np.log(m.weights)[None, :]
        norm = logsumexp(logp, axis=1)
        ll = float(norm.sum())
        resp = np.exp(logp - norm[:, None])               # (n, k)
        mass = resp.sum(axis=0)

        empty = mass < 1e-12
        if empty.any():
            reseeds += 1
            if reseeds > 3:
                raise FitError(f"{int(empty.sum())} component(s) remained "
                               f"empty after 3 re-seedings")
            for j in np.flatnonzero(empty):
                means[j] = data[rng.integers(n)]
                variances[j] = global_var
            weights = np.full(k, 1.0 / k)
            continue

        if trace and ll + 1e-9 * max(1.0, abs(trace[-1])) < trace[-1]:
            raise NumericalError("EM log-likelihood decreased")
        done = bool(trace) and abs(ll - trace[-1]) <= tol * abs(trace[-1])
        trace.append(ll)
        if done:
            converged = True
            break

        weights = mass / n
        means = (resp.T @ data) / mass[:, None]
        sq = resp.T @ (data * data) / mass[:, None]
        variances = np.maximum(sq - means * means, VARIANCE_FLOOR)

    return GmmFit(GaussianMixture(weights, means, variances),
                  np.asarray(trace), converged)


def gmm_condition(joint: GaussianMixture, x, d: int) -> GaussianMixture:
    """Condition a joint mixture over (x, y) on its first ``d`` coordinates.

    Returns the mixture of the trailing coordinates with weights
    reweighted by each component's feature likelihood at ``x``.  Computed
    in log space; raises :class:`NumericalError` if every component gives
    ``x`` zero likelihood.
    """
    if not 0 < d < joint.dim:
        raise DomainError(f"d={d} must split a {joint.dim}-dim mixture")
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != d:
        raise DomainError(f"x has length {x.shape[0]}, expected {d}")
    feat = GaussianMixture(joint.weights, joint.means[:, :d],
                           joint.variances[:, :d])
    logw = np.log(joint.weights) + _component_logpdf(feat, x[None, :])[0]
    if not np.isfinite(logw).any():
        raise NumericalError("conditioning point has zero likelihood under "
                             "every component")
    logw -= logsumexp(logw)
    return GaussianMixture(np.exp(logw), joint.means[:, d:],
                           joint.variances[:, d:])


@dataclass(frozen=True)
class JointGmmModel:
    """A fitted joint mixture over (features, response) with the split point."""

    mixture: GaussianMixture
    d: int

    def __post_init__(self):
        if not 0 < self.d < self.mixture.dim:
            raise DomainError(f"d={self.d} must split a "
                              f"{self.mixture.dim}-dim mixture")

    def condition(self, x) -> GaussianMixture:
        return gmm_condition(self.mixture, x, self.d)
