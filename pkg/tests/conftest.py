"""Shared oracles and factories for the test suite.

The oracles here are deliberately independent of the package internals:
normal cdf via ``math.erf``, densities via the textbook formula, masses
via Simpson integration.  Tests freeze expected values computed from
these, then compare the package against them.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext

import numpy as np

from cp2 import GaussianMixture


def norm_cdf(x: float) -> float:
    """Standard normal cdf, independent of scipy."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def norm_pdf(x: float, mu: float = 0.0, sigma: float = 1.0) -> float:
    z = (x - mu) / sigma
    return math.exp(-0.5 * z * z) / (sigma * math.sqrt(2.0 * math.pi))


def mixture_pdf(m: GaussianMixture, y: float) -> float:
    """Scalar mixture density straight from the formula."""
    return sum(w * norm_pdf(y, mu[0], math.sqrt(var[0]))
               for w, mu, var in zip(m.weights, m.means, m.variances))


def mixture_cdf(m: GaussianMixture, y: float) -> float:
    return sum(w * norm_cdf((y - mu[0]) / math.sqrt(var[0]))
               for w, mu, var in zip(m.weights, m.means, m.variances))


def random_mixture(rng: np.random.Generator, k: int, dim: int = 1,
                   mean_span: float = 5.0, sigma_lo: float = 0.2,
                   sigma_hi: float = 2.0) -> GaussianMixture:
    w = rng.dirichlet(np.full(k, 2.0))
    means = rng.uniform(-mean_span, mean_span, size=(k, dim))
    sig = rng.uniform(sigma_lo, sigma_hi, size=(k, dim))
    return GaussianMixture(w, means, sig ** 2)


def bennett_reference(alpha: float, n: int, epsilon: float) -> dict:
    """Tail-bound quantities recomputed in 50-digit decimal arithmetic.

    ``Decimal(float)`` is exact, so the reference evaluates the very same
    binary inputs the package saw.
    """
    with localcontext() as ctx:
        ctx.prec = 50
        one = Decimal(1)
        a, e = Decimal(alpha), Decimal(epsilon)
        p = one - a - e
        if e == 0:
            u = Decimal(0)
            phi = Decimal(0)
        else:
            u = e / ((a + e) * p)
            phi = p * (one - p) * ((one + u) * (one + u).ln() - u)
        return {"u": u, "phi": phi, "bennett": (-Decimal(n) * phi).exp()}


# frozen reference constants, from the formulas above
Z_95 = 1.6448536269514722          # Phi^{-1}(0.95)
Z_975 = 1.959963984540054          # Phi^{-1}(0.975)
STD_NORMAL_PEAK = 0.3989422804014327        # phi(0)
STD_NORMAL_AT_1 = 0.24197072451914337       # phi(1)
MASS_WITHIN_1SD = 0.6826894921370859        # 2 Phi(1) - 1
