"""Fast deterministic self-checks for the installed package.

Each check exercises one invariant end to end with fixed inputs and
returns a (name, ok, detail) row; ``cp2 check`` prints them.  The suite
takes well under a second and touches no files.
"""

from __future__ import annotations

import math

import numpy as np

from .conformal import conformal_quantile, order_index, theory_bounds
from .core.adjustment import (KINDS, AdjustmentFunction, adjustment_apply,
                              adjustment_invert)
from .core.mixture import GaussianMixture
from .core.samples import SplitSpec
from .core.sets import interval_union_from_balls
from .families import hpd_superlevel_intervals
from .models.gmm import gmm_condition, gmm_density


def _check_round_trip():
    worst = 0.0
    for kind in KINDS:
        if kind in ("trivial", "constant"):
            continue
        adj = AdjustmentFunction(kind)
        for tau in (0.05, 0.3, 1.0):
            for lam in (-0.8, -0.1, 0.2, 0.9, 1.4):
                if kind == "tan" and abs(tau * lam) >= math.pi / 2:
                    continue
                v = adjustment_apply(adj, tau, lam)
                back = adjustment_invert(adj, tau, v)
                worst = max(worst, abs(back - lam))
    return worst < 1e-10, f"max round-trip error {worst:.2e}"


def _check_order_index():
    cases = [((9, 0.1), 9), ((99, 0.1), 90), ((100, 0.1), 91)]
    bad = [(args, order_index(*args), want)
           for args, want in cases if order_index(*args) != want]
    if bad:
        return False, f"wrong index for {bad}"
    q = conformal_quantile(np.arange(5, dtype=float), 0.05, "mu")
    return math.isinf(q), f"n=5, alpha=0.05 quantile = {q}"


def _check_interval_merge():
    u = interval_union_from_balls(np.array([0.0, 1.5, 5.0]), 1.0)
    want = [(-1.0, 2.5), (4.0, 6.0)]
    got = [(lo, hi) for lo, hi in u.intervals]
    ok = len(got) == 2 and all(abs(a - c) < 1e-12 and abs(b - d) < 1e-12
                               for (a, b), (c, d) in zip(got, want))
    return ok, f"merged to {got}"


def _check_hpd_unit_normal():
    m = GaussianMixture(np.array([1.0]), np.array([[0.0]]), np.array([[1.0]]))
    level = gmm_density(m, 1.0)
    ivs = hpd_superlevel_intervals(m, level)
    if len(ivs) != 1:
        return False, f"expected one interval, got {len(ivs)}"
    lo, hi = ivs[0]
    err = max(abs(lo + 1.0), abs(hi - 1.0))
    return err < 1e-8, f"density superlevel at p(1): [{lo:.9f}, {hi:.9f}]"


def _check_conditioning():
    means = np.array([[-2.0, -2.0], [-2.0, 2.0], [2.0, -2.0], [2.0, 2.0]])
    joint = GaussianMixture(np.full(4, 0.25), means, np.full((4, 2), 0.36))
    cond = gmm_condition(joint, np.array([0.0]), 1)
    # at x = 0 all four x-likelihoods match, so weights stay uniform
    err = float(np.abs(cond.weights - 0.25).max())
    ys = np.linspace(-4.0, 4.0, 9)
    joint_at = np.array([float(gmm_density(joint, np.array([0.0, y])))
                         for y in ys])
    marg = sum(w * math.exp(-0.5 * (0.0 - mu) ** 2 / 0.36)
               / math.sqrt(2 * math.pi * 0.36)
               for w, mu in zip(joint.weights, means[:, 0]))
    cond_at = np.array([float(gmm_density(cond, y)) for y in ys])
    err = max(err, float(np.abs(joint_at / marg - cond_at).max()))
    return err < 1e-9, f"max deviation {err:.2e}"


def _check_theory_gate():
    b = theory_bounds(0.1, 100000)
    ok = b["lemma_gate"] and b["bennett_term"] <= 1.0 / b["n"]
    return ok, (f"n=1e5: exp(-n*phi) = {b['bennett_term']:.3e} "
                f"<= 1/n, gate holds")


def _check_quantile_modes():
    rng = np.random.default_rng(7)
    scores = rng.standard_normal(57)
    a = conformal_quantile(scores, 0.1, "mu")
    b = conformal_quantile(scores, 0.1, "cbar")
    return a == b, f"mu={a!r} cbar={b!r}"


def _check_split_sizes():
    sizes = SplitSpec(0.5, 0.3, 0.2).sizes(10)
    return sizes == (5, 3, 2), f"(0.5, 0.3, 0.2) x 10 -> {sizes}"


CHECKS = [
    ("adjustment round trip", _check_round_trip),
    ("order statistic index", _check_order_index),
    ("interval merging", _check_interval_merge),
    ("density superlevel set", _check_hpd_unit_normal),
    ("mixture conditioning", _check_conditioning),
    ("coverage bound lemma", _check_theory_gate),
    ("quantile mode agreement", _check_quantile_modes),
    ("split sizing", _check_split_sizes),
]


def run_selfcheck() -> list:
    """Run every check; returns (name, ok, detail) rows."""
    rows = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # noqa: BLE001 - a crash is a failure
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, bool(ok), detail))
    return rows
