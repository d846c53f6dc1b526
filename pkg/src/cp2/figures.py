"""Figure rendering for run reports.

Bar charts of the aggregate metrics (mean over replications, one
standard deviation as error bars) written as PNG files.  Uses the Agg
backend so rendering works headless.
"""

from __future__ import annotations

import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be set first

from .report import _method_order, _value  # noqa: E402

_DPI = 140
_BAR = dict(color="#4878a8", edgecolor="black", linewidth=0.6)
_ERR = dict(ecolor="black", capsize=3, linewidth=0.8)


def _save(fig, path: str) -> None:
    fig.tight_layout()
    # scrub creator/date metadata so re-renders of one report are identical
    fig.savefig(path, dpi=_DPI, metadata={"Software": None})
    plt.close(fig)


def _stats(entries, names, picker):
    means, stds = [], []
    for name in names:
        stats = picker(entries[name])
        m, s = _value(stats["mean"]), _value(stats["std"])
        means.append(m)
        stds.append(0.0 if not math.isfinite(s) else s)
    return means, stds


def _bar_axis(ax, names, means, stds, title, nominal=None):
    pos = range(len(names))
    finite = [m if math.isfinite(m) else 0.0 for m in means]
    ax.bar(pos, finite, yerr=stds, **_BAR, error_kw=_ERR)
    for i, m in enumerate(means):
        if not math.isfinite(m):
            ax.text(i, 0.02, "inf", ha="center", va="bottom", rotation=90)
    if nominal is not None:
        ax.axhline(nominal, color="#a84848", linestyle="--", linewidth=1.0,
                   label=f"nominal {nominal:g}")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xticks(list(pos))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_title(title, fontsize=10)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)


def render_figures(report: dict, outdir: str) -> list:
    """Render the standard report figures into ``outdir``.

    Returns the list of file paths written: marginal coverage, worst-slab
    coverage (one panel per slab mass) and mean scaled size.
    """
    agg = report.get("aggregates", {})
    names = _method_order(report)
    if not names:
        return []
    cfg = report.get("config", {})
    alpha = float(cfg.get("alpha", 0.1))
    deltas = sorted(cfg.get("wsc_deltas", []))
    os.makedirs(outdir, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(names), 3.2))
    means, stds = _stats(agg, names, lambda e: e["marginal_coverage"])
    _bar_axis(ax, names, means, stds, "marginal coverage",
              nominal=1.0 - alpha)
    ax.set_ylim(0.0, 1.05)
    path = os.path.join(outdir, "marginal_coverage.png")
    _save(fig, path)
    written.append(path)

    if deltas:
        fig, axes = plt.subplots(1, len(deltas),
                                 figsize=((1.2 + 0.9 * len(names))
                                          * len(deltas), 3.2),
                                 squeeze=False)
        for j, d in enumerate(deltas):
            means, stds = _stats(agg, names,
                                 lambda e, k=repr(float(d)): e["wsc"][k])
            _bar_axis(axes[0][j], names, means, stds,
                      f"worst-slab coverage (slab mass {1.0 - d:g})",
                      nominal=1.0 - alpha)
            axes[0][j].set_ylim(0.0, 1.05)
        path = os.path.join(outdir, "wsc.png")
        _save(fig, path)
        written.append(path)

    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(names), 3.2))
    means, stds = _stats(agg, names, lambda e: e["mean_scaled_size"])
    _bar_axis(ax, names, means, stds, "mean size / sd(y)")
    path = os.path.join(outdir, "scaled_size.png")
    _save(fig, path)
    written.append(path)
    return written
