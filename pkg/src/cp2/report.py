"""Report serialization and rendering.

Reports are plain mappings (schema ``cp2-report-v1``) serialized as
canonical JSON: sorted keys, two-space indent, non-finite floats written
as strings so the output stays strictly valid JSON.  Identical runs are
byte-identical regardless of how many worker threads produced them.
"""

from __future__ import annotations

import json
import math


def _sanitize(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)  # "inf", "-inf", "nan"
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    return obj


def _value(v) -> float:
    """Undo the sanitizer when reading a report back."""
    return float(v)


def report_bytes(report: dict) -> bytes:
    return (json.dumps(_sanitize(report), sort_keys=True, indent=2)
            + "\n").encode("utf-8")


def write_report(report: dict, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(report_bytes(report))


def read_report(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _method_order(report: dict) -> list:
    agg = report.get("aggregates", {})
    order = []
    for m in report.get("config", {}).get("methods", []):
        name = m.get("name")
        if name == "CP2-PCP":
            name = f"CP2-PCP-{m.get('variant')}"
        if name in agg and name not in order:
            order.append(name)
    for name in agg:  # anything the config loop missed
        if name not in order:
            order.append(name)
    return order


def _fmt(stats: dict) -> str:
    mean, std = _value(stats["mean"]), _value(stats["std"])
    if math.isinf(mean):
        return "inf"
    return f"{mean:.2f} ({std:.2f})"


def render_table(report: dict) -> str:
    """Text table of the aggregate metrics, one row per method.

    Columns: marginal coverage (M.Cov), worst-slab coverage per delta
    (C.Cov), mean scaled size (w_sd); entries are ``mean (std)`` over
    replications, two decimals, whole-line sizes rendered as ``inf``.
    """
    cfg = report.get("config", {})
    agg = report.get("aggregates", {})
    deltas = sorted(cfg.get("wsc_deltas", []))
    head = ["method", "M.Cov"]
    head += [f"C.Cov({1.0 - d:g})" for d in deltas]
    head += ["w_sd"]

    rows = [head]
    for name in _method_order(report):
        entry = agg[name]
        row = [name, _fmt(entry["marginal_coverage"])]
        row += [_fmt(entry["wsc"][repr(float(d))]) for d in deltas]
        row += [_fmt(entry["mean_scaled_size"])]
        rows.append(row)

    widths = [max(len(r[j]) for r in rows) for j in range(len(head))]
    lines = []
    data_cfg = cfg.get("data", {})
    title = data_cfg.get("name") or data_cfg.get("path") or "run"
    lines.append(f"{title}  (alpha={cfg.get('alpha')}, "
                 f"{cfg.get('replications')} replication(s), "
                 f"seed={cfg.get('seed')})")
    if report.get("failed"):
        lines.append(f"FAILED after {report.get('completed_replications', 0)} "
                     f"replication(s): {report.get('error')}")
    lines.append("")
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j])
                               for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j]
                                   for j in range(len(head))))
    return "\n".join(lines) + "\n"


def write_metrics_csv(report: dict, path: str) -> None:
    """Long-format delimited aggregates: method, metric, mean, std."""
    cfg = report.get("config", {})
    deltas = sorted(cfg.get("wsc_deltas", []))
    lines = ["method,metric,mean,std"]
    agg = report.get("aggregates", {})
    for name in _method_order(report):
        entry = agg[name]
        items = [("marginal_coverage", entry["marginal_coverage"])]
        items += [(f"wsc_{1.0 - d:g}", entry["wsc"][repr(float(d))])
                  for d in deltas]
        items += [("mean_scaled_size", entry["mean_scaled_size"]),
                  ("n_unbounded", entry["n_unbounded"])]
        for metric, stats in items:
            lines.append(f"{name},{metric},{_value(stats['mean'])!r},"
                         f"{_value(stats['std'])!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
