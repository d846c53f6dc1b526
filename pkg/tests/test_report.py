"""Report canonicalization, tables, delimited output."""

import csv
import json
import math

import pytest

from cp2 import (read_report, render_table, report_bytes, run,
                 validate_config, write_metrics_csv, write_report)
from cp2.report import _method_order, _sanitize


def _tiny_config(alpha=0.2, methods=None):
    return validate_config({
        "data": {"kind": "dgp", "name": "hetero1d", "n": 30},
        "model": {"kind": "oracle"},
        "methods": methods or [{"name": "CP"}],
        "alpha": alpha,
        "replications": 2,
        "seed": 3,
        "wsc_deltas": [0.9],
        "wsc_directions": 10,
    })


def test_sanitize_non_finite():
    obj = {"a": math.inf, "b": [math.nan, 1.0, -math.inf], "c": "x",
           "d": {"e": 2}}
    out = _sanitize(obj)
    assert out == {"a": "inf", "b": ["nan", 1.0, "-inf"], "c": "x",
                   "d": {"e": 2}}
    json.dumps(out, allow_nan=False)  # strictly valid JSON


def test_report_bytes_key_order_invariant():
    a = {"x": 1, "y": {"p": [1, 2], "q": math.inf}}
    b = {"y": {"q": math.inf, "p": [1, 2]}, "x": 1}
    assert report_bytes(a) == report_bytes(b)
    assert report_bytes(a).endswith(b"\n")


def test_report_file_round_trip(tmp_path):
    report = {"schema": "cp2-report-v1", "value": 0.25, "tags": ["a", "b"]}
    path = str(tmp_path / "r.json")
    write_report(report, path)
    assert read_report(path) == report


def test_run_report_renders(tmp_path):
    report = run(_tiny_config())
    assert not report["failed"]
    text = render_table(report)
    assert text.splitlines()[0].startswith("hetero1d")
    assert "M.Cov" in text and "C.Cov(0.1)" in text and "w_sd" in text
    assert "\nCP" in text or text.splitlines()[3].startswith("CP")

    path = str(tmp_path / "metrics.csv")
    write_metrics_csv(report, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    metrics = [r["metric"] for r in rows]
    assert metrics == ["marginal_coverage", "wsc_0.1", "mean_scaled_size",
                       "n_unbounded"]
    agg = report["aggregates"]["CP"]
    by_metric = {r["metric"]: r for r in rows}
    # repr round trip is exact
    assert float(by_metric["marginal_coverage"]["mean"]) == \
        agg["marginal_coverage"]["mean"]
    assert float(by_metric["wsc_0.1"]["std"]) == agg["wsc"]["0.9"]["std"]


def test_unbounded_sets_render_as_inf(tmp_path):
    # alpha below 1/(n_calib + 1): every prediction is the whole line
    report = run(_tiny_config(alpha=0.05))
    agg = report["aggregates"]["CP"]
    assert agg["mean_scaled_size"]["mean"] == math.inf
    assert agg["n_unbounded"]["mean"] > 0
    text = render_table(report)
    row = next(l for l in text.splitlines() if l.startswith("CP"))
    assert "inf" in row
    # the serialized report is still strictly valid JSON
    parsed = json.loads(report_bytes(report))
    assert parsed["aggregates"]["CP"]["mean_scaled_size"]["mean"] == "inf"
    path = str(tmp_path / "m.csv")
    write_metrics_csv(report, path)
    with open(path) as fh:
        assert ",inf," in fh.read()


def test_failed_report_banner():
    report = {
        "schema": "cp2-report-v1",
        "config": {"data": {"name": "x"}, "alpha": 0.1, "replications": 3,
                   "seed": 0, "wsc_deltas": [], "methods": []},
        "aggregates": {},
        "failed": True,
        "error": "ValidationError: boom",
        "completed_replications": 1,
    }
    text = render_table(report)
    assert "FAILED after 1 replication(s): ValidationError: boom" in text


def test_method_order_follows_config():
    report = {
        "config": {"methods": [{"name": "CP2-PCP", "variant": "D"},
                               {"name": "CP"}]},
        "aggregates": {"CP": {}, "CP2-PCP-D": {}, "EXTRA": {}},
    }
    assert _method_order(report) == ["CP2-PCP-D", "CP", "EXTRA"]
