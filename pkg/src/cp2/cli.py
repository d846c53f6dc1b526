"""Command line interface.

Subcommands::

    cp2 run <config.json> [--output DIR] [--figures]
    cp2 synth <dgp> --n N [--seed S] --out FILE
    cp2 table <report.json>
    cp2 check

``run`` executes the configured experiment and writes ``report.json``,
``metrics.csv`` and ``table.txt`` into the output directory (plus a
``figures/`` subdirectory with PNG charts when requested), then prints
the table.  Exit status: 0 on success, 1 when a run fails partway
(the partial report is still written), 2 on bad input.
"""

from __future__ import annotations

import argparse
import os
import sys

from .data import dgp_sample, make_dgp, write_csv
from .errors import Cp2Error
from .report import read_report, render_table, write_metrics_csv, write_report
from .runner import load_config, run
from .selfcheck import run_selfcheck


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cp2",
        description="conditionally valid conformal prediction sets")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to a JSON run config")
    p_run.add_argument("--output", default=None,
                       help="output directory (overrides the config)")
    p_run.add_argument("--figures", action="store_true",
                       help="also render PNG charts into figures/")

    p_synth = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    p_synth.add_argument("dgp",
                         help="generator name (bimodal1d, gmm4, hetero1d)")
    p_synth.add_argument("--n", type=int, required=True,
                         help="number of rows")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output CSV path")

    p_table = sub.add_parser("table", help="print the table for a report")
    p_table.add_argument("report", help="path to a report.json")

    sub.add_parser("check", help="run the built-in self checks")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    outdir = args.output or cfg.output
    if not outdir:
        print("error: no output directory (set config 'output' or pass "
              "--output)", file=sys.stderr)
        return 2
    os.makedirs(outdir, exist_ok=True)

    report = run(cfg)
    write_report(report, os.path.join(outdir, "report.json"))
    write_metrics_csv(report, os.path.join(outdir, "metrics.csv"))
    table = render_table(report)
    with open(os.path.join(outdir, "table.txt"), "w", encoding="utf-8") as fh:
        fh.write(table)
    if args.figures:
        from .figures import render_figures
        render_figures(report, os.path.join(outdir, "figures"))
    print(table, end="")
    if report["failed"]:
        print(f"error: {report['error']}", file=sys.stderr)
        return 1
    return 0


def _cmd_synth(args) -> int:
    if args.n < 1:
        print("error: --n must be positive", file=sys.stderr)
        return 2
    ds = dgp_sample(make_dgp(args.dgp), args.n, args.seed)
    write_csv(ds, args.out)
    print(f"wrote {args.n} rows to {args.out}")
    return 0


def _cmd_table(args) -> int:
    print(render_table(read_report(args.report)), end="")
    return 0


def _cmd_check() -> int:
    rows = run_selfcheck()
    for name, ok, detail in rows:
        mark = " ok " if ok else "FAIL"
        print(f"[{mark}] {name}: {detail}")
    bad = sum(1 for _, ok, _ in rows if not ok)
    print(f"{len(rows) - bad}/{len(rows)} checks passed")
    return 0 if bad == 0 else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "table":
            return _cmd_table(args)
        return _cmd_check()
    except Cp2Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
