"""Command line behavior and config validation messages."""

import json
import os

import pytest

from cp2 import ConfigError, read_report, validate_config
from cp2.cli import main


def _write_config(tmp_path, **overrides):
    cfg = {
        "data": {"kind": "dgp", "name": "hetero1d", "n": 40},
        "model": {"kind": "oracle"},
        "methods": [{"name": "CP"}],
        "alpha": 0.2,
        "split": {"train": 0.4, "calib": 0.3, "test": 0.3},
        "replications": 2,
        "seed": 11,
        "wsc_deltas": [0.9],
        "wsc_directions": 10,
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_run_writes_outputs(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    outdir = str(tmp_path / "out")
    assert main(["run", cfg, "--output", outdir]) == 0
    assert sorted(os.listdir(outdir)) == ["metrics.csv", "report.json",
                                          "table.txt"]
    report = read_report(os.path.join(outdir, "report.json"))
    assert report["schema"] == "cp2-report-v1"
    assert not report["failed"]
    printed = capsys.readouterr().out
    assert printed == open(os.path.join(outdir, "table.txt")).read()


def test_run_renders_figures(tmp_path):
    cfg = _write_config(tmp_path)
    outdir = str(tmp_path / "out")
    assert main(["run", cfg, "--output", outdir, "--figures"]) == 0
    figs = sorted(os.listdir(os.path.join(outdir, "figures")))
    assert figs == ["marginal_coverage.png", "scaled_size.png", "wsc.png"]
    for name in figs:
        assert os.path.getsize(os.path.join(outdir, "figures", name)) > 500


def test_run_without_output_dir(tmp_path, capsys):
    cfg = _write_config(tmp_path)
    assert main(["run", cfg]) == 2
    assert "output" in capsys.readouterr().err


def test_run_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == 2
    assert "error:" in capsys.readouterr().err
    missing = str(tmp_path / "nope.json")
    assert main(["run", missing]) == 2


def test_synth_and_table(tmp_path, capsys):
    out = str(tmp_path / "rows.csv")
    assert main(["synth", "bimodal1d", "--n", "25", "--seed", "4",
                 "--out", out]) == 0
    with open(out) as fh:
        header = fh.readline().strip()
        n_rows = sum(1 for _ in fh)
    assert header == "x_0,y" and n_rows == 25
    capsys.readouterr()

    cfg = _write_config(tmp_path)
    outdir = str(tmp_path / "out")
    main(["run", cfg, "--output", outdir])
    capsys.readouterr()
    assert main(["table", os.path.join(outdir, "report.json")]) == 0
    assert "M.Cov" in capsys.readouterr().out


def test_synth_validation(tmp_path, capsys):
    assert main(["synth", "nope", "--n", "5",
                 "--out", str(tmp_path / "x.csv")]) == 2
    assert "unknown generator" in capsys.readouterr().err
    assert main(["synth", "hetero1d", "--n", "0",
                 "--out", str(tmp_path / "x.csv")]) == 2


def test_check_command(capsys):
    assert main(["check"]) == 0
    out = capsys.readouterr().out
    assert "checks passed" in out and "FAIL" not in out


@pytest.mark.parametrize("patch, fragment", [
    ({"alpha": 1.5}, "alpha"),
    ({"alpha": 0.0}, "alpha"),
    ({"methods": []}, "methods"),
    ({"methods": [{"name": "XXX"}]}, "methods[0].name"),
    ({"methods": [{"name": "CP", "m": 3}]}, "unknown key"),
    ({"methods": [{"name": "CP2-PCP", "m": 3}]}, "variant"),
    ({"data": {"kind": "dgp", "name": "hetero1d"}}, "'n'"),
    ({"data": {"kind": "dgp", "name": "hetero1d", "n": 2}}, "data.n"),
    ({"data": {"kind": "lake", "name": "x", "n": 9}}, "data.kind"),
    ({"data": {"kind": "csv", "target": "y"}}, "'path'"),
    ({"model": {"kind": "magic"}}, "model.kind"),
    ({"model": {"kind": "fit-gmm", "components": 0}}, "components"),
    ({"model": {"kind": "ingest"}}, "'path'"),
    ({"split": {"train": 0.9, "calib": 0.9, "test": 0.2}}, "split"),
    ({"split": {"train": 0.5, "calib": 0.5}}, "'test'"),
    ({"replications": 0}, "replications"),
    ({"wsc_deltas": [1.0]}, "wsc_deltas"),
    ({"wsc_directions": 0}, "wsc_directions"),
    ({"extra_key": 1}, "unknown key"),
])
def test_config_validation_messages(patch, fragment):
    cfg = {
        "data": {"kind": "dgp", "name": "hetero1d", "n": 40},
        "model": {"kind": "oracle"},
        "methods": [{"name": "CP"}],
        "alpha": 0.2,
        "seed": 11,
    }
    cfg.update(patch)
    with pytest.raises(ConfigError, match=None) as exc:
        validate_config(cfg)
    assert fragment in str(exc.value)


def test_oracle_model_requires_dgp_data(tmp_path):
    with pytest.raises(ConfigError, match="oracle"):
        validate_config({
            "data": {"kind": "csv", "path": "x.csv", "target": "y"},
            "model": {"kind": "oracle"},
            "methods": [{"name": "CP"}],
            "alpha": 0.2,
            "seed": 11,
        })


def test_config_defaults():
    cfg = validate_config({
        "data": {"kind": "dgp", "name": "hetero1d", "n": 40},
        "model": {"kind": "oracle"},
        "methods": [{"name": "CP"}],
        "alpha": 0.2,
        "seed": 11,
    })
    assert (cfg.split.train, cfg.split.calib, cfg.split.test) == \
        (0.5, 0.25, 0.25)
    assert cfg.replications == 1
    assert cfg.wsc_deltas == (0.9,)
    assert cfg.wsc_directions == 1000
    assert cfg.output == ""
