"""Experiment orchestration: validated run configs and the replication loop.

A run draws (or loads) a dataset per replication, splits it, builds the
conditional model, calibrates every configured method and evaluates it on
the test portion.  Replications are pure functions of (config, index), so
sharding them across a thread pool cannot change any number in the report.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .conformal import (calibrate, make_cp, make_cp2_hpd, make_cp2_pcp,
                        make_cqr, make_pcp, make_pi_yx)
from .core.samples import SplitSpec
from .data import load_csv, make_dgp, split
from .errors import ConfigError, ValidationError
from .metrics import evaluate
from .models.conditional import (model_from_joint, model_from_table,
                                 oracle_model)
from .models.gmm import JointGmmModel, gmm_fit_em
from .models.ingest import ingest_mixture_params
from .rng import derive_seed, substream

SCHEMA = "cp2-report-v1"

METHOD_NAMES = ("CP", "CQR", "PCP", "PiYX", "CP2-PCP", "CP2-PCP-L",
                "CP2-PCP-D", "CP2-HPD")

_METHOD_KEYS = {
    "CP": set(),
    "CQR": {"quantile_method", "k", "multiplicative"},
    "PCP": {"m"},
    "PiYX": {"m", "m2", "tau_solver"},
    "CP2-PCP": {"variant", "m", "m2", "tau_solver"},
    "CP2-PCP-L": {"m", "m2", "tau_solver"},
    "CP2-PCP-D": {"m", "m2", "tau_solver"},
    "CP2-HPD": set(),
}


def _check_keys(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) "
                          f"{', '.join(sorted(map(repr, unknown)))}")


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return section[key]


@dataclass(frozen=True)
class RunConfig:
    """Validated, defaults-filled run configuration."""

    data: dict
    model: dict
    methods: tuple
    alpha: float
    split: SplitSpec
    replications: int
    seed: int
    wsc_deltas: tuple
    wsc_directions: int
    output: str

    def echo(self) -> dict:
        """The normalized config as stored in reports."""
        return {
            "data": dict(self.data),
            "model": dict(self.model),
            "methods": [dict(m) for m in self.methods],
            "alpha": self.alpha,
            "split": {"train": self.split.train, "calib": self.split.calib,
                      "test": self.split.test},
            "replications": self.replications,
            "seed": self.seed,
            "wsc_deltas": list(self.wsc_deltas),
            "wsc_directions": self.wsc_directions,
            "output": self.output,
        }


def validate_config(raw: dict) -> RunConfig:
    """Check a raw config mapping and fill defaults.

    Raises :class:`ConfigError` naming the offending field.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(raw, {"data", "model", "methods", "alpha", "split",
                      "replications", "seed", "wsc_deltas", "wsc_directions",
                      "output"}, "config")

    data = dict(_require(raw, "data", "config"))
    kind = _require(data, "kind", "data")
    if kind == "dgp":
        _check_keys(data, {"kind", "name", "n"}, "data")
        _require(data, "name", "data")
        if _require(data, "n", "data") < 3:
            raise ConfigError("data.n: need at least 3 rows to split")
        make_dgp(data["name"])  # validates the name
    elif kind == "csv":
        _check_keys(data, {"kind", "path", "target", "features",
                           "standardize"}, "data")
        _require(data, "path", "data")
        _require(data, "target", "data")
        data.setdefault("features", None)
        data.setdefault("standardize", False)
    else:
        raise ConfigError(f"data.kind: unknown kind {kind!r} "
                          f"(expected 'dgp' or 'csv')")

    model = dict(_require(raw, "model", "config"))
    mkind = _require(model, "kind", "model")
    if mkind == "oracle":
        _check_keys(model, {"kind"}, "model")
        if kind != "dgp":
            raise ConfigError("model.kind 'oracle' needs dgp data")
    elif mkind == "fit-gmm":
        _check_keys(model, {"kind", "components", "max_iter", "tol",
                            "restarts"}, "model")
        if _require(model, "components", "model") < 1:
            raise ConfigError("model.components must be positive")
        model.setdefault("max_iter", 500)
        model.setdefault("tol", 1e-7)
        model.setdefault("restarts", 5)
        if model["restarts"] < 1:
            raise ConfigError("model.restarts must be positive")
    elif mkind == "ingest":
        _check_keys(model, {"kind", "path"}, "model")
        _require(model, "path", "model")
    else:
        raise ConfigError(f"model.kind: unknown kind {mkind!r} "
                          f"(expected 'oracle', 'fit-gmm' or 'ingest')")

    raw_methods = _require(raw, "methods", "config")
    if not isinstance(raw_methods, list) or not raw_methods:
        raise ConfigError("methods: need a non-empty list")
    methods = []
    for i, m in enumerate(raw_methods):
        m = dict(m)
        name = _require(m, "name", f"methods[{i}]")
        if name not in METHOD_NAMES:
            raise ConfigError(f"methods[{i}].name: unsupported method "
                              f"{name!r}; expected one of "
                              f"{', '.join(METHOD_NAMES)}")
        _check_keys(m, _METHOD_KEYS[name] | {"name"}, f"methods[{i}] ({name})")
        if name == "CP2-PCP":
            if m.get("variant") not in ("L", "D"):
                raise ConfigError(f"methods[{i}].variant: need 'L' or 'D'")
        if m.get("tau_solver", "monte-carlo") not in ("monte-carlo",
                                                      "analytic"):
            raise ConfigError(f"methods[{i}].tau_solver: need 'monte-carlo' "
                              f"or 'analytic'")
        methods.append(m)

    alpha = float(_require(raw, "alpha", "config"))
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha: must lie in (0, 1), got {alpha!r}")

    sp = raw.get("split", {"train": 0.5, "calib": 0.25, "test": 0.25})
    _check_keys(sp, {"train", "calib", "test"}, "split")
    try:
        split_spec = SplitSpec(float(_require(sp, "train", "split")),
                               float(_require(sp, "calib", "split")),
                               float(_require(sp, "test", "split")))
    except ValidationError as exc:
        raise ConfigError(f"split: {exc}") from None

    reps = int(raw.get("replications", 1))
    if reps < 1:
        raise ConfigError("replications: must be at least 1")
    seed = int(_require(raw, "seed", "config"))

    deltas = tuple(float(d) for d in raw.get("wsc_deltas", [0.9]))
    if any(not 0.0 < 1.0 - d <= 1.0 for d in deltas):
        raise ConfigError(f"wsc_deltas: slab mass 1-delta must lie in (0, 1]")
    directions = int(raw.get("wsc_directions", 1000))
    if directions < 1:
        raise ConfigError("wsc_directions: must be positive")

    return RunConfig(data=data, model=model, methods=tuple(methods),
                     alpha=alpha, split=split_spec, replications=reps,
                     seed=seed, wsc_deltas=deltas,
                     wsc_directions=directions,
                     output=str(raw.get("output", "")))


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return validate_config(raw)


# ---------------------------------------------------------------------------

def _needs_model(methods) -> bool:
    return any(m["name"] != "CQR" for m in methods)


def _build_methods(cfg: RunConfig, model, train):
    out = []
    for m in cfg.methods:
        name = m["name"]
        if name == "CP":
            out.append(make_cp(model))
        elif name == "CQR":
            out.append(make_cqr(train=train, alpha=cfg.alpha,
                                multiplicative=bool(m.get("multiplicative",
                                                          False)),
                                quantile_method=m.get("quantile_method",
                                                      "knn"),
                                **({"k": m["k"]} if "k" in m else {})))
        elif name == "PCP":
            out.append(make_pcp(model, m.get("m", 50)))
        elif name == "PiYX":
            out.append(make_pi_yx(model, m.get("m", 50), m.get("m2"),
                                  m.get("tau_solver", "monte-carlo")))
        elif name == "CP2-HPD":
            out.append(make_cp2_hpd(model))
        else:
            variant = m.get("variant", name.rsplit("-", 1)[-1])
            out.append(make_cp2_pcp(model, variant, m.get("m", 50),
                                    m.get("m2"),
                                    m.get("tau_solver", "monte-carlo")))
    return out


def run(cfg: RunConfig) -> dict:
    """Execute every replication and assemble the report mapping."""
    fixed_data = None
    if cfg.data["kind"] == "csv":
        fixed_data = load_csv(cfg.data["path"], cfg.data["target"],
                              cfg.data.get("features"),
                              bool(cfg.data.get("standardize", False)))
    ingested = None
    if cfg.model["kind"] == "ingest":
        ingested = ingest_mixture_params(cfg.model["path"])

    def one(r: int) -> dict:
        if cfg.data["kind"] == "dgp":
            dgp = make_dgp(cfg.data["name"])
            ds = dgp.sample(cfg.data["n"], substream(cfg.seed, "data", r))
        else:
            dgp, ds = None, fixed_data
        train, calib, test = split(ds, cfg.split, cfg.seed, stream=("split", r))

        model = None
        if _needs_model(cfg.methods):
            mk = cfg.model["kind"]
            if mk == "oracle":
                model = oracle_model(dgp)
            elif mk == "fit-gmm":
                joint = np.hstack([train.x, train.y])
                fit = gmm_fit_em(joint, cfg.model["components"],
                                 derive_seed(cfg.seed, "fit", r),
                                 cfg.model["max_iter"], cfg.model["tol"],
                                 cfg.model["restarts"])
                model = model_from_joint(JointGmmModel(fit.mixture, train.d))
            else:
                missing = set(ds.ids.tolist()) - set(ingested)
                if missing:
                    raise ValidationError(
                        f"ingested table misses {len(missing)} row id(s), "
                        f"e.g. {sorted(missing)[:3]}")
                model = model_from_table(ingested)

        rep_seed = derive_seed(cfg.seed, "rep", r)
        out = {}
        for bound in _build_methods(cfg, model, train):
            cm = calibrate(calib, bound, cfg.alpha, rep_seed)
            rep = evaluate(cm, test, cfg.wsc_deltas, cfg.wsc_directions,
                           wsc_seed=rep_seed)
            out[bound.name] = {
                "marginal_coverage": rep.marginal,
                "wsc": {repr(d): rep.wsc[d] for d in sorted(rep.wsc)},
                "mean_scaled_size": rep.mean_scaled_size,
                "n_unbounded": rep.n_unbounded,
            }
        return out

    workers = os.environ.get("CP2_THREADS")
    workers = int(workers) if workers else min(4, os.cpu_count() or 1)
    workers = max(1, min(workers, cfg.replications))

    rows = []
    failure = None
    try:
        if workers == 1:
            for r in range(cfg.replications):
                rows.append(one(r))
        else:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                for res in ex.map(one, range(cfg.replications)):
                    rows.append(res)
    except Exception as exc:  # noqa: BLE001 - reported, then re-raised by CLI
        failure = f"{type(exc).__name__}: {exc}"

    report = {
        "schema": SCHEMA,
        "config": cfg.echo(),
        "seed_lineage": {
            "master_seed": cfg.seed,
            "scheme": "streams keyed by (seed, label, replication, ...)",
            "replication_seeds": [derive_seed(cfg.seed, "rep", r)
                                  for r in range(len(rows))],
        },
        "replications": [{"replication": r, "methods": rows[r]}
                         for r in range(len(rows))],
        "aggregates": _aggregate(rows),
        "failed": failure is not None,
    }
    if failure is not None:
        report["error"] = failure
        report["completed_replications"] = len(rows)
    return report


def _mean_std(values) -> dict:
    arr = np.asarray(values, dtype=float)
    if np.isinf(arr).any():
        return {"mean": math.inf, "std": math.nan}
    return {"mean": float(arr.mean()), "std": float(arr.std())}


def _aggregate(rows) -> dict:
    if not rows:
        return {}
    agg = {}
    for name in rows[0]:
        per = [row[name] for row in rows]
        entry = {
            "marginal_coverage": _mean_std([p["marginal_coverage"] for p in per]),
            "mean_scaled_size": _mean_std([p["mean_scaled_size"] for p in per]),
            "n_unbounded": _mean_std([p["n_unbounded"] for p in per]),
            "wsc": {},
        }
        for dkey in per[0]["wsc"]:
            entry["wsc"][dkey] = _mean_std([p["wsc"][dkey] for p in per])
        agg[name] = entry
    return agg
