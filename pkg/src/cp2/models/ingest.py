"""External mixture ingestion.

Conditional mixtures estimated outside this package (one per dataset row)
enter through a small text format:

    # cp2-mixture-v1
    0; 0.5,0.5; -1.0,1.0; 0.3,0.3
    1; 1.0; 0.0; 1.0

Each row is ``row_id; weights; means; sigmas`` with comma-separated
fields, sigmas being standard deviations.  Row ids must match the ids of
the dataset the mixtures describe.
"""

from __future__ import annotations

import math

import numpy as np

from ..core.mixture import GaussianMixture
from ..errors import ParseError

HEADER = "# cp2-mixture-v1"


def _floats(field: str, path: str, lineno: int, what: str) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in field.split(",")], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}:{lineno}: bad {what} field: {exc}") from None
    if not np.isfinite(vals).all():
        raise ParseError(f"{path}:{lineno}: non-finite {what}")
    return vals


def ingest_mixture_params(path: str) -> dict:
    """Parse a mixture file into a ``{row_id: GaussianMixture}`` table."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ParseError(f"{path}:1: expected header {HEADER!r}")

    table: dict[int, GaussianMixture] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(";")]
        if len(parts) != 4:
            raise ParseError(f"{path}:{lineno}: expected 4 ';'-separated "
                             f"fields, got {len(parts)}")
        try:
            row_id = int(parts[0])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: bad row id {parts[0]!r}") from None
        if row_id in table:
            raise ParseError(f"{path}:{lineno}: duplicate row id {row_id}")
        w = _floats(parts[1], path, lineno, "weights")
        mu = _floats(parts[2], path, lineno, "means")
        sig = _floats(parts[3], path, lineno, "sigmas")
        if not (len(w) == len(mu) == len(sig)):
            raise ParseError(f"{path}:{lineno}: component counts differ "
                             f"({len(w)} weights, {len(mu)} means, "
                             f"{len(sig)} sigmas)")
        if (w < 0).any() or not math.isclose(w.sum(), 1.0, abs_tol=1e-6):
            raise ParseError(f"{path}:{lineno}: weights must be non-negative "
                             f"and sum to 1 (got {w.sum()!r})")
        if (sig <= 0).any():
            raise ParseError(f"{path}:{lineno}: sigmas must be positive")
        table[row_id] = GaussianMixture(w / w.sum(), mu[:, None],
                                        (sig ** 2)[:, None])
    if not table:
        raise ParseError(f"{path}: no mixture rows")
    return table


def write_mixture_params(path: str, table: dict) -> None:
    """Write a table in the format :func:`ingest_mixture_params` reads."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(HEADER + "\n")
        for row_id in sorted(table):
            m = table[row_id]
            w = ",".join(repr(float(v)) for v in m.weights)
            mu = ",".join(repr(float(v)) for v in m.means[:, 0])
            sig = ",".join(repr(float(v)) for v in np.sqrt(m.variances[:, 0]))
            fh.write(f"{row_id}; {w}; {mu}; {sig}\n")
