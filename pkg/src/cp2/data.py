"""Synthetic generators, dataset splitting, CSV I/O."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core.mixture import GaussianMixture
from .core.samples import Dataset, SplitSpec
from .errors import (DegenerateError, DomainError, MissingColumnError,
                     ParseError)
from .models.gmm import gmm_condition, gmm_sample
from .rng import substream


class SyntheticDgp:
    """Base for generators with an analytic conditional mixture."""

    name = None
    d = 1
    p = 1

    def sample(self, n: int, rng: np.random.Generator) -> Dataset:
        raise NotImplementedError

    def conditional(self, x) -> GaussianMixture:
        raise NotImplementedError


@dataclass(frozen=True)
class Bimodal1D(SyntheticDgp):
    """Two response modes drifting apart with x.

    x ~ U[0, 5]; y | x is an equal mixture of N(f - g, 0.25^2) and
    N(f + g, 0.25^2) with f = 0.2 x and g = 1 + 0.3 x.
    """

    name = "bimodal1d"

    def sample(self, n, rng):
        x = rng.uniform(0.0, 5.0, size=n)
        f, g = 0.2 * x, 1.0 + 0.3 * x
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        y = f + sign * g + 0.25 * rng.standard_normal(n)
        return Dataset(x[:, None], y[:, None])

    def conditional(self, x):
        x = float(np.asarray(x).reshape(()))
        f, g = 0.2 * x, 1.0 + 0.3 * x
        return GaussianMixture([0.5, 0.5], [[f - g], [f + g]],
                               [[0.0625], [0.0625]])


@dataclass(frozen=True)
class Gmm4(SyntheticDgp):
    """Joint four-component mixture over (x, y), diamond arrangement.

    Equal weights, isotropic sigma 0.4, centers on the axes at distance 2:
    (0, -2), (0, 2), (-2, 0), (2, 0).  The conditional is strongly bimodal
    near x = 0 and collapses to a single mode at the sides, so methods
    with a fixed interval shape pay for the center everywhere.
    """

    name = "gmm4"
    _sigma2 = 0.16

    def _joint(self) -> GaussianMixture:
        centers = [(0.0, -2.0), (0.0, 2.0), (-2.0, 0.0), (2.0, 0.0)]
        return GaussianMixture(np.full(4, 0.25), centers,
                               np.full((4, 2), self._sigma2))

    def sample(self, n, rng):
        pts = gmm_sample(self._joint(), n, rng)
        return Dataset(pts[:, :1], pts[:, 1:])

    def conditional(self, x):
        return gmm_condition(self._joint(), x, d=1)


@dataclass(frozen=True)
class Hetero1D(SyntheticDgp):
    """Purely heteroskedastic noise: x ~ U[0, 1], y = (1 + x) eps."""

    name = "hetero1d"

    def sample(self, n, rng):
        x = rng.uniform(0.0, 1.0, size=n)
        y = (1.0 + x) * rng.standard_normal(n)
        return Dataset(x[:, None], y[:, None])

    def conditional(self, x):
        x = float(np.asarray(x).reshape(()))
        return GaussianMixture([1.0], [[0.0]], [[(1.0 + x) ** 2]])


DGPS = {cls.name: cls for cls in (Bimodal1D, Gmm4, Hetero1D)}


def make_dgp(name: str) -> SyntheticDgp:
    try:
        return DGPS[name]()
    except KeyError:
        raise DomainError(f"unknown generator {name!r}; expected one of "
                          f"{', '.join(sorted(DGPS))}") from None


def dgp_sample(dgp: SyntheticDgp, n: int, seed: int,
               stream: tuple = ("data",)) -> Dataset:
    """Draw n rows on the keyed stream ``(seed, *stream)``."""
    if n < 1:
        raise DegenerateError("n must be positive")
    return dgp.sample(n, substream(seed, *stream))


def split(ds: Dataset, spec: SplitSpec, seed: int, stream: tuple = ("split",)):
    """Partition into (train, calib, test) by a seeded permutation.

    Row ids travel with the rows.  Every part must be non-empty.
    """
    n = len(ds)
    n_train, n_calib, n_test = spec.sizes(n)
    if min(n_train, n_calib, n_test) < 1:
        raise DegenerateError(f"split of n={n} leaves an empty part "
                              f"({n_train}/{n_calib}/{n_test})")
    perm = substream(seed, *stream).permutation(n)
    return (ds.take(perm[:n_train]),
            ds.take(perm[n_train:n_train + n_calib]),
            ds.take(perm[n_train + n_calib:]))


def load_csv(path: str, target: str, features: list = None,
             standardize: bool = False) -> Dataset:
    """Load a dataset from a headed CSV file.

    Parameters
    ----------
    path : str
    target : str
        Response column name.
    features : list of str, optional
        Feature columns; default is every non-target column.
    standardize : bool
        Scale features to mean 0, sd 1; the transform is recorded on the
        dataset (constant columns keep scale 1).
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if target not in header:
        raise MissingColumnError(f"{path}: no column {target!r} in header")
    if features is None:
        features = [h for h in header if h != target]
    for name in features:
        if name not in header:
            raise MissingColumnError(f"{path}: no column {name!r} in header")
    if not features:
        raise ParseError(f"{path}: no feature columns")
    cols = [header.index(name) for name in features]
    tcol = header.index(target)

    xs, ys = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"{path}:{lineno}: {len(row)} fields, "
                             f"expected {len(header)}")
        try:
            xs.append([float(row[c]) for c in cols])
            ys.append(float(row[tcol]))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    if not xs:
        raise DegenerateError(f"{path}: no data rows")

    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)[:, None]
    transform = None
    if standardize:
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale = np.where(scale > 0, scale, 1.0)
        x = (x - mean) / scale
        transform = (mean, scale)
    return Dataset(x, y, feature_transform=transform)


def write_csv(ds: Dataset, path: str) -> None:
    """Write a dataset with columns x_0..x_{d-1}, y (scalar response)."""
    if ds.p != 1:
        raise DomainError("csv writer handles scalar responses")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x_{j}" for j in range(ds.d)] + ["y"])
        for i in range(len(ds)):
            writer.writerow([repr(float(v)) for v in ds.x[i]]
                            + [repr(float(ds.y[i, 0]))])
