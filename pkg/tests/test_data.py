"""Synthetic generators, splitting, CSV round trips."""

import math

import numpy as np
import pytest
from conftest import MASS_WITHIN_1SD, mixture_cdf

from cp2 import (Dataset, DegenerateError, DomainError, MissingColumnError,
                 ParseError, SplitSpec, ValidationError, dgp_sample, gmm_cdf,
                 load_csv, make_dgp, split, substream, write_csv)


def test_dgp_registry():
    for name in ("bimodal1d", "gmm4", "hetero1d"):
        dgp = make_dgp(name)
        assert dgp.name == name and dgp.d == 1 and dgp.p == 1
    with pytest.raises(DomainError):
        make_dgp("spiral")


def test_hetero1d_conditional_matches_samples():
    dgp = make_dgp("hetero1d")
    cond = dgp.conditional(0.5)
    assert cond.k == 1
    assert cond.variances[0, 0] == pytest.approx(2.25, abs=1e-15)
    ds = dgp_sample(dgp, 60_000, 4)
    assert ds.x.min() >= 0.0 and ds.x.max() <= 1.0
    band = (ds.x[:, 0] > 0.45) & (ds.x[:, 0] < 0.55)
    # sd of y near x = 0.5 approaches 1.5
    assert ds.y_flat[band].std() == pytest.approx(1.5, rel=0.05)


def test_bimodal1d_conditional_matches_samples():
    dgp = make_dgp("bimodal1d")
    cond = dgp.conditional(3.0)
    # modes at 0.2 x -+ (1 + 0.3 x): x = 3 gives 0.6 -+ 1.9
    assert cond.means[:, 0] == pytest.approx([-1.3, 2.5], abs=1e-12)
    ds = dgp_sample(dgp, 80_000, 5)
    band = (ds.x[:, 0] > 2.9) & (ds.x[:, 0] < 3.1)
    y = ds.y_flat[band]
    upper = y[y > 0.6]
    assert upper.mean() == pytest.approx(2.5, abs=0.05)
    assert (y < 0.6).mean() == pytest.approx(0.5, abs=0.05)


def test_gmm4_conditional_center_is_bimodal():
    dgp = make_dgp("gmm4")
    cond = dgp.conditional(0.0)
    assert cond.k == 4
    # at the center the two y = +-2 components carry almost all the mass
    split = {mu: w for w, mu in zip(cond.weights, cond.means[:, 0])}
    assert split[-2.0] == pytest.approx(split[2.0], abs=1e-12)
    assert split[2.0] > 0.45
    assert gmm_cdf(cond, 0.0) == pytest.approx(0.5, abs=1e-12)
    assert cond.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_gmm4_conditional_collapses_at_the_sides():
    dgp = make_dgp("gmm4")
    side = dgp.conditional(2.5)
    lead = int(np.argmax(side.weights))
    assert side.weights[lead] > 0.99
    assert side.means[lead, 0] == pytest.approx(0.0, abs=1e-12)
    assert side.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_gmm4_sample_moments():
    dgp = make_dgp("gmm4")
    ds = dgp_sample(dgp, 120_000, 6)
    assert ds.x.mean() == pytest.approx(0.0, abs=0.03)
    assert ds.y_flat.mean() == pytest.approx(0.0, abs=0.03)
    # var = 0.16 + half the components sit at +-2 on each axis
    assert ds.x.var() == pytest.approx(2.16, rel=0.02)
    assert ds.y_flat.var() == pytest.approx(2.16, rel=0.02)


def test_dgp_sample_streams():
    dgp = make_dgp("hetero1d")
    a = dgp_sample(dgp, 10, 1)
    b = dgp_sample(dgp, 10, 1)
    assert (a.x == b.x).all() and (a.y == b.y).all()
    c = dgp_sample(dgp, 10, 1, stream=("data", 1))
    assert not (a.x == c.x).all()
    with pytest.raises(DegenerateError):
        dgp_sample(dgp, 0, 1)


def test_split_spec_sizes():
    assert SplitSpec(0.5, 0.3, 0.2).sizes(10) == (5, 3, 2)
    assert SplitSpec(0.4, 0.4, 0.2).sizes(2500) == (1000, 1000, 500)
    # leftover slots go to the largest fractional remainders
    assert SplitSpec(0.5, 0.3, 0.2).sizes(11) == (6, 3, 2)
    assert SplitSpec(1 / 3, 1 / 3, 1 / 3).sizes(8) == (3, 3, 2)
    with pytest.raises(ValidationError):
        SplitSpec(0.5, 0.5, 0.2)
    with pytest.raises(ValidationError):
        SplitSpec(1.0, 0.0, 0.0)


def test_split_partitions_ids():
    dgp = make_dgp("bimodal1d")
    ds = dgp_sample(dgp, 50, 7)
    train, calib, test = split(ds, SplitSpec(0.5, 0.3, 0.2), 7)
    assert (len(train), len(calib), len(test)) == (25, 15, 10)
    ids = np.concatenate([train.ids, calib.ids, test.ids])
    assert sorted(ids.tolist()) == list(range(50))
    # rows travel with their ids
    k = int(calib.ids[3])
    assert calib.x[3, 0] == ds.x[k, 0] and calib.y[3, 0] == ds.y[k, 0]
    again = split(ds, SplitSpec(0.5, 0.3, 0.2), 7)
    assert (again[1].ids == calib.ids).all()
    other = split(ds, SplitSpec(0.5, 0.3, 0.2), 8)
    assert not (other[1].ids == calib.ids).all()
    with pytest.raises(DegenerateError):
        split(ds, SplitSpec(0.98, 0.01, 0.01), 7)


def test_csv_round_trip(tmp_path):
    dgp = make_dgp("gmm4")
    ds = dgp_sample(dgp, 40, 9)
    path = str(tmp_path / "data.csv")
    write_csv(ds, path)
    back = load_csv(path, target="y")
    assert back.x == pytest.approx(ds.x, abs=0.0)  # repr() is lossless
    assert back.y == pytest.approx(ds.y, abs=0.0)


def test_load_csv_features_and_standardize(tmp_path):
    path = tmp_path / "t.csv"
    path.write_text("a,b,y\n1,10,0.5\n2,20,1.5\n3,30,2.5\n")
    ds = load_csv(str(path), target="y")
    assert ds.d == 2 and len(ds) == 3
    only_a = load_csv(str(path), target="y", features=["a"])
    assert only_a.d == 1 and only_a.x[:, 0] == pytest.approx([1, 2, 3])
    std = load_csv(str(path), target="y", standardize=True)
    assert std.x.mean(axis=0) == pytest.approx([0.0, 0.0], abs=1e-12)
    assert std.x.std(axis=0) == pytest.approx([1.0, 1.0], abs=1e-12)
    mean, scale = std.feature_transform
    assert mean == pytest.approx([2.0, 20.0])


def test_load_csv_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,y\n1,2\n3\n")
    with pytest.raises(ParseError, match="2 fields|1 fields"):
        load_csv(str(path), target="y")
    path.write_text("a,y\n1,oops\n")
    with pytest.raises(ParseError, match="oops"):
        load_csv(str(path), target="y")
    path.write_text("a,y\n")
    with pytest.raises(DegenerateError):
        load_csv(str(path), target="y")
    path.write_text("")
    with pytest.raises(ParseError):
        load_csv(str(path), target="y")
    path.write_text("a,y\n1,2\n")
    with pytest.raises(MissingColumnError):
        load_csv(str(path), target="z")
    with pytest.raises(MissingColumnError):
        load_csv(str(path), target="y", features=["q"])
    path.write_text("y\n1\n")
    with pytest.raises(ParseError, match="feature"):
        load_csv(str(path), target="y")


def test_write_csv_rejects_vector_response(tmp_path):
    bad = Dataset(np.zeros((3, 1)), np.zeros((3, 2)))
    with pytest.raises(DomainError):
        write_csv(bad, str(tmp_path / "v.csv"))


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("a,y\n1,2\n\n , \n3,4\n")
    ds = load_csv(str(path), target="y")
    assert len(ds) == 2
