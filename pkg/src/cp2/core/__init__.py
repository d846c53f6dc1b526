"""Core types and pure operations: data containers, diagonal Gaussian
mixtures, adjustment functions and prediction-set representations."""

from .adjustment import (AdjustmentFunction, DEFAULT_PHI, KINDS,
                         adjustment_apply, adjustment_invert, anchor_inverse,
                         anchor_value, lambda_sup, tau_domain)
from .mixture import GaussianMixture, VARIANCE_FLOOR
from .samples import Dataset, LabeledSample, SplitSpec
from .sets import (BallUnionSet, IntervalUnion, interval_union_from_balls,
                   merge_intervals, whole_line)

__all__ = [
    "AdjustmentFunction", "DEFAULT_PHI", "KINDS",
    "adjustment_apply", "adjustment_invert", "anchor_inverse", "anchor_value",
    "lambda_sup", "tau_domain",
    "GaussianMixture", "VARIANCE_FLOOR",
    "Dataset", "LabeledSample", "SplitSpec",
    "BallUnionSet", "IntervalUnion", "interval_union_from_balls",
    "merge_intervals", "whole_line",
]
