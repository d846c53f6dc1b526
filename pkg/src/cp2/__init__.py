"""Conditionally valid conformal prediction sets.

Split-conformal calibration of nested set families whose threshold is
adjusted per input by a model-calibrated anchor, plus the surrounding
experiment harness: data generators, mixture model fitting, evaluation
metrics and reporting.
"""

from .conformal import (BoundMethod, CalibratedMethod, CalibrationRecord,
                        calibrate, compute_tau, conformal_quantile, make_cp,
                        make_cp2_hpd, make_cp2_pcp, make_cqr, make_pcp,
                        make_pi_yx, order_index, predict_set, theory_bounds)
from .core.adjustment import (DEFAULT_PHI, KINDS, AdjustmentFunction,
                              adjustment_apply, adjustment_invert,
                              anchor_inverse, anchor_value, lambda_sup,
                              tau_domain)
from .core.mixture import GaussianMixture
from .core.samples import Dataset, LabeledSample, SplitSpec
from .core.sets import (BallUnionSet, IntervalUnion, interval_union_from_balls,
                        merge_intervals, whole_line)
from .data import (DGPS, Bimodal1D, Gmm4, Hetero1D, dgp_sample, load_csv,
                   make_dgp, split, write_csv)
from .errors import (BracketError, CapabilityError, ConfigError, Cp2Error,
                     DegenerateError, DomainError, FitError,
                     MissingColumnError, NumericalError, ParseError,
                     ValidationError)
from .families import (BallUnionBuilder, BallUnionFamily, ConfidenceFamily,
                       CqrAdditiveFamily, CqrBuilder, CqrMultiplicativeFamily,
                       FixedWidthBuilder, FixedWidthFamily, HpdBuilder,
                       HpdFamily, family_lambda, family_mass, family_set,
                       hpd_superlevel_intervals)
from .metrics import (EvaluationReport, evaluate, marginal_coverage,
                      scaled_size, worst_slab_coverage)
from .models.conditional import (ConditionalModel, model_from_joint,
                                 model_from_table, oracle_model,
                                 perturb_model)
from .models.gmm import (GmmFit, JointGmmModel, gmm_cdf, gmm_condition,
                         gmm_density, gmm_fit_em, gmm_logdensity, gmm_sample)
from .models.ingest import ingest_mixture_params, write_mixture_params
from .models.quantile import QuantileRegressor, fit_quantile_regressor
from .report import (read_report, render_table, report_bytes, write_metrics_csv,
                     write_report)
from .rng import derive_seed, substream
from .runner import RunConfig, load_config, run, validate_config

__version__ = "0.1.0"

__all__ = [
    "AdjustmentFunction", "BallUnionBuilder", "BallUnionFamily",
    "BallUnionSet", "Bimodal1D", "BoundMethod", "BracketError",
    "CalibratedMethod", "CalibrationRecord", "CapabilityError",
    "ConditionalModel", "ConfidenceFamily", "ConfigError", "Cp2Error",
    "CqrAdditiveFamily", "CqrBuilder", "CqrMultiplicativeFamily", "DEFAULT_PHI",
    "DGPS", "Dataset", "DegenerateError", "DomainError", "EvaluationReport",
    "FitError", "FixedWidthBuilder", "FixedWidthFamily", "GaussianMixture",
    "Gmm4", "GmmFit", "Hetero1D", "HpdBuilder", "HpdFamily", "IntervalUnion",
    "JointGmmModel", "KINDS", "LabeledSample", "MissingColumnError",
    "NumericalError", "ParseError", "QuantileRegressor", "RunConfig",
    "SplitSpec", "ValidationError", "adjustment_apply", "adjustment_invert",
    "anchor_inverse", "anchor_value", "calibrate", "compute_tau",
    "conformal_quantile", "derive_seed", "dgp_sample", "evaluate",
    "family_lambda", "family_mass", "family_set", "fit_quantile_regressor",
    "gmm_cdf", "gmm_condition", "gmm_density", "gmm_fit_em", "gmm_logdensity",
    "gmm_sample", "hpd_superlevel_intervals", "ingest_mixture_params",
    "interval_union_from_balls", "lambda_sup", "load_config", "load_csv",
    "make_cp", "make_cp2_hpd", "make_cp2_pcp", "make_cqr", "make_dgp",
    "make_pcp", "make_pi_yx", "marginal_coverage", "merge_intervals",
    "model_from_joint", "model_from_table", "oracle_model", "order_index",
    "perturb_model", "predict_set", "read_report", "render_table",
    "report_bytes", "run", "scaled_size", "split", "substream", "tau_domain",
    "theory_bounds", "validate_config", "whole_line", "worst_slab_coverage",
    "write_csv", "write_metrics_csv", "write_mixture_params", "write_report",
]
