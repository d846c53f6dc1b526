"""Conditional models: mixture numerics, EM fitting, conditioning,
per-row ingestion, and conditional quantile estimators."""

from .conditional import (ConditionalModel, model_from_joint,
                          model_from_table, oracle_model, perturb_model)
from .gmm import (GmmFit, JointGmmModel, gmm_cdf, gmm_condition, gmm_density,
                  gmm_fit_em, gmm_logdensity, gmm_sample)
from .ingest import ingest_mixture_params, write_mixture_params
from .quantile import QuantileRegressor, fit_quantile_regressor

__all__ = [
    "ConditionalModel", "model_from_joint", "model_from_table",
    "oracle_model", "perturb_model",
    "GmmFit", "JointGmmModel", "gmm_cdf", "gmm_condition", "gmm_density",
    "gmm_fit_em", "gmm_logdensity", "gmm_sample",
    "ingest_mixture_params", "write_mixture_params",
    "QuantileRegressor", "fit_quantile_regressor",
]
