"""Conditional model wrappers.

A :class:`ConditionalModel` is a capability record for the estimated (or
exact) conditional law of the response.  A model is *explicit* when it can
evaluate densities and *implicit* when it can draw samples; mixture-backed
models are both.  Per-row external mixtures (the ingestion route) are
looked up by the point id carried on datasets, so every accessor takes an
optional ``point_id``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core.mixture import GaussianMixture
from ..errors import CapabilityError, DomainError, ValidationError
from .gmm import JointGmmModel, gmm_density, gmm_sample


@dataclass(frozen=True)
class ConditionalModel:
    """Conditional law of y given x, exposed through capabilities.

    Exactly one of ``mixture_fn`` / ``mixture_table`` / ``sampler_fn``
    must be provided; mixture-backed models derive density and sampler
    automatically, a bare sampler yields an implicit-only model.
    """

    mixture_fn: callable = None
    mixture_table: dict = None
    sampler_fn: callable = None

    def __post_init__(self):
        given = sum(v is not None for v in
                    (self.mixture_fn, self.mixture_table, self.sampler_fn))
        if given != 1:
            raise ValidationError("provide exactly one of mixture_fn, "
                                  "mixture_table, sampler_fn")

    @property
    def explicit(self) -> bool:
        """True when densities (and conditional mixtures) are available."""
        return self.sampler_fn is None

    @property
    def implicit(self) -> bool:
        """True when sampling is available (always, here)."""
        return True

    def mixture_at(self, x, point_id: int = None) -> GaussianMixture:
        if self.mixture_fn is not None:
            return self.mixture_fn(np.asarray(x, dtype=float).reshape(-1))
        if self.mixture_table is not None:
            if point_id is None:
                raise DomainError("per-row model needs a point id")
            try:
                return self.mixture_table[int(point_id)]
            except KeyError:
                raise ValidationError(f"no mixture for row id {point_id}") from None
        raise CapabilityError("model is sampler-only; no conditional mixture")

    def density(self, x, y, point_id: int = None):
        return gmm_density(self.mixture_at(x, point_id), y)

    def sample(self, x, n: int, rng: np.random.Generator,
               point_id: int = None) -> np.ndarray:
        if self.sampler_fn is not None:
            return np.asarray(self.sampler_fn(
                np.asarray(x, dtype=float).reshape(-1), n, rng), dtype=float)
        return gmm_sample(self.mixture_at(x, point_id), n, rng)

    def mean(self, x, point_id: int = None) -> np.ndarray:
        """Conditional mean; shape (p,)."""
        m = self.mixture_at(x, point_id)
        return m.weights @ m.means


def oracle_model(dgp) -> ConditionalModel:
    """Exact conditional model of a generator with an analytic conditional."""
    return ConditionalModel(mixture_fn=dgp.conditional)


def model_from_joint(fit: JointGmmModel) -> ConditionalModel:
    """Conditional model backed by a fitted joint mixture."""
    return ConditionalModel(mixture_fn=fit.condition)


def model_from_table(table: dict) -> ConditionalModel:
    """Per-row conditional model from ingested mixtures keyed by row id."""
    if not table:
        raise ValidationError("mixture table is empty")
    return ConditionalModel(mixture_table=dict(table))


def perturb_model(model: ConditionalModel, shift) -> ConditionalModel:
    """The same model with every response mean translated by ``shift``.

    Used to study coverage degradation under a controlled model error.
    Requires an explicit model.
    """
    if not model.explicit:
        raise CapabilityError("perturbation needs an explicit model")
    shift = np.asarray(shift, dtype=float).reshape(-1)

    if model.mixture_table is not None:
        shifted = {i: GaussianMixture(m.weights, m.means + shift[None, :],
                                      m.variances)
                   for i, m in model.mixture_table.items()}
        return ConditionalModel(mixture_table=shifted)

    def shifted_fn(x):
        m = model.mixture_fn(x)
        return GaussianMixture(m.weights, m.means + shift[None, :], m.variances)

    return ConditionalModel(mixture_fn=shifted_fn)
