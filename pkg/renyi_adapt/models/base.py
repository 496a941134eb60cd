"""Base models for renyi-adapt.

This module defines the base class and the enums shared by the simulation core, the ADAPT
driver and the experiment harness.
"""

from enum import StrEnum
from pydantic import BaseModel, ConfigDict


class PauliAxis(StrEnum):
    """Single-qubit Pauli axis. Declaration order is the canonical axis order."""

    X = "X"
    Y = "Y"
    Z = "Z"


class LossKind(StrEnum):
    """Loss function driving an ADAPT or VQE run.

    - OVERLAP: 1 - F(rho, sigma)^2 against the exact thermal target
    - GIBBS: -Tr(rho_G sigma) + Tr(sigma^2)/2 against the Taylor-truncated target
    - RENYI: log Tr(sigma^2 rho^-1), the maximal Renyi-2 divergence against the exact target
    """

    OVERLAP = "overlap"
    GIBBS = "gibbs"
    RENYI = "renyi"


class OptimTermination(StrEnum):
    """Why the inner BFGS minimizer stopped."""

    GRAD_TOL = "GradTol"
    MAX_ITER = "MaxIter"
    LINE_SEARCH_FAIL = "LineSearchFail"


class AdaptTermination(StrEnum):
    """Why an ADAPT run stopped."""

    CONVERGED = "Converged"
    MAX_PARAMS = "MaxParams"
    STALLED = "Stalled"


class ExperimentKind(StrEnum):
    """Experiments the harness can run."""

    LOSS_CURVES = "loss-curves"
    SIZE_SCAN = "size-scan"
    GRAD_SCAN = "grad-scan"
    FIDELITY_SCAN = "fidelity-scan"
    COMPLETION = "completion"


class BaseRenyiModel(BaseModel):
    """Base model with common configuration for all renyi-adapt records.

    Provides strict validation and consistent behavior across all models.
    Numerical containers carry numpy arrays, hence ``arbitrary_types_allowed``.
    """

    model_config = ConfigDict(
        extra="forbid",  # Forbid extra attributes so typos in config files fail loudly
        validate_default=True,  # Validate default values
        str_strip_whitespace=True,  # Strip whitespace from string values
        arbitrary_types_allowed=True,  # Allow numpy arrays
    )


class FrozenRenyiModel(BaseRenyiModel):
    """Immutable value type; instances are hashable and safe to share across workers."""

    model_config = ConfigDict(frozen=True)
