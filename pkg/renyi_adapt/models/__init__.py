"""Models package for renyi-adapt.

This package provides the enums, configuration and result records shared by the simulation core,
the services and the CLI.
"""

# Base models
from .base import (
    AdaptTermination,
    BaseRenyiModel,
    ExperimentKind,
    FrozenRenyiModel,
    LossKind,
    OptimTermination,
    PauliAxis,
)

# Configuration models
from .config import ExperimentSpec, RunDefaults

# Result models
from .results import DecayFit, ExperimentOutcome

__all__ = [
    "AdaptTermination",
    "BaseRenyiModel",
    "ExperimentKind",
    "FrozenRenyiModel",
    "LossKind",
    "OptimTermination",
    "PauliAxis",
    "ExperimentSpec",
    "RunDefaults",
    "DecayFit",
    "ExperimentOutcome",
]
