"""Configuration models for renyi-adapt.

``RunDefaults`` is what the config file stores; ``ExperimentSpec`` is one fully resolved
experiment request (config defaults overlaid with command-line flags).
"""

from .base import BaseRenyiModel, ExperimentKind, LossKind
from pathlib import Path
from pydantic import Field, field_validator, model_validator


MIN_N = 1
MAX_N = 6
# full ADAPT runs at or above this n need --expensive
EXPENSIVE_ADAPT_N = 4
# pool-gradient scans at or above this n need --expensive
EXPENSIVE_SCAN_N = 6

ADAPT_EXPERIMENTS = (ExperimentKind.LOSS_CURVES, ExperimentKind.SIZE_SCAN, ExperimentKind.COMPLETION)
DEFAULT_LOSSES = [LossKind.OVERLAP, LossKind.GIBBS, LossKind.RENYI]


class RunDefaults(BaseRenyiModel):
    """Defaults applied to every experiment unless a flag overrides them."""

    beta: float = Field(default=1.0, ge=0.0, description="Inverse temperature of the thermal targets")
    epsilon: float = Field(default=1e-3, gt=0.0, description="ADAPT stopping threshold on the pool ||g||_inf")
    base_seed: int = Field(default=0, ge=0, description="Base seed; trial t uses base_seed + t")
    trials: int = Field(default=20, ge=1, description="Trials per (loss, n) cell")
    threads: int = Field(default=1, ge=1, description="Worker processes for trial-level parallelism")
    output_dir: Path = Field(default=Path("results"), description="Directory receiving CSV and plot files")
    taylor_order: int = Field(default=5, ge=0, description="Taylor order of the gibbs-loss target")
    g_tol: float = Field(default=1e-8, gt=0.0, description="Inner BFGS gradient tolerance (inf-norm)")
    max_iter: int = Field(default=1000, ge=1, description="Inner BFGS iteration cap")
    plots: bool = Field(default=False, description="Write SVG plots next to the CSV files")
    failure_thresholds: list[float] = Field(
        default_factory=lambda: [1e-5, 1e-3], description="Gradient resolutions used to predict failure sizes"
    )

    @field_validator("failure_thresholds")
    @classmethod
    def validate_thresholds(cls, thresholds: list[float]) -> list[float]:
        """Thresholds must be positive."""
        if not thresholds or any(t <= 0 for t in thresholds):
            raise ValueError(f"Failure thresholds must be a non-empty list of positive numbers, got {thresholds}")
        return thresholds


class ExperimentSpec(BaseRenyiModel):
    """One resolved experiment request."""

    experiment: ExperimentKind = Field(description="Experiment to run")
    n_range: list[int] = Field(description="Values of n = n_V = n_H")
    trials: int = Field(default=20, ge=1, description="Trials per (loss, n) cell")
    base_seed: int = Field(default=0, ge=0, description="Base seed")
    beta: float = Field(default=1.0, ge=0.0, description="Inverse temperature")
    losses: list[LossKind] = Field(default_factory=lambda: list(DEFAULT_LOSSES), description="Losses to run")
    epsilon: float = Field(default=1e-3, gt=0.0, description="ADAPT pool-gradient threshold")
    max_params: int | None = Field(default=None, ge=1, description="Parameter cap; None means 2 x pool size")
    output_dir: Path = Field(default=Path("results"), description="Output directory")
    threads: int = Field(default=1, ge=1, description="Worker processes")
    expensive: bool = Field(default=False, description="Allow the expensive cells")
    plots: bool = Field(default=False, description="Write SVG plots")
    taylor_order: int = Field(default=5, ge=0, description="Taylor order of the gibbs-loss target")
    g_tol: float = Field(default=1e-8, gt=0.0, description="Inner BFGS gradient tolerance")
    max_iter: int = Field(default=1000, ge=1, description="Inner BFGS iteration cap")
    failure_thresholds: list[float] = Field(default_factory=lambda: [1e-5, 1e-3])
    instance_path: Path | None = Field(default=None, description="Saved instance to run instead of a seeded one")

    @field_validator("n_range")
    @classmethod
    def validate_n_range(cls, n_range: list[int]) -> list[int]:
        """Every n must lie in [1, 6]; duplicates are dropped, order kept."""
        if not n_range:
            raise ValueError("n_range must not be empty")
        for n in n_range:
            if not MIN_N <= n <= MAX_N:
                raise ValueError(f"n={n} is outside [{MIN_N}, {MAX_N}]")
        return list(dict.fromkeys(n_range))

    @field_validator("losses")
    @classmethod
    def validate_losses(cls, losses: list[LossKind]) -> list[LossKind]:
        """At least one loss; duplicates are dropped, order kept."""
        if not losses:
            raise ValueError("At least one loss must be selected")
        return list(dict.fromkeys(losses))

    @model_validator(mode="after")
    def validate_cost_gate(self) -> "ExperimentSpec":
        """Large cells only run with ``expensive``."""
        if self.expensive:
            return self
        limit = EXPENSIVE_ADAPT_N if self.experiment in ADAPT_EXPERIMENTS else EXPENSIVE_SCAN_N
        too_big = [n for n in self.n_range if n >= limit]
        if too_big:
            raise ValueError(f"{self.experiment} at n={too_big} is expensive; pass --expensive to run it")
        return self

    @classmethod
    def from_defaults(cls, experiment: ExperimentKind, defaults: RunDefaults, **overrides) -> "ExperimentSpec":
        """Overlay non-None overrides on the configured defaults."""
        values = {
            "experiment": experiment,
            "trials": defaults.trials,
            "base_seed": defaults.base_seed,
            "beta": defaults.beta,
            "epsilon": defaults.epsilon,
            "output_dir": defaults.output_dir,
            "threads": defaults.threads,
            "plots": defaults.plots,
            "taylor_order": defaults.taylor_order,
            "g_tol": defaults.g_tol,
            "max_iter": defaults.max_iter,
            "failure_thresholds": defaults.failure_thresholds,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)
