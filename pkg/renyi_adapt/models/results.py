"""Result models for renyi-adapt.

This module defines the records the harness hands back to the command layer.
"""

from .base import BaseRenyiModel, ExperimentKind, LossKind
from datetime import datetime
from pathlib import Path
from pydantic import Field, model_validator


class DecayFit(BaseRenyiModel):
    """Least-squares fit of ||g||_inf = a * b^(-n)."""

    loss_kind: LossKind | None = Field(default=None, description="Loss the medians came from")
    a: float = Field(gt=0.0, description="Prefactor")
    b: float = Field(gt=0.0, description="Decay base; > 1 for decaying gradients")
    residual: float = Field(ge=0.0, description="Sum of squared residuals in ln g")
    n_points: int = Field(ge=0, description="Number of (n, g) points fitted")
    threshold: float = Field(default=1e-5, gt=0.0, description="Gradient resolution for the failure prediction")
    predicted_failure_n: int | None = Field(
        default=None, description="Nearest integer n where a * b^(-n) reaches threshold; None when the fit does not decay"
    )

    @property
    def decaying(self) -> bool:
        return self.b > 1.0

    def predict(self, n: float) -> float:
        """Fitted gradient magnitude at size n."""
        return self.a * self.b ** (-n)


class ExperimentOutcome(BaseRenyiModel):
    """What an experiment produced."""

    experiment: ExperimentKind
    files: list[Path] = Field(default_factory=list, description="Files written, in write order")
    rows: int = Field(default=0, ge=0, description="Data rows written across all CSV files")
    failures: list[str] = Field(default_factory=list, description="One message per failed trial")
    summary: list[dict[str, object]] = Field(default_factory=list, description="Rows of the console summary table")
    fits: list[DecayFit] = Field(default_factory=list, description="Decay fits, grad scan only")
    started_at: datetime = Field(default_factory=datetime.now)
    finished_at: datetime | None = Field(default=None)

    @model_validator(mode="after")
    def validate_times(self) -> "ExperimentOutcome":
        """A finished run cannot end before it started."""
        if self.finished_at is not None and self.finished_at < self.started_at:
            raise ValueError("finished_at precedes started_at")
        return self

    @property
    def partial_failure(self) -> bool:
        return bool(self.failures)
