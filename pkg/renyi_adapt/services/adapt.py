"""ADAPT driver and fixed-structure VQE baseline.

This module grows ansatze one pool operator at a time (select by largest pool gradient, append at
zero, re-optimize everything warm-started) and records every iteration in an ``AdaptTrace``.
"""

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from pydantic import Field, model_validator
from typing import Literal

from renyi_adapt.models.base import AdaptTermination, BaseRenyiModel, LossKind, OptimTermination
from renyi_adapt.simulation.ansatz import Ansatz, append, empty_ansatz
from renyi_adapt.simulation.linalg import reduced_from_statevector
from renyi_adapt.simulation.losses import (
    LossContext,
    build_loss_context,
    grad_infinity_norm,
    infidelity_to_target,
    loss_floor,
    loss_gradient,
    loss_value,
    pool_gradients,
)
from renyi_adapt.simulation.optim import OptimizerOptions, OptimResult, minimize
from renyi_adapt.simulation.pauli import OperatorPool, pool_klocal
from renyi_adapt.simulation.thermal import ProblemInstance
from renyi_adapt.utils.errors import ParameterError


STALL_REPEATS = 5
STALL_IMPROVEMENT = 1e-12


class AdaptConfig(BaseRenyiModel):
    """Settings of one ADAPT run."""

    pool: OperatorPool = Field(description="Candidate generators on the visible+hidden register")
    loss_kind: LossKind = Field(description="Loss driving selection and optimization")
    epsilon: float = Field(default=1e-3, gt=0.0, description="Stop once the pool ||g||_inf drops below this")
    max_params: int | None = Field(default=None, ge=1, description="Parameter cap; None means 2 x pool size")
    optimizer: OptimizerOptions = Field(default_factory=OptimizerOptions, description="Inner BFGS settings")
    loss_scale: float = Field(default=1.0, gt=0.0, description="Positive multiplier on the loss")

    @property
    def param_cap(self) -> int:
        return self.max_params if self.max_params is not None else 2 * len(self.pool)


class AdaptRecord(BaseRenyiModel):
    """State of the ansatz after one iteration; iteration 0 is the bare reference."""

    iteration: int = Field(ge=0, description="ADAPT iteration index")
    operator: str | None = Field(default=None, description="Label of the generator appended this iteration")
    pool_index: int | None = Field(default=None, ge=0, description="Pool index of that generator")
    n_params: int = Field(ge=0, description="Ansatz length after this iteration")
    pool_grad_inf_norm: float = Field(ge=0.0, description="Pool ||g||_inf at the optimized parameters")
    loss: float = Field(description="Optimized loss")
    loss_gap: float = Field(description="Loss minus the loss at its own target")
    infidelity: float = Field(description="1 - F^2 against the exact thermal state")
    cumulative_fevals: int = Field(ge=0, description="Objective evaluations so far")
    optimizer_termination: OptimTermination | None = Field(default=None, description="Inner BFGS outcome")
    loss_history: list[float] = Field(default_factory=list, description="Loss per objective evaluation")


class AdaptTrace(BaseRenyiModel):
    """Per-iteration history of one ADAPT or VQE run."""

    method: Literal["adapt", "vqe"] = Field(description="How the ansatz was built")
    loss_kind: LossKind
    epsilon: float = Field(gt=0.0)
    loss_floor: float = Field(description="Loss at the loss's own target")
    records: list[AdaptRecord] = Field(description="One record per iteration")
    final_ansatz: Ansatz
    termination: AdaptTermination | None = Field(default=None, description="ADAPT stopping reason; None for VQE")

    @model_validator(mode="after")
    def validate_records(self) -> "AdaptTrace":
        """Non-empty, and Converged exactly when the final gradient is under epsilon."""
        if not self.records:
            raise ValueError("A trace needs at least one record")
        if self.method == "adapt" and self.termination is not None:
            below = self.records[-1].pool_grad_inf_norm < self.epsilon
            if below != (self.termination == AdaptTermination.CONVERGED):
                raise ValueError(f"Termination {self.termination} contradicts final ||g||_inf")
        return self

    @property
    def final(self) -> AdaptRecord:
        return self.records[-1]

    @property
    def n_params(self) -> int:
        return self.final_ansatz.n_params

    @property
    def converged(self) -> bool:
        return self.termination == AdaptTermination.CONVERGED

    def curve(self) -> list[tuple[int, float, float, int]]:
        """(evaluation, loss, loss gap, iteration) for every objective evaluation."""
        points = []
        evaluation = 0
        for record in self.records:
            history = record.loss_history or ([record.loss] if record.iteration == 0 else [])
            for value in history:
                points.append((evaluation, value, value - self.loss_floor, record.iteration))
                evaluation += 1
        return points


class AnsatzObjective:
    """Loss and gradient over the parameters of a fixed circuit structure."""

    def __init__(self, ctx: LossContext, ansatz: Ansatz):
        self.ctx = ctx
        self.ansatz = ansatz

    def value(self, theta: NDArray[np.float64]) -> float:
        psi = self.ansatz.amplitudes(theta)
        return loss_value(self.ctx, reduced_from_statevector(psi, self.ansatz.n_visible, self.ansatz.n_hidden))

    def gradient(self, theta: NDArray[np.float64]) -> NDArray[np.float64]:
        return loss_gradient(self.ctx, self.ansatz.with_params(theta))


def _check_dimensions(instance: ProblemInstance, pool: OperatorPool) -> None:
    if pool.n_qubits != instance.n_total:
        raise ParameterError(f"Pool acts on {pool.n_qubits} qubits, instance on {instance.n_total}")


def _record(
    ctx: LossContext,
    ansatz: Ansatz,
    pool: OperatorPool,
    iteration: int,
    cumulative_fevals: int,
    pool_index: int | None = None,
    result: OptimResult | None = None,
) -> tuple[AdaptRecord, NDArray[np.float64]]:
    grads = pool_gradients(ctx, ansatz, pool)
    sigma = reduced_from_statevector(ansatz.amplitudes(), ansatz.n_visible, ansatz.n_hidden)
    loss = loss_value(ctx, sigma)
    record = AdaptRecord(
        iteration=iteration,
        operator=pool[pool_index].label if pool_index is not None else None,
        pool_index=pool_index,
        n_params=ansatz.n_params,
        pool_grad_inf_norm=grad_infinity_norm(grads),
        loss=loss,
        loss_gap=loss - loss_floor(ctx),
        infidelity=infidelity_to_target(ctx, sigma),
        cumulative_fevals=cumulative_fevals,
        optimizer_termination=result.termination if result is not None else None,
        loss_history=list(result.f_history) if result is not None else [],
    )
    return record, grads


def adapt_run(instance: ProblemInstance, cfg: AdaptConfig, ctx: LossContext | None = None) -> AdaptTrace:
    """Grow an ansatz until the pool gradient falls below epsilon.

    Args:
        instance: Problem instance supplying targets and reference.
        cfg: Pool, loss and stopping settings.
        ctx: Prebuilt loss context; built from ``instance`` when omitted.

    Returns:
        AdaptTrace: Record 0 for the reference plus one record per appended operator.
    """
    _check_dimensions(instance, cfg.pool)
    ctx = ctx or build_loss_context(cfg.loss_kind, instance, scale=cfg.loss_scale)
    ansatz = empty_ansatz(instance.reference.state, instance.n_visible)
    cap = cfg.param_cap

    record, grads = _record(ctx, ansatz, cfg.pool, iteration=0, cumulative_fevals=0)
    records = [record]
    cumulative_fevals = 0
    last_index: int | None = None
    streak = 0

    while True:
        g_inf = records[-1].pool_grad_inf_norm
        if g_inf < cfg.epsilon:
            termination = AdaptTermination.CONVERGED
            break
        if ansatz.n_params >= cap:
            termination = AdaptTermination.MAX_PARAMS
            break
        if streak >= STALL_REPEATS:
            termination = AdaptTermination.STALLED
            break

        # np.argmax returns the first maximum, so ties go to the lowest pool index
        index = int(np.argmax(np.abs(grads)))
        ansatz = append(ansatz, cfg.pool[index], 0.0)
        objective = AnsatzObjective(ctx, ansatz)
        result = minimize(objective.value, objective.gradient, ansatz.theta, cfg.optimizer)
        ansatz = ansatz.with_params(result.x_final)
        cumulative_fevals += result.f_evals

        previous_loss = records[-1].loss
        record, grads = _record(
            ctx, ansatz, cfg.pool, len(records), cumulative_fevals, pool_index=index, result=result
        )
        records.append(record)
        logger.debug(
            f"[{cfg.loss_kind}] iter {record.iteration}: +{record.operator} loss={record.loss:.10e} "
            f"|g|_inf={record.pool_grad_inf_norm:.3e} ({result.termination})"
        )

        if previous_loss - record.loss < STALL_IMPROVEMENT:
            streak = streak + 1 if index == last_index else 1
        else:
            streak = 0
        last_index = index

    logger.info(
        f"ADAPT [{cfg.loss_kind}] finished: {termination} with {ansatz.n_params} parameters, "
        f"infidelity {records[-1].infidelity:.3e}"
    )
    return AdaptTrace(
        method="adapt",
        loss_kind=cfg.loss_kind,
        epsilon=cfg.epsilon,
        loss_floor=loss_floor(ctx),
        records=records,
        final_ansatz=ansatz,
        termination=termination,
    )


def vqe_run(
    instance: ProblemInstance,
    loss_kind: LossKind,
    pool: OperatorPool | None = None,
    opts: OptimizerOptions | None = None,
    epsilon: float = 1e-3,
) -> AdaptTrace:
    """Optimize one fixed ansatz holding every pool element once, in pool order, from theta = 0."""
    pool = pool or pool_klocal(instance.n_total, 2)
    _check_dimensions(instance, pool)
    ctx = build_loss_context(loss_kind, instance)
    ansatz = empty_ansatz(instance.reference.state, instance.n_visible)
    for generator in pool:
        ansatz = append(ansatz, generator, 0.0)

    objective = AnsatzObjective(ctx, ansatz)
    result = minimize(objective.value, objective.gradient, ansatz.theta, opts)
    ansatz = ansatz.with_params(result.x_final)
    record, _ = _record(ctx, ansatz, pool, iteration=1, cumulative_fevals=result.f_evals, result=result)

    logger.info(f"VQE [{loss_kind}] finished: {result.termination} with {ansatz.n_params} parameters")
    return AdaptTrace(
        method="vqe",
        loss_kind=loss_kind,
        epsilon=epsilon,
        loss_floor=loss_floor(ctx),
        records=[record],
        final_ansatz=ansatz,
    )
