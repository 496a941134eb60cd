"""Experiment harness: the five experiments over seeded random instances.

Each experiment fans trials out to worker processes (``threads`` > 1) or runs them inline, then
merges the results in submission order, i.e. ordered by (loss, n, trial), so the CSV bodies do not
depend on scheduling. A failing trial is logged and reported but never stops the others.
"""

import numpy as np
from collections import defaultdict
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from loguru import logger
from pathlib import Path
from pydantic import Field
from scipy.stats import spearmanr
from typing import Any, Generic, TypeVar

from renyi_adapt.models.base import BaseRenyiModel, ExperimentKind, LossKind
from renyi_adapt.models.config import ExperimentSpec
from renyi_adapt.models.results import DecayFit, ExperimentOutcome
from renyi_adapt.services import plotting
from renyi_adapt.services.adapt import AdaptConfig, AdaptTrace, adapt_run, vqe_run
from renyi_adapt.services.fitting import fit_decay, medians_by_n
from renyi_adapt.services.storage import load_instance, write_csv, write_curve, write_trace
from renyi_adapt.simulation.ansatz import empty_ansatz
from renyi_adapt.simulation.losses import build_loss_context, grad_infinity_norm, pool_gradients
from renyi_adapt.simulation.optim import OptimizerOptions
from renyi_adapt.simulation.pauli import pool_klocal
from renyi_adapt.simulation.states import fidelity
from renyi_adapt.simulation.thermal import ProblemInstance, build_instance


T = TypeVar("T")

SIZE_SCAN_COLUMNS = ["loss", "n", "params", "worst_infidelity", "trials"]
GRAD_SCAN_COLUMNS = ["loss", "n", "trial", "g_inf"]
MEDIAN_COLUMNS = ["loss", "n", "trials", "median_g_inf", "min_g_inf", "max_g_inf"]
FIT_COLUMNS = ["loss", "a", "b", "residual", "points", "threshold", "predicted_failure_n"]
FIDELITY_SCAN_COLUMNS = ["loss", "n", "trial", "fidelity", "g_inf"]
FIDELITY_SUMMARY_COLUMNS = ["loss", "n", "trials", "spearman_rho", "max_min_ratio"]
COMPLETION_COLUMNS = ["loss", "n", "trial", "params", "completion_fraction", "g_inf", "termination"]
LOSS_CURVE_SUMMARY_COLUMNS = [
    "loss",
    "method",
    "n",
    "params",
    "final_loss",
    "loss_gap",
    "infidelity",
    "pool_grad_inf_norm",
    "fevals",
    "termination",
]


class TrialTask(BaseRenyiModel):
    """One unit of work shipped to a worker."""

    spec: ExperimentSpec
    n: int = Field(ge=1)
    trial: int = Field(ge=0)
    loss: LossKind | None = Field(default=None, description="Loss for ADAPT tasks; None for initial-gradient samples")
    method: str = Field(default="adapt", description="adapt or vqe")


class TaskResult(BaseRenyiModel, Generic[T]):
    """Value or error message of one task."""

    task: TrialTask
    value: T | None = None
    error: str | None = None


class InitialGradients(BaseRenyiModel):
    """Initial pool gradient per loss plus the reference-target fidelity of one instance."""

    g_inf: dict[LossKind, float]
    fidelity: float


def _instance_for(task: TrialTask) -> ProblemInstance:
    spec = task.spec
    if spec.instance_path is not None:
        return load_instance(spec.instance_path)
    return build_instance(task.n, spec.beta, spec.base_seed, task.trial, spec.taylor_order)


def _optimizer_options(spec: ExperimentSpec) -> OptimizerOptions:
    return OptimizerOptions(g_tol=spec.g_tol, max_iter=spec.max_iter)


def adapt_task(task: TrialTask) -> AdaptTrace:
    """Run ADAPT (or the VQE baseline) for one (loss, n, trial)."""
    assert task.loss is not None
    instance = _instance_for(task)
    pool = pool_klocal(instance.n_total, 2)
    if task.method == "vqe":
        return vqe_run(instance, task.loss, pool, _optimizer_options(task.spec), epsilon=task.spec.epsilon)
    cfg = AdaptConfig(
        pool=pool,
        loss_kind=task.loss,
        epsilon=task.spec.epsilon,
        max_params=task.spec.max_params,
        optimizer=_optimizer_options(task.spec),
    )
    return adapt_run(instance, cfg)


def gradient_task(task: TrialTask) -> InitialGradients:
    """Pool gradients at the bare reference for every selected loss, no optimization."""
    instance = _instance_for(task)
    pool = pool_klocal(instance.n_total, 2)
    ansatz = empty_ansatz(instance.reference.state, instance.n_visible)
    g_inf = {}
    for loss in task.spec.losses:
        ctx = build_loss_context(loss, instance)
        g_inf[loss] = grad_infinity_norm(pool_gradients(ctx, ansatz, pool))
    sigma0 = instance.reference.state.reduced(instance.n_visible)
    return InitialGradients(g_inf=g_inf, fidelity=fidelity(instance.target_exact, sigma0))


def _run_safely(fn: Callable[[TrialTask], T], task: TrialTask) -> TaskResult[T]:
    try:
        return TaskResult(task=task, value=fn(task))
    except Exception as e:
        message = f"{task.loss or 'gradient'} {task.method} n={task.n} trial={task.trial}: {type(e).__name__}: {e}"
        logger.error(f"Trial failed: {message}")
        return TaskResult(task=task, error=message)


class ExperimentRunner:
    """Runs one ExperimentSpec and writes its files."""

    def __init__(self, spec: ExperimentSpec):
        """Initialize the runner.

        Args:
            spec: Fully resolved experiment request.
        """
        self.spec = spec
        self.output_dir = Path(spec.output_dir) / spec.experiment.value
        self.outcome = ExperimentOutcome(experiment=spec.experiment)

    def run(self) -> ExperimentOutcome:
        """Dispatch on the experiment kind and return what was produced."""
        logger.info(
            f"Running {self.spec.experiment} for n={self.spec.n_range}, losses={[str(x) for x in self.spec.losses]}, "
            f"trials={self.spec.trials}, threads={self.spec.threads}"
        )
        dispatch: dict[ExperimentKind, Callable[[], None]] = {
            ExperimentKind.LOSS_CURVES: self.run_loss_curves,
            ExperimentKind.SIZE_SCAN: self.run_size_scan,
            ExperimentKind.GRAD_SCAN: self.run_grad_scan,
            ExperimentKind.FIDELITY_SCAN: self.run_fidelity_scan,
            ExperimentKind.COMPLETION: self.run_completion,
        }
        dispatch[self.spec.experiment]()
        self.outcome.finished_at = datetime.now()
        if self.outcome.failures:
            logger.warning(f"{len(self.outcome.failures)} trial(s) failed")
        else:
            logger.success(f"{self.spec.experiment} finished: {self.outcome.rows} rows in {len(self.outcome.files)} files")
        return self.outcome

    def _map(self, fn: Callable[[TrialTask], T], tasks: Sequence[TrialTask]) -> list[TaskResult[T]]:
        """Run tasks inline or in a process pool; results come back in submission order."""
        if self.spec.threads <= 1 or len(tasks) <= 1:
            results = [_run_safely(fn, task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=self.spec.threads) as executor:
                futures = [executor.submit(_run_safely, fn, task) for task in tasks]
                results = [future.result() for future in futures]
        self.outcome.failures.extend(r.error for r in results if r.error is not None)
        return results

    def _write(self, name: str, columns: list[str], rows: Sequence[dict[str, Any]]) -> Path:
        path = self.output_dir / name
        self.outcome.rows += write_csv(path, columns, rows)
        self.outcome.files.append(path)
        logger.info(f"Wrote {path}")
        return path

    def _plot(self, plot: Callable[..., Path], *args: Any) -> None:
        if not self.spec.plots:
            return
        try:
            self.outcome.files.append(plot(*args))
        except Exception as e:
            logger.warning(f"Plot {plot.__name__} failed: {e}")

    def _tasks(self, losses: Sequence[LossKind | None], method: str = "adapt") -> list[TrialTask]:
        return [
            TrialTask(spec=self.spec, n=n, trial=trial, loss=loss, method=method)
            for loss in losses
            for n in self.spec.n_range
            for trial in range(self.spec.trials)
        ]

    def run_loss_curves(self) -> None:
        """ADAPT and VQE on one instance per n, per loss: traces, curves and a parameter-count summary."""
        tasks = [
            TrialTask(spec=self.spec, n=n, trial=0, loss=loss, method=method)
            for n in self.spec.n_range
            for loss in self.spec.losses
            for method in ("adapt", "vqe")
        ]
        summary: list[dict[str, Any]] = []
        curves: dict[tuple[str, str], list[tuple[int, float, float, int]]] = {}
        for result in self._map(adapt_task, tasks):
            task, trace = result.task, result.value
            if trace is None:
                continue
            stem = f"n{task.n}/{task.loss}_{task.method}"
            path = self.output_dir / f"{stem}_trace.csv"
            self.outcome.rows += write_trace(trace, path)
            self.outcome.files.append(path)
            curve_path = self.output_dir / f"{stem}_curve.csv"
            self.outcome.rows += write_curve(trace, curve_path)
            self.outcome.files.append(curve_path)
            curves[(str(task.loss), task.method)] = trace.curve()
            final = trace.final
            summary.append(
                {
                    "loss": task.loss,
                    "method": task.method,
                    "n": task.n,
                    "params": trace.n_params,
                    "final_loss": final.loss,
                    "loss_gap": final.loss_gap,
                    "infidelity": final.infidelity,
                    "pool_grad_inf_norm": final.pool_grad_inf_norm,
                    "fevals": final.cumulative_fevals,
                    "termination": trace.termination or final.optimizer_termination,
                }
            )
        self._write("loss_curves_summary.csv", LOSS_CURVE_SUMMARY_COLUMNS, summary)
        self.outcome.summary = summary
        self._plot(plotting.plot_loss_curves, curves, self.output_dir / "loss_curves.svg")

    def run_size_scan(self) -> None:
        """Worst-case infidelity over trials after each parameter count."""
        results = self._map(adapt_task, self._tasks(self.spec.losses))
        by_cell: dict[tuple[LossKind, int], list[AdaptTrace]] = defaultdict(list)
        for result in results:
            if result.value is not None and result.task.loss is not None:
                by_cell[(result.task.loss, result.task.n)].append(result.value)

        rows: list[dict[str, Any]] = []
        for loss in self.spec.losses:
            for n in self.spec.n_range:
                rows.extend(size_scan_rows(loss, n, by_cell.get((loss, n), [])))
        self._write("size_scan.csv", SIZE_SCAN_COLUMNS, rows)
        self.outcome.summary = [
            {"loss": r["loss"], "n": r["n"], "params": r["params"], "worst_infidelity": r["worst_infidelity"]}
            for r in _last_per_cell(rows)
        ]
        self._plot(plotting.plot_size_scan, rows, self.output_dir / "size_scan.svg")

    def _initial_gradients(self) -> list[tuple[TrialTask, InitialGradients]]:
        results = self._map(gradient_task, self._tasks([None]))
        return [(r.task, r.value) for r in results if r.value is not None]

    def run_grad_scan(self) -> None:
        """Initial pool ||g||_inf per (loss, n, trial), medians, and decay fits of the medians."""
        samples = self._initial_gradients()
        rows = [
            {"loss": loss, "n": task.n, "trial": task.trial, "g_inf": sample.g_inf[loss]}
            for loss in self.spec.losses
            for task, sample in samples
        ]
        self._write("grad_scan.csv", GRAD_SCAN_COLUMNS, rows)

        median_rows: list[dict[str, Any]] = []
        fit_rows: list[dict[str, Any]] = []
        for loss in self.spec.losses:
            medians = medians_by_n((row["n"], row["g_inf"]) for row in rows if row["loss"] == loss)
            median_rows.extend(
                {"loss": loss, "n": n, "trials": count, "median_g_inf": med, "min_g_inf": lo, "max_g_inf": hi}
                for n, med, count, lo, hi in medians
            )
            for fit in self._fit(loss, [(n, med) for n, med, *_ in medians]):
                self.outcome.fits.append(fit)
                fit_rows.append(fit_row(fit))
        self._write("grad_scan_medians.csv", MEDIAN_COLUMNS, median_rows)
        self._write("grad_scan_fits.csv", FIT_COLUMNS, fit_rows)
        self.outcome.summary = fit_rows
        self._plot(plotting.plot_grad_scan, rows, self.outcome.fits, self.output_dir / "grad_scan.svg")

    def _fit(self, loss: LossKind, medians: list[tuple[int, float]]) -> list[DecayFit]:
        if len(medians) < 3:
            logger.warning(f"Skipping {loss} decay fit: {len(medians)} sizes, need at least 3")
            return []
        if any(g <= 0 for _, g in medians):
            logger.warning(f"Skipping {loss} decay fit: a median gradient is zero")
            return []
        return [fit_decay(medians, threshold, loss) for threshold in self.spec.failure_thresholds]

    def run_fidelity_scan(self) -> None:
        """Initial pool ||g||_inf against F(rho, sigma_0), with rank correlations per loss."""
        samples = self._initial_gradients()
        rows = [
            {"loss": loss, "n": task.n, "trial": task.trial, "fidelity": sample.fidelity, "g_inf": sample.g_inf[loss]}
            for loss in self.spec.losses
            for task, sample in samples
        ]
        self._write("fidelity_scan.csv", FIDELITY_SCAN_COLUMNS, rows)
        summary = fidelity_summary(rows, self.spec.losses, self.spec.n_range)
        self._write("fidelity_scan_summary.csv", FIDELITY_SUMMARY_COLUMNS, summary)
        self.outcome.summary = summary
        self._plot(plotting.plot_fidelity_scan, rows, self.output_dir / "fidelity_scan.svg")

    def run_completion(self) -> None:
        """Pool ||g||_inf against the fraction of the final ansatz length reached."""
        results = self._map(adapt_task, self._tasks(self.spec.losses))
        rows: list[dict[str, Any]] = []
        converged: dict[LossKind, int] = defaultdict(int)
        for result in results:
            if result.value is None or result.task.loss is None:
                continue
            rows.extend(completion_rows(result.task.loss, result.task.n, result.task.trial, result.value))
            converged[result.task.loss] += int(result.value.converged)
        self._write("completion.csv", COMPLETION_COLUMNS, rows)
        self.outcome.summary = [
            {"loss": loss, "runs": sum(1 for r in results if r.task.loss == loss), "converged": converged[loss]}
            for loss in self.spec.losses
        ]
        self._plot(plotting.plot_completion, rows, self.output_dir / "completion.svg")


def size_scan_rows(loss: LossKind, n: int, traces: Sequence[AdaptTrace]) -> list[dict[str, Any]]:
    """Worst-case running-best infidelity per parameter count for one (loss, n) cell.

    A trial's value at p parameters is the lowest infidelity it reached with at most p parameters,
    so a trial that stopped early keeps contributing its final value.
    """
    if not traces:
        return []
    max_params = max(trace.n_params for trace in traces)
    curves = []
    for trace in traces:
        best = np.full(max_params + 1, np.inf)
        for record in trace.records:
            best[record.n_params] = min(best[record.n_params], record.infidelity)
        curves.append(np.minimum.accumulate(best))
    worst = np.max(np.vstack(curves), axis=0)
    return [
        {"loss": loss, "n": n, "params": p, "worst_infidelity": float(worst[p]), "trials": len(traces)}
        for p in range(max_params + 1)
    ]


def completion_rows(loss: LossKind, n: int, trial: int, trace: AdaptTrace) -> list[dict[str, Any]]:
    """Rows for every record with at least one parameter; the fraction is blank unless converged."""
    final_params = trace.n_params
    return [
        {
            "loss": loss,
            "n": n,
            "trial": trial,
            "params": record.n_params,
            "completion_fraction": record.n_params / final_params if trace.converged else None,
            "g_inf": record.pool_grad_inf_norm,
            "termination": trace.termination,
        }
        for record in trace.records
        if record.n_params > 0
    ]


def fidelity_summary(
    rows: Sequence[dict[str, Any]], losses: Sequence[LossKind], n_range: Sequence[int]
) -> list[dict[str, Any]]:
    """Spearman correlation of fidelity and ||g||_inf pooled over n, then per n with the max/min ratio."""
    summary: list[dict[str, Any]] = []
    for loss in losses:
        loss_rows = [r for r in rows if r["loss"] == loss]
        summary.append(
            {
                "loss": loss,
                "n": "pooled",
                "trials": len(loss_rows),
                "spearman_rho": _spearman(loss_rows),
                "max_min_ratio": None,
            }
        )
        for n in n_range:
            cell = [r for r in loss_rows if r["n"] == n]
            if not cell:
                continue
            grads = [r["g_inf"] for r in cell]
            summary.append(
                {
                    "loss": loss,
                    "n": n,
                    "trials": len(cell),
                    "spearman_rho": _spearman(cell),
                    "max_min_ratio": max(grads) / min(grads) if min(grads) > 0 else None,
                }
            )
    return summary


def _spearman(rows: Sequence[dict[str, Any]]) -> float | None:
    if len(rows) < 3:
        return None
    fidelities = [r["fidelity"] for r in rows]
    grads = [r["g_inf"] for r in rows]
    if len(set(fidelities)) < 2 or len(set(grads)) < 2:
        return None
    rho = float(spearmanr(fidelities, grads).statistic)
    return rho if np.isfinite(rho) else None


def fit_row(fit: DecayFit) -> dict[str, Any]:
    """One grad_scan_fits.csv row."""
    return {
        "loss": fit.loss_kind,
        "a": fit.a,
        "b": fit.b,
        "residual": fit.residual,
        "points": fit.n_points,
        "threshold": fit.threshold,
        "predicted_failure_n": fit.predicted_failure_n,
    }


def _last_per_cell(rows: Sequence[dict[str, Any]]) -> list[dict[str, Any]]:
    last: dict[tuple[Any, Any], dict[str, Any]] = {}
    for row in rows:
        last[(row["loss"], row["n"])] = row
    return list(last.values())
