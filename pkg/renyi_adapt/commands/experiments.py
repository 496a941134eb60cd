"""Experiment commands for renyi-adapt.

This module provides the five experiment subcommands. They share one option set; flags override
the run defaults from the config file, and the merged values are validated as an ExperimentSpec.
"""

import click
import functools
from collections.abc import Callable
from loguru import logger
from pathlib import Path
from pydantic import ValidationError
from typing import Any

from renyi_adapt.models.base import ExperimentKind, LossKind
from renyi_adapt.models.config import ExperimentSpec
from renyi_adapt.models.results import ExperimentOutcome
from renyi_adapt.services.config import ConfigManager
from renyi_adapt.services.harness import ExperimentRunner
from renyi_adapt.services.storage import load_instance
from renyi_adapt.utils.errors import EXIT_PARAMETER_ERROR, PartialFailureError, RenyiAdaptError, exit_code_for
from renyi_adapt.utils.rich_utils import (
    console,
    plain_table,
    print_error,
    print_files,
    print_records,
    print_section_header,
    print_success,
    print_warning,
)
from renyi_adapt.utils.validation import parse_n_range, validate_losses


DEFAULT_N = {
    ExperimentKind.LOSS_CURVES: "3",
    ExperimentKind.SIZE_SCAN: "1-3",
    ExperimentKind.GRAD_SCAN: "1-5",
    ExperimentKind.FIDELITY_SCAN: "1-4",
    ExperimentKind.COMPLETION: "3",
}

SUMMARY_TITLES = {
    ExperimentKind.LOSS_CURVES: "Parameter counts",
    ExperimentKind.SIZE_SCAN: "Worst-case infidelity at the largest parameter count",
    ExperimentKind.GRAD_SCAN: "Initial pool-gradient decay fits",
    ExperimentKind.FIDELITY_SCAN: "Fidelity vs gradient",
    ExperimentKind.COMPLETION: "Converged runs",
}


def experiment_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """Attach the shared experiment flags."""
    options = [
        click.option("--n", "n_text", help="System sizes n = n_V = n_H, e.g. 3, 1-5 or 1,2,4"),
        click.option("--trials", type=click.IntRange(min=1), help="Trials per (loss, n) cell"),
        click.option("--seed", "base_seed", type=click.IntRange(min=0), help="Base seed"),
        click.option("--beta", type=float, help="Inverse temperature"),
        click.option(
            "--loss",
            "losses",
            multiple=True,
            help="Loss to run: overlap, gibbs or renyi (repeatable; default: all)",
        ),
        click.option("--epsilon", type=float, help="ADAPT pool-gradient threshold"),
        click.option("--max-params", type=click.IntRange(min=1), help="Parameter cap (default: 2 x pool size)"),
        click.option("--out", "output_dir", type=click.Path(file_okay=False, path_type=Path), help="Output directory"),
        click.option("--threads", type=click.IntRange(min=1), help="Worker processes"),
        click.option("--expensive", is_flag=True, default=False, help="Allow expensive cells (n >= 4 ADAPT, n = 6 scans)"),
        click.option("--plots/--no-plots", default=None, help="Write SVG plots"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _config_manager(ctx: click.Context) -> ConfigManager:
    root = ctx.find_root()
    config_path = root.obj.get("config_path") if isinstance(root.obj, dict) else None
    return ConfigManager(config_path)


def build_spec(ctx: click.Context, experiment: ExperimentKind, n_text: str | None, **flags: Any) -> ExperimentSpec:
    """Merge config defaults and flags into a validated ExperimentSpec."""
    ok, n_range, message = parse_n_range(n_text or DEFAULT_N[experiment])
    if not ok:
        raise click.BadParameter(message, param_hint="--n")
    losses = flags.pop("losses", ())
    ok, message = validate_losses(list(losses))
    if not ok:
        raise click.BadParameter(message, param_hint="--loss")
    flags["losses"] = [LossKind(name.lower()) for name in losses] if losses else None
    defaults = _config_manager(ctx).config
    return ExperimentSpec.from_defaults(experiment, defaults, n_range=n_range, **flags)


def _report(outcome: ExperimentOutcome) -> None:
    print_section_header(SUMMARY_TITLES[outcome.experiment])
    print_records(SUMMARY_TITLES[outcome.experiment], outcome.summary)
    if outcome.experiment == ExperimentKind.GRAD_SCAN and outcome.summary:
        console.print(plain_table(outcome.summary))
    print_files([str(path) for path in outcome.files])


def run_experiment(ctx: click.Context, spec_factory: Callable[[], ExperimentSpec]) -> None:
    """Build the ExperimentSpec, run it, report, and exit with the harness exit code."""
    try:
        spec = spec_factory()
    except ValidationError as e:
        print_error("Invalid experiment settings", f"{e.error_count()} error(s)")
        for error in e.errors():
            console.print(f"   {'.'.join(str(p) for p in error['loc']) or 'spec'}: {error['msg']}", style="dim red")
        ctx.exit(EXIT_PARAMETER_ERROR)

    try:
        outcome = ExperimentRunner(spec).run()
    except (RenyiAdaptError, ValidationError) as e:
        logger.debug(f"{spec.experiment} aborted: {e!r}")
        print_error(f"{spec.experiment} failed", str(e))
        ctx.exit(exit_code_for(e))

    _report(outcome)
    if outcome.partial_failure:
        error = PartialFailureError(f"{len(outcome.failures)} trial(s) failed", outcome.failures)
        print_warning(str(error), "; ".join(error.failures[:5]))
        ctx.exit(exit_code_for(error))
    print_success(f"{spec.experiment} complete", f"{outcome.rows} rows written to {spec.output_dir}")


def _experiment_command(experiment: ExperimentKind, doc: str) -> click.Command:
    @click.command(experiment.value, help=doc)
    @experiment_options
    @click.pass_context
    def command(ctx: click.Context, n_text: str | None, **flags: Any) -> None:
        run_experiment(ctx, functools.partial(build_spec, ctx, experiment, n_text, **flags))

    return command


@click.command("loss-curves")
@experiment_options
@click.option(
    "--instance",
    "instance_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Run on a saved instance file instead of a seeded one",
)
@click.pass_context
def loss_curves_command(ctx: click.Context, n_text: str | None, instance_path: Path | None, **flags: Any) -> None:
    """ADAPT and VQE loss curves on one instance, with a parameter-count summary.

    Writes a trace CSV, a per-evaluation curve CSV and an ansatz file per (loss, method).
    """

    def factory() -> ExperimentSpec:
        n = n_text
        if instance_path is not None:
            try:
                n = str(load_instance(instance_path).n_visible)
            except RenyiAdaptError as e:
                raise click.BadParameter(str(e), param_hint="--instance") from e
        return build_spec(ctx, ExperimentKind.LOSS_CURVES, n, instance_path=instance_path, **flags)

    run_experiment(ctx, factory)


size_scan_command = _experiment_command(
    ExperimentKind.SIZE_SCAN,
    "Worst-case infidelity over trials as a function of parameter count, per (loss, n).",
)
grad_scan_command = _experiment_command(
    ExperimentKind.GRAD_SCAN,
    "Largest initial pool gradient per (loss, n, trial), with medians and a * b^-n decay fits.",
)
fidelity_scan_command = _experiment_command(
    ExperimentKind.FIDELITY_SCAN,
    "Initial pool gradient against the fidelity between the reference and the thermal target.",
)
completion_command = _experiment_command(
    ExperimentKind.COMPLETION,
    "Pool gradient against the fraction of the final ansatz length, for converged ADAPT runs.",
)
