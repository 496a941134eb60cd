"""Decay-fit command for renyi-adapt.

Re-ingests a grad-scan CSV (or takes fitted coefficients directly) and prints the fitted decay
with the predicted failure size at each gradient resolution.
"""

import click
from loguru import logger
from pathlib import Path
from tabulate import tabulate

from renyi_adapt.models.base import LossKind
from renyi_adapt.models.results import DecayFit
from renyi_adapt.services.config import ConfigManager
from renyi_adapt.services.fitting import MIN_FIT_POINTS, fit_decay, medians_by_n, predict_failure
from renyi_adapt.services.harness import FIT_COLUMNS, fit_row
from renyi_adapt.services.storage import read_csv, write_csv
from renyi_adapt.utils.errors import EXIT_PARAMETER_ERROR, RenyiAdaptError, exit_code_for
from renyi_adapt.utils.rich_utils import console, print_error, print_info, print_section_header, print_success
from renyi_adapt.utils.validation import validate_threshold


def fits_from_csv(path: Path, thresholds: list[float]) -> list[DecayFit]:
    """Fit a * b^-n to the per-n medians of every loss in a grad-scan CSV."""
    rows = read_csv(path)
    missing = {"loss", "n", "g_inf"} - set(rows[0].keys() if rows else [])
    if missing:
        raise RenyiAdaptError(f"{path} is not a grad-scan CSV; missing columns {sorted(missing)}")
    fits = []
    for loss in dict.fromkeys(row["loss"] for row in rows):
        samples = [(int(row["n"]), float(row["g_inf"])) for row in rows if row["loss"] == loss]
        medians = [(n, median) for n, median, *_ in medians_by_n(samples)]
        if len(medians) < MIN_FIT_POINTS:
            logger.warning(f"Skipping {loss}: {len(medians)} size(s), need {MIN_FIT_POINTS}")
            continue
        fits.extend(fit_decay(medians, threshold, LossKind(loss)) for threshold in thresholds)
    return fits


@click.command("fit")
@click.argument("csv_path", required=False, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--a", "a", type=float, help="Prefactor of a * b^-n (with --b, skips fitting)")
@click.option("--b", "b", type=float, help="Decay base of a * b^-n (with --a, skips fitting)")
@click.option("--threshold", "thresholds", type=float, multiple=True, help="Gradient resolution (repeatable)")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), help="Write the fits as CSV")
@click.pass_context
def fit_command(
    ctx: click.Context,
    csv_path: Path | None,
    a: float | None,
    b: float | None,
    thresholds: tuple[float, ...],
    out_path: Path | None,
) -> None:
    """Fit initial pool-gradient medians to a * b^-n and predict where ADAPT fails to start.

    \b
    Examples:
      renyi-adapt fit results/grad-scan/grad_scan.csv
      renyi-adapt fit --a 1.676 --b 1.198 --threshold 1e-5
    """
    if not thresholds:
        root = ctx.find_root()
        config_path = root.obj.get("config_path") if isinstance(root.obj, dict) else None
        thresholds = tuple(ConfigManager(config_path).config.failure_thresholds)
    for threshold in thresholds:
        ok, message = validate_threshold(threshold)
        if not ok:
            print_error("Invalid --threshold", message)
            ctx.exit(EXIT_PARAMETER_ERROR)

    if (a is None) != (b is None):
        print_error("--a and --b must be given together")
        ctx.exit(EXIT_PARAMETER_ERROR)

    if a is not None and b is not None:
        if a <= 0 or b <= 0:
            print_error("Coefficients must be positive", f"a={a}, b={b}")
            ctx.exit(EXIT_PARAMETER_ERROR)
        table = [[a, b, t, predict_failure(a, b, t) or "never"] for t in thresholds]
        print_section_header("Predicted failure sizes")
        console.print(tabulate(table, headers=["a", "b", "threshold", "failure n"], tablefmt="simple"))
        return

    if csv_path is None:
        print_error("Give a grad-scan CSV or both --a and --b")
        ctx.exit(EXIT_PARAMETER_ERROR)

    try:
        fits = fits_from_csv(csv_path, list(thresholds))
    except RenyiAdaptError as e:
        print_error("Fit failed", str(e))
        ctx.exit(max(exit_code_for(e), EXIT_PARAMETER_ERROR))
    except (KeyError, ValueError) as e:
        print_error("Could not read grad-scan CSV", str(e))
        ctx.exit(EXIT_PARAMETER_ERROR)

    if not fits:
        print_info("No losses with enough sizes to fit")
        return

    rows = [fit_row(fit) for fit in fits]
    print_section_header("Initial pool-gradient decay")
    console.print(
        tabulate(
            [[r["loss"], f"{r['a']:.4g}", f"{r['b']:.4g}", r["threshold"], r["predicted_failure_n"] or "never"] for r in rows],
            headers=["loss", "a", "b", "threshold", "failure n"],
            tablefmt="simple",
        )
    )
    if out_path is not None:
        write_csv(out_path, FIT_COLUMNS, rows)
        print_success("Fits written", str(out_path))
