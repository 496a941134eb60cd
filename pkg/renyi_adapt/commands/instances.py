"""Instance generation command for renyi-adapt."""

import click
from pathlib import Path

from renyi_adapt.services.config import ConfigManager
from renyi_adapt.services.storage import save_instance
from renyi_adapt.simulation.states import fidelity, purity
from renyi_adapt.simulation.thermal import build_instance
from renyi_adapt.utils.errors import EXIT_PARAMETER_ERROR, RenyiAdaptError, exit_code_for
from renyi_adapt.utils.rich_utils import print_error, print_success, print_table
from renyi_adapt.utils.validation import parse_n_range, validate_n_values


@click.command("gen")
@click.option("--n", "n_text", default="3", show_default=True, help="System sizes, e.g. 3 or 1-4")
@click.option("--trials", type=click.IntRange(min=1), default=1, show_default=True, help="Instances per size")
@click.option("--seed", "base_seed", type=click.IntRange(min=0), help="Base seed (default: from config)")
@click.option("--beta", type=float, help="Inverse temperature (default: from config)")
@click.option("--out", "output_dir", type=click.Path(file_okay=False, path_type=Path), help="Output directory")
@click.pass_context
def gen_command(
    ctx: click.Context,
    n_text: str,
    trials: int,
    base_seed: int | None,
    beta: float | None,
    output_dir: Path | None,
) -> None:
    """Generate seeded problem instances as JSON files.

    Each file stores the Hamiltonian coefficients, the reference angles and both seeds; loading
    it rebuilds the thermal targets and the reference exactly.
    """
    ok, sizes, message = parse_n_range(n_text)
    if ok:
        ok, message = validate_n_values(sizes)
    if not ok:
        print_error("Invalid --n", message)
        ctx.exit(EXIT_PARAMETER_ERROR)

    root = ctx.find_root()
    defaults = ConfigManager(root.obj.get("config_path") if isinstance(root.obj, dict) else None).config
    seed = defaults.base_seed if base_seed is None else base_seed
    temperature = defaults.beta if beta is None else beta
    directory = (output_dir or defaults.output_dir) / "instances"

    rows = []
    try:
        for n in sizes:
            for trial in range(trials):
                instance = build_instance(n, temperature, seed, trial, defaults.taylor_order)
                path = directory / f"instance_n{n}_t{trial}.json"
                save_instance(instance, path)
                sigma0 = instance.reference.state.reduced(n)
                rows.append(
                    [
                        str(n),
                        str(trial),
                        str(instance.seed),
                        str(instance.reference_seed),
                        f"{fidelity(instance.target_exact, sigma0):.4f}",
                        f"{purity(instance.target_exact):.4f}",
                        str(path),
                    ]
                )
    except RenyiAdaptError as e:
        print_error("Instance generation failed", str(e))
        ctx.exit(exit_code_for(e))

    print_table(
        "Generated instances",
        ["n", "trial", "seed", "reference seed", "F(rho, sigma_0)", "Tr(rho^2)", "file"],
        rows,
    )
    print_success(f"Wrote {len(rows)} instance file(s)", str(directory))
