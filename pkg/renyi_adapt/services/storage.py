"""File formats: scan and trace CSVs, ansatz sidecars and instance JSON files.

CSV files start with one ``#`` comment line carrying the generation timestamp; everything after it
is a deterministic function of the experiment inputs. Floats are written with 17 significant digits.
"""

import csv
import json
from collections.abc import Iterable, Mapping
from datetime import datetime
from enum import Enum
from loguru import logger
from pathlib import Path
from pydantic import Field

from renyi_adapt import __version__
from renyi_adapt.models.base import BaseRenyiModel
from renyi_adapt.services.adapt import AdaptTrace
from renyi_adapt.simulation.ansatz import Ansatz
from renyi_adapt.simulation.thermal import (
    TwoLocalHamiltonian,
    ProblemInstance,
    assemble_instance,
    reference_from_angles,
)
from renyi_adapt.utils.errors import ParameterError


TRACE_COLUMNS = ["iteration", "operator", "pool_grad_inf_norm", "loss", "infidelity", "cumulative_fevals"]
CURVE_COLUMNS = ["evaluation", "loss", "loss_gap", "iteration"]


def format_value(value: object) -> str:
    """CSV cell text: 17 significant digits for floats, blank for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def write_csv(path: Path, fieldnames: list[str], rows: Iterable[Mapping[str, object]]) -> int:
    """Write rows under a ``#`` timestamp line; returns the number of data rows."""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# renyi-adapt {__version__} generated {datetime.now().isoformat(timespec='seconds')}\n")
        writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: format_value(row.get(key)) for key in fieldnames})
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return count


def read_csv(path: Path) -> list[dict[str, str]]:
    """Read a CSV written by :func:`write_csv`, skipping ``#`` lines."""
    if not path.exists():
        raise ParameterError(f"CSV file not found: {path}")
    with open(path, encoding="utf-8", newline="") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def trace_rows(trace: AdaptTrace) -> list[dict[str, object]]:
    """One trace CSV row per record."""
    return [
        {
            "iteration": record.iteration,
            "operator": record.operator,
            "pool_grad_inf_norm": record.pool_grad_inf_norm,
            "loss": record.loss,
            "infidelity": record.infidelity,
            "cumulative_fevals": record.cumulative_fevals,
        }
        for record in trace.records
    ]


def write_trace(trace: AdaptTrace, path: Path) -> int:
    """Trace CSV plus an ``.ansatz.txt`` sidecar with the final generators and angles."""
    rows = write_csv(path, TRACE_COLUMNS, trace_rows(trace))
    write_ansatz(trace.final_ansatz, path.with_suffix(".ansatz.txt"))
    return rows


def write_curve(trace: AdaptTrace, path: Path) -> int:
    """Loss per objective evaluation."""
    rows = (
        {"evaluation": evaluation, "loss": loss, "loss_gap": gap, "iteration": iteration}
        for evaluation, loss, gap, iteration in trace.curve()
    )
    return write_csv(path, CURVE_COLUMNS, rows)


def write_ansatz(ansatz: Ansatz, path: Path) -> None:
    """One ``generator, theta`` line per parameter."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{line}\n" for line in ansatz.to_lines()), encoding="utf-8")


class InstanceFile(BaseRenyiModel):
    """Serialized problem instance; dense data is regenerated on load."""

    n_visible: int = Field(ge=1, description="Number of visible qubits")
    n_hidden: int = Field(ge=1, description="Number of hidden qubits")
    beta: float = Field(ge=0.0, description="Inverse temperature")
    seed: int = Field(description="Seed of the Hamiltonian draw")
    reference_seed: int = Field(description="Seed of the reference-angle draw")
    taylor_order: int = Field(default=5, ge=0, description="Taylor order of the gibbs-loss target")
    hamiltonian: dict[str, float] = Field(description="Pauli label -> coefficient")
    reference_angles: list[float] = Field(description="R_y angle per qubit, qubit 0 first")

    @classmethod
    def from_instance(cls, instance: ProblemInstance) -> "InstanceFile":
        return cls(
            n_visible=instance.n_visible,
            n_hidden=instance.n_hidden,
            beta=instance.beta,
            seed=instance.seed,
            reference_seed=instance.reference_seed,
            taylor_order=instance.taylor_order,
            hamiltonian=instance.hamiltonian.coefficient_map(),
            reference_angles=list(instance.reference.angles),
        )

    def to_instance(self) -> ProblemInstance:
        hamiltonian = TwoLocalHamiltonian.from_coefficient_map(self.n_visible, self.hamiltonian)
        reference = reference_from_angles(self.n_visible, self.n_hidden, tuple(self.reference_angles))
        return assemble_instance(hamiltonian, reference, self.beta, self.seed, self.reference_seed, self.taylor_order)


def save_instance(instance: ProblemInstance, path: Path) -> None:
    """Write an instance as JSON."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(InstanceFile.from_instance(instance).model_dump(mode="json"), f, indent=2)
    logger.debug(f"Instance saved to {path}")


def load_instance(path: Path) -> ProblemInstance:
    """Read an instance JSON file and rebuild its targets and reference."""
    if not path.exists():
        raise ParameterError(f"Instance file not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ParameterError(f"Instance file {path} is not valid JSON: {e}") from e
    return InstanceFile.model_validate(data).to_instance()
