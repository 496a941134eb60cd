"""Pytest configuration and common fixtures for renyi-adapt tests."""

import numpy as np
import pytest
from pathlib import Path

from renyi_adapt.models.base import LossKind
from renyi_adapt.simulation.ansatz import Ansatz
from renyi_adapt.simulation.pauli import pool_klocal
from renyi_adapt.simulation.states import DensityOperator, Statevector
from renyi_adapt.simulation.thermal import ProblemInstance, build_instance, reference_from_angles


def random_statevector(n_qubits: int, seed: int) -> Statevector:
    """Haar-ish random pure state from a seeded Gaussian draw."""
    rng = np.random.default_rng(seed)
    amplitudes = rng.standard_normal(1 << n_qubits) + 1j * rng.standard_normal(1 << n_qubits)
    return Statevector(n_qubits=n_qubits, amplitudes=amplitudes / np.linalg.norm(amplitudes))


def random_density(n_qubits: int, seed: int, rank: int | None = None) -> DensityOperator:
    """Random mixed state G G^dagger / Tr with G of the given column rank."""
    rng = np.random.default_rng(seed)
    dim = 1 << n_qubits
    g = rng.standard_normal((dim, rank or dim)) + 1j * rng.standard_normal((dim, rank or dim))
    rho = g @ g.conj().T
    return DensityOperator(n_qubits=n_qubits, matrix=rho / np.trace(rho).real)


def random_ansatz(instance: ProblemInstance, indices: list[int], seed: int) -> Ansatz:
    """Ansatz over the instance reference with pool generators ``indices`` at random angles."""
    pool = pool_klocal(instance.n_total, 2)
    rng = np.random.default_rng(seed)
    return Ansatz(
        n_visible=instance.n_visible,
        n_hidden=instance.n_hidden,
        reference=instance.reference.state,
        generators=tuple(pool[i] for i in indices),
        params=tuple(float(t) for t in rng.uniform(-np.pi, np.pi, size=len(indices))),
    )


def self_target_instance(instance: ProblemInstance) -> ProblemInstance:
    """Copy of ``instance`` whose thermal targets equal the reference's own visible state."""
    sigma0 = instance.reference.state.reduced(instance.n_visible)
    return instance.model_copy(update={"target_exact": sigma0, "target_taylor": sigma0})


@pytest.fixture(scope="session")
def instance_n1() -> ProblemInstance:
    """Trial 0 of the n = 1 family (2 qubits in total)."""
    return build_instance(1, beta=1.0, base_seed=0, trial=0)


@pytest.fixture(scope="session")
def instance_n2() -> ProblemInstance:
    """Trial 0 of the n = 2 family (4 qubits in total)."""
    return build_instance(2, beta=1.0, base_seed=0, trial=0)


@pytest.fixture(scope="session")
def entangled_reference():
    """n_V = n_H = 1 reference with a full-rank visible reduction."""
    return reference_from_angles(1, 1, (0.3, 1.1))


@pytest.fixture(params=list(LossKind), ids=[kind.value for kind in LossKind])
def loss_kind(request) -> LossKind:
    """Every supported loss."""
    return request.param


@pytest.fixture
def config_path(tmp_path: Path) -> Path:
    """Config file location inside the test's temporary directory."""
    return tmp_path / ".renyi-adapt" / "config.json"


@pytest.fixture
def cli_app(monkeypatch, tmp_path: Path):
    """The click group with every command registered, run from an empty directory."""
    from renyi_adapt.cli import cli, register_commands

    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("RENYI_ADAPT_CONFIG", raising=False)
    register_commands()
    return cli
