"""Random problem instances: two-local Hamiltonians, thermal targets and entangled references.

Seeds are consumed by numpy's PCG64 generator (``np.random.default_rng``). A trial draws its
Hamiltonian from ``base_seed + trial`` and its reference angles from ``base_seed + 10**6 + trial``,
so partial reruns reproduce full runs in any execution order.
"""

import math
import numpy as np
import warnings
from loguru import logger
from numpy.typing import NDArray
from pydantic import Field, model_validator

from renyi_adapt.models.base import BaseRenyiModel, FrozenRenyiModel
from renyi_adapt.simulation.linalg import ComplexMatrix, eigh, hermitian_fn, hermitize
from renyi_adapt.simulation.pauli import MAX_QUBITS, PauliString, basis_indices, pool_klocal, to_matrix
from renyi_adapt.simulation.states import DensityOperator, Statevector
from renyi_adapt.utils.errors import ParameterError, TruncationQualityWarning, UnsupportedConfigurationError


REFERENCE_SEED_OFFSET = 10**6
DEFAULT_BETA = 1.0
DEFAULT_TAYLOR_ORDER = 5
CLAMPED_MASS_WARNING = 1e-6


class TwoLocalHamiltonian(FrozenRenyiModel):
    """H = sum_i c_i P_i over one- and two-local Paulis on the visible register, ||c||_2 = 1."""

    n_visible: int = Field(ge=1, le=MAX_QUBITS, description="Number of visible qubits")
    terms: tuple[tuple[PauliString, float], ...] = Field(description="(Pauli string, coefficient) pairs")

    @model_validator(mode="after")
    def validate_terms(self) -> "TwoLocalHamiltonian":
        """Terms are visible-only, at most two-local, and the coefficients have unit norm."""
        for pauli, _ in self.terms:
            if pauli.n_qubits != self.n_visible:
                raise ValueError(f"Term {pauli.label} acts on {pauli.n_qubits} qubits, expected {self.n_visible}")
            if pauli.weight > 2:
                raise ValueError(f"Term {pauli.label} is more than two-local")
        norm = math.sqrt(sum(c * c for _, c in self.terms))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"Coefficient vector norm is {norm:.15f}, expected 1")
        return self

    @property
    def coefficients(self) -> NDArray[np.float64]:
        return np.array([c for _, c in self.terms])

    def coefficient_map(self) -> dict[str, float]:
        """Term label -> coefficient, in term order."""
        return {pauli.label: c for pauli, c in self.terms}

    def to_matrix(self) -> ComplexMatrix:
        """Dense matrix on the visible register."""
        dim = 1 << self.n_visible
        matrix = np.zeros((dim, dim), dtype=complex)
        for pauli, c in self.terms:
            matrix += c * to_matrix(pauli, self.n_visible)
        return matrix

    @classmethod
    def from_coefficient_map(cls, n_visible: int, coefficients: dict[str, float]) -> "TwoLocalHamiltonian":
        """Rebuild a Hamiltonian from its serialized label map."""
        terms = tuple((PauliString.from_label(label, n_visible), c) for label, c in coefficients.items())
        return cls(n_visible=n_visible, terms=terms)


class ReferenceState(BaseRenyiModel):
    """Partially entangled reference together with the angles that generated it."""

    n_visible: int = Field(ge=1, description="Number of visible qubits")
    n_hidden: int = Field(ge=1, description="Number of hidden qubits")
    angles: tuple[float, ...] = Field(description="R_y angle per qubit, qubit 0 first")
    state: Statevector = Field(description="Reference statevector on visible+hidden qubits")


class ProblemInstance(BaseRenyiModel):
    """Everything one trial needs: Hamiltonian, thermal targets and reference."""

    n_visible: int = Field(ge=1, description="Number of visible qubits")
    n_hidden: int = Field(ge=1, description="Number of hidden qubits")
    beta: float = Field(ge=0.0, description="Inverse temperature")
    seed: int = Field(description="Seed of the Hamiltonian draw")
    reference_seed: int = Field(description="Seed of the reference-angle draw")
    taylor_order: int = Field(default=DEFAULT_TAYLOR_ORDER, ge=0, description="Taylor order of the Gibbs target")
    hamiltonian: TwoLocalHamiltonian
    reference: ReferenceState
    target_exact: DensityOperator
    target_taylor: DensityOperator

    @model_validator(mode="after")
    def validate_dimensions(self) -> "ProblemInstance":
        """Registers must agree across the components."""
        if self.hamiltonian.n_visible != self.n_visible or self.target_exact.n_qubits != self.n_visible:
            raise ValueError("Hamiltonian and targets must act on the visible register")
        if self.reference.state.n_qubits != self.n_visible + self.n_hidden:
            raise ValueError("Reference must span visible and hidden qubits")
        return self

    @property
    def n_total(self) -> int:
        return self.n_visible + self.n_hidden


def random_hamiltonian(n_visible: int, rng: np.random.Generator) -> TwoLocalHamiltonian:
    """Standard-normal coefficient per one-/two-local visible Pauli, normalized to unit norm."""
    if n_visible < 1:
        raise ParameterError(f"n_visible must be >= 1, got {n_visible}")
    pool = pool_klocal(n_visible, 2)
    raw = rng.standard_normal(len(pool))
    coefficients = raw / np.linalg.norm(raw)
    return TwoLocalHamiltonian(
        n_visible=n_visible, terms=tuple((p, float(c)) for p, c in zip(pool, coefficients, strict=True))
    )


def gibbs_exact(hamiltonian: TwoLocalHamiltonian, beta: float) -> DensityOperator:
    """exp(-beta H) / Z through the spectrum of H."""
    if beta < 0:
        raise ParameterError(f"beta must be non-negative, got {beta}")
    h = hamiltonian.to_matrix()
    shift = float(eigh(h).eigenvalues[0])
    # shifting by the ground energy keeps exp() in range; it cancels in the normalization
    unnormalized = hermitian_fn(h, lambda x: np.exp(-beta * (x - shift)))
    return DensityOperator(n_qubits=hamiltonian.n_visible, matrix=unnormalized / np.trace(unnormalized).real)


def taylor_series(hamiltonian: TwoLocalHamiltonian, beta: float, order: int) -> ComplexMatrix:
    """sum_{k=0}^{order} (-beta H)^k / k!, symmetrized."""
    h = hamiltonian.to_matrix()
    dim = h.shape[0]
    term = np.eye(dim, dtype=complex)
    total = term.copy()
    for k in range(1, order + 1):
        term = term @ (-beta * h) / k
        total += term
    return hermitize(total)


def gibbs_taylor(hamiltonian: TwoLocalHamiltonian, beta: float, order: int = DEFAULT_TAYLOR_ORDER) -> DensityOperator:
    """Taylor-truncated Gibbs state, clamped to PSD and renormalized.

    Emits ``TruncationQualityWarning`` when the clamped negative weight exceeds 1e-6.
    """
    if order < 0:
        raise ParameterError(f"Taylor order must be non-negative, got {order}")
    system = eigh(taylor_series(hamiltonian, beta, order))
    clamped_mass = float(-system.eigenvalues[system.eigenvalues < 0].sum())
    if clamped_mass > CLAMPED_MASS_WARNING:
        message = f"Taylor order {order} at beta={beta} removed {clamped_mass:.3e} of negative spectral weight"
        logger.warning(message)
        warnings.warn(TruncationQualityWarning(message, clamped_mass), stacklevel=2)
    matrix = hermitize(system.reconstruct(np.clip(system.eigenvalues, 0.0, None)))
    return DensityOperator(n_qubits=hamiltonian.n_visible, matrix=matrix / np.trace(matrix).real)


def sample_reference_angles(n_total: int, rng: np.random.Generator) -> tuple[float, ...]:
    """Independent R_y angles, uniform on [-pi, pi)."""
    return tuple(float(a) for a in rng.uniform(-np.pi, np.pi, size=n_total))


def reference_from_angles(n_visible: int, n_hidden: int, angles: tuple[float, ...]) -> ReferenceState:
    """R_y(angle_q)|0> on every qubit, then CNOT(hidden n_V + j -> visible j) for every pair.

    R_y(t) = exp(-i t Y / 2), so each qubit starts in cos(t/2)|0> + sin(t/2)|1> and all amplitudes
    stay real.
    """
    if n_hidden != n_visible:
        raise UnsupportedConfigurationError(
            f"Reference states pair each visible qubit with a hidden one; got n_V={n_visible}, n_H={n_hidden}"
        )
    n_total = n_visible + n_hidden
    if len(angles) != n_total:
        raise ParameterError(f"Expected {n_total} angles, got {len(angles)}")

    amplitudes = np.ones(1, dtype=complex)
    for angle in angles:
        # the next qubit is more significant, so it becomes the left kron factor
        amplitudes = np.kron(np.array([np.cos(angle / 2), np.sin(angle / 2)], dtype=complex), amplitudes)

    indices = basis_indices(n_total)
    for j in range(n_visible):
        control, target = n_visible + j, j
        gather = np.where((indices >> control) & 1, indices ^ (1 << target), indices)
        amplitudes = amplitudes[gather]

    state = Statevector(n_qubits=n_total, amplitudes=amplitudes)
    return ReferenceState(n_visible=n_visible, n_hidden=n_hidden, angles=tuple(angles), state=state)


def random_reference(n_visible: int, n_hidden: int, rng: np.random.Generator) -> Statevector:
    """Partially entangled random reference statevector."""
    if n_hidden != n_visible:
        raise UnsupportedConfigurationError(f"n_H must equal n_V, got n_V={n_visible}, n_H={n_hidden}")
    angles = sample_reference_angles(n_visible + n_hidden, rng)
    return reference_from_angles(n_visible, n_hidden, angles).state


def trial_seeds(base_seed: int, trial: int) -> tuple[int, int]:
    """(Hamiltonian seed, reference seed) of one trial."""
    return base_seed + trial, base_seed + REFERENCE_SEED_OFFSET + trial


def assemble_instance(
    hamiltonian: TwoLocalHamiltonian,
    reference: ReferenceState,
    beta: float,
    seed: int,
    reference_seed: int,
    taylor_order: int = DEFAULT_TAYLOR_ORDER,
) -> ProblemInstance:
    """Derive both thermal targets and bundle a ProblemInstance."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationQualityWarning)
        target_taylor = gibbs_taylor(hamiltonian, beta, taylor_order)
    return ProblemInstance(
        n_visible=hamiltonian.n_visible,
        n_hidden=reference.n_hidden,
        beta=beta,
        seed=seed,
        reference_seed=reference_seed,
        taylor_order=taylor_order,
        hamiltonian=hamiltonian,
        reference=reference,
        target_exact=gibbs_exact(hamiltonian, beta),
        target_taylor=target_taylor,
    )


def build_instance(
    n: int, beta: float = DEFAULT_BETA, base_seed: int = 0, trial: int = 0, taylor_order: int = DEFAULT_TAYLOR_ORDER
) -> ProblemInstance:
    """Generate trial ``trial`` of the n_V = n_H = n family."""
    seed, reference_seed = trial_seeds(base_seed, trial)
    hamiltonian = random_hamiltonian(n, np.random.default_rng(seed))
    angles = sample_reference_angles(2 * n, np.random.default_rng(reference_seed))
    reference = reference_from_angles(n, n, angles)
    logger.debug(f"Built instance n={n} trial={trial} (seeds {seed}/{reference_seed})")
    return assemble_instance(hamiltonian, reference, beta, seed, reference_seed, taylor_order)
