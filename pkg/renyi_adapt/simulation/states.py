"""Quantum state containers and the fidelity, infidelity and purity metrics."""

import numpy as np
from numpy.typing import NDArray
from pydantic import Field, model_validator

from renyi_adapt.models.base import BaseRenyiModel
from renyi_adapt.simulation.linalg import (
    HERMITIAN_TOL,
    PSD_CLAMP_TOL,
    ComplexMatrix,
    clamp_spectrum,
    eigh,
    hermitize,
    is_hermitian,
    psd_sqrt,
    reduced_from_statevector,
    trace_product,
)
from renyi_adapt.simulation.pauli import MAX_QUBITS
from renyi_adapt.utils.errors import ParameterError


NORM_TOL = 1e-10
TRACE_TOL = 1e-10


class Statevector(BaseRenyiModel):
    """Normalized pure state on ``n_qubits`` qubits."""

    n_qubits: int = Field(ge=1, le=MAX_QUBITS, description="Register width")
    amplitudes: NDArray[np.complex128] = Field(description="Complex amplitudes, length 2^n_qubits")

    @model_validator(mode="after")
    def validate_amplitudes(self) -> "Statevector":
        """Enforce shape and unit norm."""
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(f"Expected {1 << self.n_qubits} amplitudes, got shape {self.amplitudes.shape}")
        norm = float(np.linalg.norm(self.amplitudes))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"Statevector norm is {norm:.12f}, expected 1")
        return self

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "Statevector":
        """Computational basis state |index>."""
        amplitudes = np.zeros(1 << n_qubits, dtype=complex)
        amplitudes[index] = 1.0
        return cls(n_qubits=n_qubits, amplitudes=amplitudes)

    def evolve(self, amplitudes: NDArray[np.complex128]) -> "Statevector":
        """New state on the same register."""
        return Statevector(n_qubits=self.n_qubits, amplitudes=amplitudes)

    def reduced(self, n_visible: int) -> "DensityOperator":
        """Visible reduced density, tracing out qubits n_visible..n_qubits-1."""
        n_hidden = self.n_qubits - n_visible
        if n_hidden < 0:
            raise ParameterError(f"Cannot keep {n_visible} visible qubits of a {self.n_qubits}-qubit state")
        if n_hidden == 0:
            return DensityOperator.pure(self)
        return DensityOperator(
            n_qubits=n_visible, matrix=reduced_from_statevector(self.amplitudes, n_visible, n_hidden)
        )


class DensityOperator(BaseRenyiModel):
    """Hermitian, unit-trace, PSD operator."""

    n_qubits: int = Field(ge=1, le=MAX_QUBITS, description="Register width")
    matrix: ComplexMatrix = Field(description="Dense 2^n x 2^n matrix")

    @model_validator(mode="after")
    def validate_matrix(self) -> "DensityOperator":
        """Enforce shape, Hermiticity, unit trace and PSD within the clamp rule."""
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = 1 << self.n_qubits
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"Expected a {dim}x{dim} matrix, got shape {self.matrix.shape}")
        if not is_hermitian(self.matrix, HERMITIAN_TOL):
            raise ValueError("Density matrix is not Hermitian")
        trace = complex(np.trace(self.matrix))
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValueError(f"Density matrix trace is {trace.real:.12f}, expected 1")
        lowest = float(np.linalg.eigvalsh(hermitize(self.matrix))[0])
        if lowest < -PSD_CLAMP_TOL:
            raise ValueError(f"Density matrix is not PSD: eigenvalue {lowest:.3e}")
        return self

    @classmethod
    def pure(cls, state: Statevector) -> "DensityOperator":
        """|psi><psi|."""
        return cls(n_qubits=state.n_qubits, matrix=np.outer(state.amplitudes, state.amplitudes.conj()))

    @classmethod
    def maximally_mixed(cls, n_qubits: int) -> "DensityOperator":
        """I / 2^n."""
        dim = 1 << n_qubits
        return cls(n_qubits=n_qubits, matrix=np.eye(dim, dtype=complex) / dim)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits


def _check_pair(rho: DensityOperator, sigma: DensityOperator) -> None:
    if rho.n_qubits != sigma.n_qubits:
        raise ParameterError(f"Density operators act on {rho.n_qubits} and {sigma.n_qubits} qubits")


def fidelity_from_sqrt(sqrt_rho: ComplexMatrix, sigma: ComplexMatrix) -> float:
    """Tr sqrt(sqrt_rho sigma sqrt_rho) for a precomputed sqrt_rho."""
    inner = hermitize(sqrt_rho @ sigma @ sqrt_rho)
    values = clamp_spectrum(eigh(inner).eigenvalues)
    return float(min(np.sum(np.sqrt(values)), 1.0))


def fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Uhlmann fidelity F = Tr sqrt(sqrt(rho) sigma sqrt(rho)), in [0, 1]."""
    _check_pair(rho, sigma)
    return fidelity_from_sqrt(psd_sqrt(rho.matrix), sigma.matrix)


def infidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """1 - F(rho, sigma)^2."""
    return 1.0 - fidelity(rho, sigma) ** 2


def purity(sigma: DensityOperator) -> float:
    """Tr(sigma^2)."""
    return float(trace_product(sigma.matrix, sigma.matrix).real)
