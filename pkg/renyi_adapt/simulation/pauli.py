"""Phase-free Pauli strings, k-local operator pools and statevector kernels.

Qubit ordering convention used throughout the package: qubit 0 is the least-significant bit of a
basis index. Visible qubits occupy 0..n_V-1 and hidden qubits n_V..n_V+n_H-1.

A Pauli string P acts on a basis state as P|i> = i^{n_Y} (-1)^{popcount(i & z)} |i ^ x>, where
``x`` marks the X and Y positions and ``z`` marks the Z and Y positions. The kernels below apply
that map to whole statevectors with one gather, so no dense matrix is ever formed.
"""

import itertools
import numpy as np
from functools import lru_cache, reduce
from numpy.typing import NDArray
from pydantic import Field, field_validator, model_validator
from typing import TYPE_CHECKING, Iterator

from renyi_adapt.models.base import FrozenRenyiModel, PauliAxis
from renyi_adapt.utils.errors import CapacityError, ParameterError


if TYPE_CHECKING:
    from renyi_adapt.simulation.states import Statevector

MAX_QUBITS = 12
AXIS_ORDER = {PauliAxis.X: 0, PauliAxis.Y: 1, PauliAxis.Z: 2}

_SINGLE_QUBIT = {
    PauliAxis.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliAxis.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    PauliAxis.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}


@lru_cache(maxsize=None)
def basis_indices(n_qubits: int) -> NDArray[np.int64]:
    """Return the read-only basis index array 0..2^n-1."""
    indices = np.arange(1 << n_qubits, dtype=np.int64)
    indices.flags.writeable = False
    return indices


# kernel tables live outside the model so PauliString.__dict__ holds only its fields
@lru_cache(maxsize=4096)
def _phase_vector(n_qubits: int, z_mask: int, n_y: int) -> NDArray[np.complex128]:
    # bitwise_count returns uint8, so signed arithmetic on it wraps
    odd = (np.bitwise_count(basis_indices(n_qubits) & z_mask) & 1).astype(bool)
    phases = (1j**n_y) * np.where(odd, -1.0, 1.0).astype(complex)
    phases.flags.writeable = False
    return phases


@lru_cache(maxsize=4096)
def _flip_indices(n_qubits: int, x_mask: int) -> NDArray[np.int64]:
    flips = basis_indices(n_qubits) ^ x_mask
    flips.flags.writeable = False
    return flips


class PauliString(FrozenRenyiModel):
    """Tensor product of single-qubit Pauli axes, identity on unlisted qubits.

    Entries are kept sorted by qubit index, so equality and hashing are structural.
    """

    n_qubits: int = Field(ge=1, le=MAX_QUBITS, description="Register width the string acts on")
    axes: tuple[tuple[int, PauliAxis], ...] = Field(
        default=(), description="(qubit, axis) pairs in ascending qubit order"
    )

    @field_validator("axes", mode="after")
    @classmethod
    def sort_axes(cls, axes: tuple[tuple[int, PauliAxis], ...]) -> tuple[tuple[int, PauliAxis], ...]:
        """Canonicalize entry order and reject repeated qubits."""
        ordered = tuple(sorted(axes, key=lambda entry: entry[0]))
        qubits = [qubit for qubit, _ in ordered]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"Pauli string lists a qubit more than once: {qubits}")
        if any(qubit < 0 for qubit in qubits):
            raise ValueError(f"Qubit indices must be non-negative: {qubits}")
        return ordered

    @model_validator(mode="after")
    def validate_support(self) -> "PauliString":
        """Ensure every listed qubit fits in the register."""
        for qubit, _ in self.axes:
            if qubit >= self.n_qubits:
                raise ValueError(f"Qubit {qubit} is outside a {self.n_qubits}-qubit register")
        return self

    @classmethod
    def from_label(cls, label: str, n_qubits: int) -> "PauliString":
        """Parse the text form, e.g. ``"X0 Z3"``; ``"I"`` is the identity."""
        tokens = label.split()
        if tokens == ["I"]:
            return cls(n_qubits=n_qubits)
        axes = []
        for token in tokens:
            try:
                axes.append((int(token[1:]), PauliAxis(token[0].upper())))
            except ValueError as e:
                raise ParameterError(f"Malformed Pauli token '{token}' in '{label}'") from e
        return cls(n_qubits=n_qubits, axes=tuple(axes))

    @property
    def label(self) -> str:
        """Text form: axis letter + qubit index, space-separated, ascending index."""
        if not self.axes:
            return "I"
        return " ".join(f"{axis}{qubit}" for qubit, axis in self.axes)

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return len(self.axes)

    @property
    def sort_key(self) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
        """Canonical pool ordering: (weight, qubit indices, axes)."""
        return (
            self.weight,
            tuple(qubit for qubit, _ in self.axes),
            tuple(AXIS_ORDER[PauliAxis(axis)] for _, axis in self.axes),
        )

    @property
    def x_mask(self) -> int:
        """Bit mask of qubits carrying X or Y."""
        return sum(1 << qubit for qubit, axis in self.axes if axis in (PauliAxis.X, PauliAxis.Y))

    @property
    def z_mask(self) -> int:
        """Bit mask of qubits carrying Z or Y."""
        return sum(1 << qubit for qubit, axis in self.axes if axis in (PauliAxis.Z, PauliAxis.Y))

    @property
    def n_y(self) -> int:
        return sum(1 for _, axis in self.axes if axis == PauliAxis.Y)

    @property
    def phase_vector(self) -> NDArray[np.complex128]:
        """Per-basis-state phase i^{n_Y} (-1)^{popcount(i & z)}."""
        return _phase_vector(self.n_qubits, self.z_mask, self.n_y)

    @property
    def flip_indices(self) -> NDArray[np.int64]:
        """Gather indices i ^ x; an involution."""
        return _flip_indices(self.n_qubits, self.x_mask)

    def __str__(self) -> str:
        return self.label


class OperatorPool(FrozenRenyiModel):
    """Ordered candidate set of Pauli generators for ADAPT."""

    n_qubits: int = Field(ge=1, le=MAX_QUBITS, description="Register width of every element")
    elements: tuple[PauliString, ...] = Field(description="Pool elements in canonical order")

    @model_validator(mode="after")
    def validate_elements(self) -> "OperatorPool":
        """Reject duplicates, identities and width mismatches."""
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("Operator pool contains duplicate elements")
        for element in self.elements:
            if element.n_qubits != self.n_qubits:
                raise ValueError(f"Pool element {element.label} acts on {element.n_qubits} qubits, not {self.n_qubits}")
            if element.weight == 0:
                raise ValueError("Operator pool must not contain the identity")
        return self

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[PauliString]:  # type: ignore[override]
        return iter(self.elements)

    def __getitem__(self, index: int) -> PauliString:
        return self.elements[index]

    @property
    def labels(self) -> list[str]:
        """Text labels in pool order."""
        return [element.label for element in self.elements]


def pool_klocal(n_total: int, max_weight: int) -> OperatorPool:
    """Build every Pauli string of weight 1..max_weight on n_total qubits.

    Args:
        n_total: Register width (visible + hidden).
        max_weight: Locality cap, 1 or 2.

    Returns:
        OperatorPool: 3n + 9*C(n, 2) elements for max_weight=2, canonically ordered.
    """
    if max_weight not in (1, 2):
        raise ParameterError(f"max_weight must be 1 or 2, got {max_weight}")
    if not 1 <= n_total <= MAX_QUBITS:
        raise ParameterError(f"n_total must be in [1, {MAX_QUBITS}], got {n_total}")

    elements = []
    for weight in range(1, max_weight + 1):
        for qubits in itertools.combinations(range(n_total), weight):
            for axes in itertools.product(PauliAxis, repeat=weight):
                elements.append(PauliString(n_qubits=n_total, axes=tuple(zip(qubits, axes, strict=True))))
    elements.sort(key=lambda p: p.sort_key)
    return OperatorPool(n_qubits=n_total, elements=tuple(elements))


def to_matrix(p: PauliString, n_total: int) -> NDArray[np.complex128]:
    """Dense 2^n x 2^n matrix of a Pauli string (kron with qubit 0 as the rightmost factor)."""
    if n_total > MAX_QUBITS:
        raise CapacityError(f"Dense matrices are limited to {MAX_QUBITS} qubits, got {n_total}")
    if p.n_qubits != n_total:
        raise ParameterError(f"Pauli string acts on {p.n_qubits} qubits, expected {n_total}")
    factors = dict(p.axes)
    identity = np.eye(2, dtype=complex)
    single = [_SINGLE_QUBIT[PauliAxis(factors[q])] if q in factors else identity for q in reversed(range(n_total))]
    return reduce(np.kron, single, np.eye(1, dtype=complex))


def _check_dimension(amplitudes: NDArray[np.complex128], p: PauliString) -> None:
    if amplitudes.shape != (1 << p.n_qubits,):
        raise ParameterError(f"State of shape {amplitudes.shape} does not match a {p.n_qubits}-qubit Pauli string")


def apply_pauli_vector(amplitudes: NDArray[np.complex128], p: PauliString) -> NDArray[np.complex128]:
    """Return P|psi> for a raw amplitude vector."""
    _check_dimension(amplitudes, p)
    return (p.phase_vector * amplitudes)[p.flip_indices]


def apply_rotation_vector(amplitudes: NDArray[np.complex128], p: PauliString, theta: float) -> NDArray[np.complex128]:
    """Return exp(-i theta P)|psi> = cos(theta)|psi> - i sin(theta) P|psi> for a raw amplitude vector."""
    return np.cos(theta) * amplitudes - 1j * np.sin(theta) * apply_pauli_vector(amplitudes, p)


def apply_pauli(state: "Statevector", p: PauliString) -> "Statevector":
    """Apply a Pauli string to a statevector."""
    return state.evolve(apply_pauli_vector(state.amplitudes, p))


def apply_rotation(state: "Statevector", p: PauliString, theta: float) -> "Statevector":
    """Apply the Pauli rotation exp(-i theta P) to a statevector."""
    return state.evolve(apply_rotation_vector(state.amplitudes, p, theta))
