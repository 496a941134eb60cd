"""Parameterized Pauli-rotation circuits acting on a purified reference state.

The circuit is U(theta) = exp(-i theta_N A_N) ... exp(-i theta_1 A_1), so A_1 acts first. Trial
densities are visible reductions of U(theta)|ref>.
"""

import numpy as np
from numpy.typing import NDArray
from pydantic import Field, model_validator

from renyi_adapt.models.base import BaseRenyiModel
from renyi_adapt.simulation.linalg import ComplexMatrix, reduced_from_statevector
from renyi_adapt.simulation.pauli import PauliString, apply_pauli_vector, apply_rotation_vector
from renyi_adapt.simulation.states import DensityOperator, Statevector
from renyi_adapt.utils.errors import ParameterError


class Ansatz(BaseRenyiModel):
    """Immutable snapshot of generators and parameters over a fixed reference."""

    n_visible: int = Field(ge=1, description="Number of visible qubits")
    n_hidden: int = Field(ge=0, description="Number of hidden qubits")
    reference: Statevector = Field(description="Reference state on visible+hidden qubits")
    generators: tuple[PauliString, ...] = Field(default=(), description="Generators, first applied first")
    params: tuple[float, ...] = Field(default=(), description="Rotation angles, one per generator")

    @model_validator(mode="after")
    def validate_circuit(self) -> "Ansatz":
        """Generators and parameters pair up and act on the whole register."""
        if len(self.generators) != len(self.params):
            raise ValueError(f"{len(self.generators)} generators but {len(self.params)} parameters")
        if self.reference.n_qubits != self.n_total:
            raise ValueError(f"Reference spans {self.reference.n_qubits} qubits, expected {self.n_total}")
        for generator in self.generators:
            if generator.n_qubits != self.n_total:
                raise ValueError(f"Generator {generator.label} acts on {generator.n_qubits} qubits, not {self.n_total}")
        return self

    @property
    def n_total(self) -> int:
        return self.n_visible + self.n_hidden

    @property
    def n_params(self) -> int:
        return len(self.params)

    @property
    def theta(self) -> NDArray[np.float64]:
        return np.asarray(self.params, dtype=float)

    def with_params(self, params: NDArray[np.float64] | tuple[float, ...] | list[float]) -> "Ansatz":
        """Same circuit structure with new angles."""
        values = tuple(float(t) for t in params)
        if len(values) != self.n_params:
            raise ParameterError(f"Expected {self.n_params} parameters, got {len(values)}")
        return self.model_copy(update={"params": values})

    def amplitudes(self, params: NDArray[np.float64] | None = None) -> NDArray[np.complex128]:
        """Raw amplitudes of U(theta)|ref>; ``params`` overrides the stored angles."""
        theta = self.theta if params is None else np.asarray(params, dtype=float)
        if theta.shape != (self.n_params,):
            raise ParameterError(f"Expected {self.n_params} parameters, got shape {theta.shape}")
        psi = self.reference.amplitudes
        for generator, angle in zip(self.generators, theta, strict=True):
            psi = apply_rotation_vector(psi, generator, float(angle))
        return psi

    def to_lines(self) -> list[str]:
        """Serialize as ``"<generator>, <theta>"`` lines at full precision."""
        return [f"{g.label}, {theta:.17g}" for g, theta in zip(self.generators, self.params, strict=True)]

    @classmethod
    def from_lines(cls, lines: list[str], reference: Statevector, n_visible: int) -> "Ansatz":
        """Inverse of :meth:`to_lines` over a given reference."""
        n_total = reference.n_qubits
        generators, params = [], []
        for line in lines:
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            label, _, value = line.rpartition(",")
            if not label:
                raise ParameterError(f"Malformed ansatz line: '{line}'")
            generators.append(PauliString.from_label(label.strip(), n_total))
            params.append(float(value))
        return cls(
            n_visible=n_visible,
            n_hidden=n_total - n_visible,
            reference=reference,
            generators=tuple(generators),
            params=tuple(params),
        )


def empty_ansatz(reference: Statevector, n_visible: int) -> Ansatz:
    """Ansatz without generators over ``reference``."""
    return Ansatz(n_visible=n_visible, n_hidden=reference.n_qubits - n_visible, reference=reference)


def evaluate(a: Ansatz) -> Statevector:
    """psi(theta) = exp(-i theta_N A_N) ... exp(-i theta_1 A_1)|ref>."""
    return a.reference.evolve(a.amplitudes())


def trial_density(a: Ansatz) -> DensityOperator:
    """Visible reduced density of the circuit output."""
    return DensityOperator(
        n_qubits=a.n_visible, matrix=reduced_from_statevector(a.amplitudes(), a.n_visible, a.n_hidden)
    )


def append(a: Ansatz, g: PauliString, theta0: float = 0.0) -> Ansatz:
    """New ansatz with ``g`` applied last at angle ``theta0``; earlier angles are kept."""
    if g.n_qubits != a.n_total:
        raise ParameterError(f"Generator {g.label} acts on {g.n_qubits} qubits, expected {a.n_total}")
    return a.model_copy(update={"generators": (*a.generators, g), "params": (*a.params, float(theta0))})


def density_derivative_from_state(
    d_psi: NDArray[np.complex128], psi: NDArray[np.complex128], n_visible: int, n_hidden: int
) -> ComplexMatrix:
    """Tr_h(|d_psi><psi| + |psi><d_psi|) through the (hidden, visible) reshape."""
    d_v, d_h = 1 << n_visible, 1 << n_hidden
    half = d_psi.reshape(d_h, d_v).T @ psi.reshape(d_h, d_v).conj()
    return half + half.conj().T


def state_derivatives(a: Ansatz) -> list[NDArray[np.complex128]]:
    """|d_k psi> = U_{>k} (-i A_k) U_{<=k}|ref> for every parameter.

    One forward sweep caches the prefix states; each derivative then applies its suffix.
    """
    prefix = []
    psi = a.reference.amplitudes
    for generator, theta in zip(a.generators, a.params, strict=True):
        psi = apply_rotation_vector(psi, generator, theta)
        prefix.append(psi)

    derivatives = []
    for k, generator in enumerate(a.generators):
        d_psi = -1j * apply_pauli_vector(prefix[k], generator)
        for later, theta in zip(a.generators[k + 1 :], a.params[k + 1 :], strict=True):
            d_psi = apply_rotation_vector(d_psi, later, theta)
        derivatives.append(d_psi)
    return derivatives


def density_derivatives(a: Ansatz) -> list[ComplexMatrix]:
    """d sigma / d theta_k for every parameter, as Hermitian traceless matrices."""
    psi = a.amplitudes()
    return [density_derivative_from_state(d, psi, a.n_visible, a.n_hidden) for d in state_derivatives(a)]
