"""Dense Hermitian linear algebra.

Every matrix function goes through one eigendecomposition (``scipy.linalg.eigh``): square roots,
exponentials, inverses and pseudo-inverses all share the same code path.
"""

import numpy as np
import scipy.linalg as la
from collections.abc import Callable
from numpy.typing import NDArray
from pydantic import Field, model_validator

from renyi_adapt.models.base import BaseRenyiModel
from renyi_adapt.utils.errors import CapacityError, ConvergenceError, ParameterError, SingularityError


ComplexMatrix = NDArray[np.complex128]

MAX_DIM = 4096
HERMITIAN_TOL = 1e-10
PSD_CLAMP_TOL = 1e-10
PINV_RELATIVE_CUTOFF = 1e-12


class EigenSystem(BaseRenyiModel):
    """Spectral decomposition M = V diag(lambda) V^dagger with ascending eigenvalues."""

    eigenvalues: NDArray[np.float64] = Field(description="Real eigenvalues, ascending")
    eigenvectors: ComplexMatrix = Field(description="Unitary matrix whose columns are eigenvectors")

    @model_validator(mode="after")
    def validate_shapes(self) -> "EigenSystem":
        """Eigenvector columns must match the eigenvalue count."""
        dim = self.eigenvalues.shape[0]
        if self.eigenvectors.shape != (dim, dim):
            raise ValueError(f"Eigenvector matrix {self.eigenvectors.shape} does not match {dim} eigenvalues")
        return self

    def reconstruct(self, values: NDArray[np.float64] | None = None) -> ComplexMatrix:
        """Return V diag(values) V^dagger (the original matrix when ``values`` is None)."""
        spectrum = self.eigenvalues if values is None else values
        return (self.eigenvectors * spectrum) @ self.eigenvectors.conj().T


def hermitize(m: ComplexMatrix) -> ComplexMatrix:
    """Return (M + M^dagger) / 2."""
    return 0.5 * (m + m.conj().T)


def is_hermitian(m: ComplexMatrix, tol: float = HERMITIAN_TOL) -> bool:
    """Check the Hermitian tag within a max-norm tolerance."""
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) < tol)


def _check_square(m: ComplexMatrix) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ParameterError(f"Expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise CapacityError(f"Matrix dimension {m.shape[0]} exceeds the {MAX_DIM} cap")


def eigh(m: ComplexMatrix) -> EigenSystem:
    """Full spectral decomposition of a Hermitian matrix.

    Args:
        m: Hermitian matrix (within 1e-10 max-norm).

    Returns:
        EigenSystem: Ascending eigenvalues and unitary eigenvectors.
    """
    _check_square(m)
    if not is_hermitian(m):
        raise ParameterError("eigh requires a Hermitian matrix")
    try:
        values, vectors = la.eigh(hermitize(np.asarray(m, dtype=complex)))
    except la.LinAlgError as e:
        raise ConvergenceError(f"Eigendecomposition of a {m.shape[0]}x{m.shape[0]} matrix did not converge: {e}") from e
    return EigenSystem(eigenvalues=np.asarray(values, dtype=float), eigenvectors=vectors)


def hermitian_fn(m: ComplexMatrix, f: Callable[[NDArray[np.float64]], NDArray[np.float64]]) -> ComplexMatrix:
    """Apply a real scalar map to the spectrum of a Hermitian matrix.

    Args:
        m: Hermitian matrix.
        f: Vectorized real map evaluated on the eigenvalues.

    Returns:
        ComplexMatrix: V diag(f(lambda)) V^dagger.
    """
    system = eigh(m)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        mapped = np.asarray(f(system.eigenvalues), dtype=float)
    bad = ~np.isfinite(mapped)
    if bad.any():
        eigenvalue = float(system.eigenvalues[np.argmax(bad)])
        raise SingularityError(f"Matrix function is not finite at eigenvalue {eigenvalue:.6e}", eigenvalue=eigenvalue)
    return hermitize(system.reconstruct(mapped))


def clamp_spectrum(eigenvalues: NDArray[np.float64], tol: float = PSD_CLAMP_TOL) -> NDArray[np.float64]:
    """Zero round-off negatives in [-tol, 0); anything below -tol is a genuine PSD violation."""
    lowest = float(eigenvalues.min(initial=0.0))
    if lowest < -tol:
        raise SingularityError(f"Matrix is not positive semidefinite: eigenvalue {lowest:.6e}", eigenvalue=lowest)
    return np.clip(eigenvalues, 0.0, None)


def psd_sqrt(m: ComplexMatrix) -> ComplexMatrix:
    """Principal square root of a PSD matrix, with the round-off clamp."""
    system = eigh(m)
    return hermitize(system.reconstruct(np.sqrt(clamp_spectrum(system.eigenvalues))))


def inverse(m: ComplexMatrix) -> ComplexMatrix:
    """Inverse of a full-rank Hermitian matrix through its spectrum."""
    return hermitian_fn(m, lambda x: np.where(x == 0.0, np.inf, 1.0 / x))


def pinv_power(m: ComplexMatrix, power: float) -> tuple[ComplexMatrix, bool]:
    """Pseudo-inverse power M^{power} on the support of a PSD matrix.

    Eigenvalues at or below 1e-12 * lambda_max are treated as zero.

    Returns:
        Tuple of (matrix, rank_deficient).
    """
    system = eigh(m)
    values = clamp_spectrum(system.eigenvalues)
    cutoff = PINV_RELATIVE_CUTOFF * float(values.max(initial=0.0))
    support = values > cutoff
    mapped = np.zeros_like(values)
    mapped[support] = values[support] ** power
    return hermitize(system.reconstruct(mapped)), bool(not support.all())


def partial_trace_hidden(rho_full: ComplexMatrix, n_visible: int, n_hidden: int) -> ComplexMatrix:
    """Trace out the hidden register (high bits) of a visible+hidden operator."""
    d_v, d_h = 1 << n_visible, 1 << n_hidden
    if rho_full.shape != (d_v * d_h, d_v * d_h):
        raise ParameterError(f"Operator of shape {rho_full.shape} does not act on {n_visible}+{n_hidden} qubits")
    # row index = h * d_v + v
    return np.einsum("iaib->ab", rho_full.reshape(d_h, d_v, d_h, d_v))


def reduced_from_statevector(psi: NDArray[np.complex128], n_visible: int, n_hidden: int) -> ComplexMatrix:
    """Visible reduced density of a pure state without forming the outer product."""
    d_v, d_h = 1 << n_visible, 1 << n_hidden
    if psi.shape != (d_v * d_h,):
        raise ParameterError(f"Statevector of shape {psi.shape} does not span {n_visible}+{n_hidden} qubits")
    amplitudes = psi.reshape(d_h, d_v)
    return amplitudes.T @ amplitudes.conj()


def trace_product(a: ComplexMatrix, b: ComplexMatrix) -> complex:
    """Tr(A B) without forming the product."""
    return complex(np.sum(a * b.T))
