"""Unit tests for dense Hermitian linear algebra."""

import numpy as np
import pytest

from renyi_adapt.simulation.linalg import (
    clamp_spectrum,
    eigh,
    hermitian_fn,
    hermitize,
    inverse,
    is_hermitian,
    partial_trace_hidden,
    pinv_power,
    psd_sqrt,
    reduced_from_statevector,
    trace_product,
)
from renyi_adapt.utils.errors import ParameterError, SingularityError
from tests.conftest import random_density, random_statevector


def random_hermitian(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return hermitize(a)


class TestEigh:
    """Test cases for the spectral decomposition."""

    def test_diagonal(self):
        """Test eigenvalues of diag(1, -1) come back ascending."""
        system = eigh(np.diag([1.0, -1.0]).astype(complex))
        np.testing.assert_allclose(system.eigenvalues, [-1.0, 1.0])

    def test_pauli_x(self):
        """Test the eigenvectors of X up to phase."""
        system = eigh(np.array([[0, 1], [1, 0]], dtype=complex))
        np.testing.assert_allclose(system.eigenvalues, [-1.0, 1.0], atol=1e-15)
        minus = np.array([1, -1]) / np.sqrt(2)
        assert abs(abs(np.vdot(minus, system.eigenvectors[:, 0])) - 1.0) < 1e-12

    def test_reconstruction(self):
        """Test V diag(l) V^dagger reproduces a random 8x8 Hermitian matrix."""
        m = random_hermitian(8, seed=0)
        assert np.max(np.abs(eigh(m).reconstruct() - m)) < 1e-10

    def test_rejects_non_hermitian(self):
        """Test that a non-Hermitian input raises a parameter error."""
        with pytest.raises(ParameterError):
            eigh(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_rejects_non_square(self):
        """Test that a non-square input raises a parameter error."""
        with pytest.raises(ParameterError):
            eigh(np.zeros((2, 3), dtype=complex))


class TestMatrixFunctions:
    """Test cases for hermitian_fn and its specializations."""

    def test_exp_on_diagonal(self):
        """Test exp on diag(0, ln 2) gives diag(1, 2)."""
        out = hermitian_fn(np.diag([0.0, np.log(2.0)]).astype(complex), np.exp)
        np.testing.assert_allclose(out, np.diag([1.0, 2.0]), atol=1e-14)

    def test_sqrt_round_trip(self):
        """Test sqrt(M)^2 = M for a random PSD matrix."""
        rho = random_density(3, seed=1).matrix
        root = psd_sqrt(rho)
        np.testing.assert_allclose(root @ root, rho, atol=1e-12)
        assert is_hermitian(root)

    def test_inverse_product(self):
        """Test M M^-1 = I for a full-rank state."""
        rho = random_density(2, seed=2).matrix
        np.testing.assert_allclose(rho @ inverse(rho), np.eye(4), atol=1e-9)

    def test_non_finite_map_raises(self):
        """Test that a non-finite image names the offending eigenvalue."""
        with pytest.raises(SingularityError) as exc_info:
            hermitian_fn(np.diag([-1.0, 4.0]).astype(complex), np.log)
        assert exc_info.value.eigenvalue == pytest.approx(-1.0)

    def test_sqrt_of_indefinite_matrix_raises(self):
        """Test that a genuinely negative eigenvalue is not clamped."""
        with pytest.raises(SingularityError):
            psd_sqrt(np.diag([1.0, -0.5]).astype(complex))


class TestClampAndPinv:
    """Test cases for the PSD clamp and the support pseudo-inverse."""

    def test_clamp_round_off(self):
        """Test that round-off negatives are zeroed."""
        np.testing.assert_array_equal(clamp_spectrum(np.array([-1e-12, 0.5])), [0.0, 0.5])

    def test_clamp_rejects_real_negatives(self):
        """Test that eigenvalues below -1e-10 raise."""
        with pytest.raises(SingularityError):
            clamp_spectrum(np.array([-1e-3, 1.0]))

    def test_pinv_power_rank_deficient(self):
        """Test M^{-1/2} on the support of diag(4, 0)."""
        out, rank_deficient = pinv_power(np.diag([4.0, 0.0]).astype(complex), -0.5)
        assert rank_deficient
        np.testing.assert_allclose(out, np.diag([0.5, 0.0]), atol=1e-14)

    def test_pinv_power_full_rank(self):
        """Test that a full-rank input is flagged as such and matches the inverse square root."""
        rho = random_density(2, seed=3).matrix
        out, rank_deficient = pinv_power(rho, -0.5)
        assert not rank_deficient
        np.testing.assert_allclose(out @ out @ rho, np.eye(4), atol=1e-9)


class TestPartialTrace:
    """Test cases for tracing out the hidden register."""

    def test_product_operator(self):
        """Test Tr_h(B (x) A) = Tr(B) A with hidden as the high bits."""
        a = random_hermitian(4, seed=4)
        b = random_hermitian(2, seed=5)
        np.testing.assert_allclose(partial_trace_hidden(np.kron(b, a), 2, 1), np.trace(b) * a, atol=1e-12)

    def test_bell_pair(self):
        """Test that a visible/hidden Bell pair reduces to I/2."""
        psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        np.testing.assert_allclose(reduced_from_statevector(psi, 1, 1), np.eye(2) / 2)

    def test_basis_state(self):
        """Test that |00> reduces to |0><0|."""
        psi = np.array([1, 0, 0, 0], dtype=complex)
        np.testing.assert_allclose(reduced_from_statevector(psi, 1, 1), np.diag([1.0, 0.0]))

    def test_reshape_matches_oracle(self):
        """Test the reshape contraction against an explicit index sum on 3+3 qubits."""
        psi = random_statevector(6, seed=6).amplitudes
        d_v, d_h = 8, 8
        expected = np.zeros((d_v, d_v), dtype=complex)
        for a in range(d_v):
            for b in range(d_v):
                expected[a, b] = sum(psi[h * d_v + a] * np.conj(psi[h * d_v + b]) for h in range(d_h))
        np.testing.assert_allclose(reduced_from_statevector(psi, 3, 3), expected, atol=1e-14)
        np.testing.assert_allclose(partial_trace_hidden(np.outer(psi, psi.conj()), 3, 3), expected, atol=1e-14)

    def test_trace_preserving(self):
        """Test that the partial trace keeps the trace of a Hermitian input."""
        m = random_hermitian(8, seed=7)
        assert np.trace(partial_trace_hidden(m, 2, 1)) == pytest.approx(np.trace(m))

    def test_dimension_mismatch(self):
        """Test that shapes must match the declared registers."""
        with pytest.raises(ParameterError):
            partial_trace_hidden(np.eye(8, dtype=complex), 1, 1)
        with pytest.raises(ParameterError):
            reduced_from_statevector(np.ones(8, dtype=complex), 1, 1)


class TestTraceProduct:
    """Test cases for trace_product."""

    def test_matches_trace_of_product(self):
        """Test Tr(AB) without the product."""
        a, b = random_hermitian(4, seed=8), random_hermitian(4, seed=9)
        assert trace_product(a, b) == pytest.approx(complex(np.trace(a @ b)))
