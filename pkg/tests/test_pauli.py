"""Unit tests for Pauli strings, pools and statevector kernels."""

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.linalg import expm

from renyi_adapt.models.base import PauliAxis
from renyi_adapt.simulation.pauli import (
    PauliString,
    apply_pauli,
    apply_pauli_vector,
    apply_rotation,
    apply_rotation_vector,
    pool_klocal,
    to_matrix,
)
from renyi_adapt.simulation.states import Statevector
from renyi_adapt.utils.errors import CapacityError, ParameterError
from tests.conftest import random_statevector


X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


class TestPauliString:
    """Test cases for PauliString."""

    def test_from_label(self):
        """Test parsing and printing the text form."""
        p = PauliString.from_label("Z3 X0", 4)
        assert p.label == "X0 Z3"
        assert p.weight == 2
        assert p.axes == ((0, PauliAxis.X), (3, PauliAxis.Z))

    def test_identity_label(self):
        """Test the identity string."""
        p = PauliString.from_label("I", 2)
        assert p.weight == 0
        assert p.label == "I"

    @pytest.mark.parametrize("label", ["Q0", "X", "Xa"])
    def test_malformed_label(self, label):
        """Test that malformed tokens raise a parameter error."""
        with pytest.raises(ParameterError):
            PauliString.from_label(label, 2)

    def test_repeated_qubit_rejected(self):
        """Test that a qubit cannot appear twice."""
        with pytest.raises(ValidationError):
            PauliString(n_qubits=2, axes=((0, PauliAxis.X), (0, PauliAxis.Z)))

    def test_qubit_outside_register_rejected(self):
        """Test that support must fit the register."""
        with pytest.raises(ValidationError):
            PauliString.from_label("X2", 2)

    def test_masks(self):
        """Test the X/Z masks and Y count."""
        p = PauliString.from_label("X0 Y1 Z2", 3)
        assert p.x_mask == 0b011
        assert p.z_mask == 0b110
        assert p.n_y == 1

    def test_structural_equality_and_hash(self):
        """Test that equal strings compare and hash equal."""
        a = PauliString.from_label("Y1 X0", 2)
        b = PauliString.from_label("X0 Y1", 2)
        assert a == b
        assert len({a, b}) == 1


class TestPool:
    """Test cases for pool_klocal."""

    @pytest.mark.parametrize(("n_total", "max_weight", "size"), [(6, 2, 153), (1, 1, 3), (4, 2, 66), (2, 2, 15)])
    def test_pool_size(self, n_total, max_weight, size):
        """Test the 3n + 9 C(n, 2) pool size."""
        assert len(pool_klocal(n_total, max_weight)) == size

    def test_single_qubit_pool(self):
        """Test the one-qubit pool contents and order."""
        assert pool_klocal(1, 1).labels == ["X0", "Y0", "Z0"]

    def test_canonical_order(self):
        """Test that weight-1 strings come first, then pairs by qubits and axes."""
        labels = pool_klocal(2, 2).labels
        assert labels[:6] == ["X0", "Y0", "Z0", "X1", "Y1", "Z1"]
        assert labels[6:9] == ["X0 X1", "X0 Y1", "X0 Z1"]
        assert labels[-1] == "Z0 Z1"

    def test_pool_is_deterministic(self):
        """Test that repeated construction gives the same order."""
        assert pool_klocal(3, 2).labels == pool_klocal(3, 2).labels

    @pytest.mark.parametrize(("n_total", "max_weight"), [(2, 3), (2, 0), (13, 2), (0, 1)])
    def test_invalid_arguments(self, n_total, max_weight):
        """Test that out-of-range arguments raise a parameter error."""
        with pytest.raises(ParameterError):
            pool_klocal(n_total, max_weight)


class TestToMatrix:
    """Test cases for dense Pauli matrices."""

    def test_single_z(self):
        """Test Z on one qubit."""
        np.testing.assert_array_equal(to_matrix(PauliString.from_label("Z0", 1), 1), Z)

    def test_qubit_zero_is_rightmost_factor(self):
        """Test X0 on two qubits flips bit 0 only."""
        matrix = to_matrix(PauliString.from_label("X0", 2), 2)
        np.testing.assert_array_equal(matrix, np.kron(I2, X))
        for i in range(4):
            for j in range(4):
                assert matrix[i, j] == (1 if i ^ j == 1 else 0)

    def test_kron_oracle(self):
        """Test Y0 Z1 against an explicit tensor product."""
        np.testing.assert_array_equal(to_matrix(PauliString.from_label("Y0 Z1", 2), 2), np.kron(Z, Y))

    def test_width_mismatch(self):
        """Test that the register width must match."""
        with pytest.raises(ParameterError):
            to_matrix(PauliString.from_label("X0", 2), 3)

    def test_capacity(self):
        """Test the dense-matrix qubit cap."""
        with pytest.raises(CapacityError):
            to_matrix(PauliString.from_label("X0", 2), 13)


class TestKernels:
    """Test cases for the gather-based Pauli and rotation kernels."""

    def test_x_on_basis_state(self):
        """Test X0 |00> = |01>."""
        out = apply_pauli(Statevector.basis(2, 0), PauliString.from_label("X0", 2))
        np.testing.assert_array_equal(out.amplitudes, [0, 1, 0, 0])

    def test_phase_vector_signs(self):
        """Test phase vectors carry -1 and -i, never unsigned wraparound."""
        np.testing.assert_array_equal(PauliString.from_label("Z0", 1).phase_vector, [1, -1])
        np.testing.assert_array_equal(PauliString.from_label("Y0", 1).phase_vector, [1j, -1j])
        np.testing.assert_array_equal(PauliString.from_label("Z0 Z1", 2).phase_vector, [1, -1, -1, 1])

    def test_rotation_preserves_norm(self):
        """Test exp(-i theta P) keeps unit norm for Z and Y factors."""
        psi = random_statevector(3, seed=4).amplitudes
        for label in ("Z0", "Y1", "Z0 Y2", "Y0 Y1"):
            out = apply_rotation_vector(psi, PauliString.from_label(label, 3), 0.3)
            assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-14)

    def test_z_on_plus(self):
        """Test Z0 |+> = |->."""
        plus = Statevector(n_qubits=1, amplitudes=np.array([1, 1]) / np.sqrt(2))
        out = apply_pauli(plus, PauliString.from_label("Z0", 1))
        np.testing.assert_allclose(out.amplitudes, np.array([1, -1]) / np.sqrt(2))

    def test_pool_matches_dense_oracle(self):
        """Test every 3-qubit pool element against its dense matrix."""
        psi = random_statevector(3, seed=1).amplitudes
        for p in pool_klocal(3, 2):
            np.testing.assert_allclose(apply_pauli_vector(psi, p), to_matrix(p, 3) @ psi, atol=1e-14)

    def test_random_four_qubit_string(self):
        """Test a weight-4 string on four qubits."""
        p = PauliString.from_label("X0 Y1 Z2 Y3", 4)
        psi = random_statevector(4, seed=2).amplitudes
        np.testing.assert_allclose(apply_pauli_vector(psi, p), to_matrix(p, 4) @ psi, atol=1e-14)

    def test_pauli_is_involution(self):
        """Test P P psi = psi."""
        p = PauliString.from_label("Y0 X2", 3)
        psi = random_statevector(3, seed=3).amplitudes
        np.testing.assert_allclose(apply_pauli_vector(apply_pauli_vector(psi, p), p), psi, atol=1e-14)

    def test_rotation_identity_at_zero(self):
        """Test exp(0) leaves the state unchanged."""
        state = random_statevector(2, seed=4)
        out = apply_rotation(state, PauliString.from_label("X0 Z1", 2), 0.0)
        np.testing.assert_allclose(out.amplitudes, state.amplitudes)

    def test_rotation_at_half_pi(self):
        """Test exp(-i pi/2 P) psi = -i P psi."""
        p = PauliString.from_label("Y1", 2)
        psi = random_statevector(2, seed=5).amplitudes
        np.testing.assert_allclose(apply_rotation_vector(psi, p, np.pi / 2), -1j * apply_pauli_vector(psi, p), atol=1e-15)

    def test_rotation_matches_expm(self):
        """Test the rotation against a dense matrix exponential."""
        p = PauliString.from_label("X0 Y2", 3)
        psi = random_statevector(3, seed=6).amplitudes
        theta = 0.734
        expected = expm(-1j * theta * to_matrix(p, 3)) @ psi
        np.testing.assert_allclose(apply_rotation_vector(psi, p, theta), expected, atol=1e-12)

    def test_dimension_mismatch(self):
        """Test that the state length must match the string's register."""
        with pytest.raises(ParameterError):
            apply_pauli_vector(np.ones(8, dtype=complex), PauliString.from_label("X0", 2))
