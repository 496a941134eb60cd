"""Exact statevector simulation: Pauli kernels, states, thermal targets, ansatz, losses and BFGS."""
