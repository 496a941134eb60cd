"""Loss functions for thermal-state preparation and their analytic gradients.

Every loss L(sigma) has a Hermitian weight W(sigma) with dL = Re Tr(W d sigma):

- overlap:  L = 1 - F(rho, sigma)^2,            W = -F sqrt(rho) M^{-1/2} sqrt(rho), M = sqrt(rho) sigma sqrt(rho)
- gibbs:    L = -Tr(rho_G sigma) + Tr(sigma^2)/2, W = sigma - rho_G
- renyi:    L = log Tr(sigma^2 rho^{-1}),          W = (sigma rho^{-1} + rho^{-1} sigma) / Tr(sigma^2 rho^{-1})

With d sigma = X + X^dagger and X = D^T Psi^* (D, Psi the (hidden, visible) reshapes of |d psi>
and |psi>), Re Tr(W d sigma) = 2 Re sum(D * (Psi^* W)). Full-circuit gradients use that contraction
in one backward adjoint sweep; pool gradients use it once per candidate with D = -i A psi.
"""

import numpy as np
from loguru import logger
from numpy.typing import NDArray
from pydantic import Field, model_validator

from renyi_adapt.models.base import BaseRenyiModel, LossKind
from renyi_adapt.simulation.ansatz import Ansatz, density_derivatives, trial_density
from renyi_adapt.simulation.linalg import (
    ComplexMatrix,
    eigh,
    hermitize,
    inverse,
    partial_trace_hidden,
    pinv_power,
    psd_sqrt,
    reduced_from_statevector,
    trace_product,
)
from renyi_adapt.simulation.pauli import OperatorPool, apply_pauli_vector, apply_rotation_vector, to_matrix
from renyi_adapt.simulation.states import DensityOperator, fidelity_from_sqrt
from renyi_adapt.simulation.thermal import ProblemInstance
from renyi_adapt.utils.errors import CapacityError, ParameterError, SingularityError


RENYI_MIN_EIGENVALUE = 1e-12
OVERLAP_FD_STEP = 1e-6
PARAMETER_SHIFT = np.pi / 4
COMMUTATOR_ORACLE_MAX_QUBITS = 4


class LossContext(BaseRenyiModel):
    """Target data for one loss, with the spectral quantities it needs precomputed."""

    kind: LossKind = Field(description="Which loss to evaluate")
    target_exact: DensityOperator = Field(description="Exact thermal state rho")
    target_for_loss: DensityOperator = Field(description="rho for overlap/renyi, Taylor rho_G for gibbs")
    sqrt_exact: ComplexMatrix = Field(description="sqrt(rho), used for the overlap loss and infidelity reports")
    inv_target: ComplexMatrix | None = Field(default=None, description="rho^-1, renyi only")
    scale: float = Field(default=1.0, gt=0.0, description="Positive multiplier on loss and gradients")

    @model_validator(mode="after")
    def validate_context(self) -> "LossContext":
        """Renyi needs the inverse target; registers must match."""
        if self.kind == LossKind.RENYI and self.inv_target is None:
            raise ValueError("Renyi loss requires the inverse target")
        if self.target_exact.n_qubits != self.target_for_loss.n_qubits:
            raise ValueError("Exact and loss targets act on different registers")
        return self

    @property
    def n_visible(self) -> int:
        return self.target_exact.n_qubits


def build_loss_context(kind: LossKind, instance: ProblemInstance, scale: float = 1.0) -> LossContext:
    """Prepare the loss context of ``kind`` for an instance.

    Raises:
        SingularityError: Renyi loss with a target whose smallest eigenvalue is <= 1e-12.
    """
    rho = instance.target_exact
    inv_target = None
    if kind == LossKind.RENYI:
        lowest = float(eigh(rho.matrix).eigenvalues[0])
        if lowest <= RENYI_MIN_EIGENVALUE:
            raise SingularityError(
                f"Renyi loss needs a full-rank target; smallest eigenvalue is {lowest:.3e}", eigenvalue=lowest
            )
        inv_target = inverse(rho.matrix)
    target_for_loss = instance.target_taylor if kind == LossKind.GIBBS else rho
    return LossContext(
        kind=kind,
        target_exact=rho,
        target_for_loss=target_for_loss,
        sqrt_exact=psd_sqrt(rho.matrix),
        inv_target=inv_target,
        scale=scale,
    )


def _sigma_matrix(sigma: DensityOperator | ComplexMatrix) -> ComplexMatrix:
    return sigma.matrix if isinstance(sigma, DensityOperator) else sigma


def _check_register(ctx: LossContext, sigma: ComplexMatrix) -> None:
    dim = 1 << ctx.n_visible
    if sigma.shape != (dim, dim):
        raise ParameterError(f"Trial density of shape {sigma.shape} does not match a {ctx.n_visible}-qubit target")


def loss_value(ctx: LossContext, sigma: DensityOperator | ComplexMatrix) -> float:
    """Scalar loss of ``ctx.kind`` at the trial density ``sigma`` (times ``ctx.scale``)."""
    s = _sigma_matrix(sigma)
    _check_register(ctx, s)
    match ctx.kind:
        case LossKind.OVERLAP:
            value = 1.0 - fidelity_from_sqrt(ctx.sqrt_exact, s) ** 2
        case LossKind.GIBBS:
            value = -trace_product(ctx.target_for_loss.matrix, s).real + 0.5 * trace_product(s, s).real
        case LossKind.RENYI:
            assert ctx.inv_target is not None
            value = float(np.log(trace_product(s @ s, ctx.inv_target).real))
    return ctx.scale * float(value)


def loss_floor(ctx: LossContext) -> float:
    """Loss value at the loss's own target: C(rho_G) = -Tr(rho_G^2)/2 for gibbs, 0 otherwise."""
    if ctx.kind == LossKind.GIBBS:
        rho_g = ctx.target_for_loss.matrix
        return ctx.scale * -0.5 * trace_product(rho_g, rho_g).real
    return 0.0


def infidelity_to_target(ctx: LossContext, sigma: DensityOperator | ComplexMatrix) -> float:
    """1 - F(rho, sigma)^2 against the exact thermal state, whatever the loss."""
    return 1.0 - fidelity_from_sqrt(ctx.sqrt_exact, _sigma_matrix(sigma)) ** 2


def loss_weight(ctx: LossContext, sigma: ComplexMatrix) -> tuple[ComplexMatrix, bool]:
    """Hermitian W with dL = Re Tr(W d sigma), and whether the overlap weight hit a rank-deficient M.

    The returned weight already includes ``ctx.scale``.
    """
    rank_deficient = False
    match ctx.kind:
        case LossKind.OVERLAP:
            sqrt_rho = ctx.sqrt_exact
            m = hermitize(sqrt_rho @ sigma @ sqrt_rho)
            m_inv_sqrt, rank_deficient = pinv_power(m, -0.5)
            f = fidelity_from_sqrt(sqrt_rho, sigma)
            weight = -f * (sqrt_rho @ m_inv_sqrt @ sqrt_rho)
        case LossKind.GIBBS:
            weight = sigma - ctx.target_for_loss.matrix
        case LossKind.RENYI:
            assert ctx.inv_target is not None
            product = sigma @ ctx.inv_target
            weight = (product + product.conj().T) / trace_product(product, sigma).real
    return ctx.scale * hermitize(weight), rank_deficient


def _adjoint_covector(
    weight: ComplexMatrix, psi: NDArray[np.complex128], n_visible: int, n_hidden: int
) -> NDArray[np.complex128]:
    """Flattened Psi^* W, so that Re Tr(W d sigma) = 2 Re sum(phi * d_psi)."""
    d_v, d_h = 1 << n_visible, 1 << n_hidden
    return (psi.reshape(d_h, d_v).conj() @ weight).reshape(-1)


def _finite_difference_gradient(ctx: LossContext, a: Ansatz, step: float = OVERLAP_FD_STEP) -> NDArray[np.float64]:
    theta = a.theta
    grad = np.zeros_like(theta)
    for k in range(theta.size):
        shift = np.zeros_like(theta)
        shift[k] = step
        up = reduced_from_statevector(a.amplitudes(theta + shift), a.n_visible, a.n_hidden)
        down = reduced_from_statevector(a.amplitudes(theta - shift), a.n_visible, a.n_hidden)
        grad[k] = (loss_value(ctx, up) - loss_value(ctx, down)) / (2 * step)
    return grad


def loss_gradient(ctx: LossContext, a: Ansatz) -> NDArray[np.float64]:
    """dL/d theta_k for every parameter.

    One backward sweep: with chi = conj(Psi^* W) and psi_k the state after gate k,
    grad_k = 2 Re <U_{>k}^dagger chi | -i A_k psi_k>, and both vectors are rolled back one gate
    at a time. An overlap loss with a rank-deficient M falls back to central differences.
    """
    if a.n_visible != ctx.n_visible:
        raise ParameterError(f"Ansatz has {a.n_visible} visible qubits, loss expects {ctx.n_visible}")
    if a.n_params == 0:
        return np.zeros(0)

    psi = a.amplitudes()
    sigma = reduced_from_statevector(psi, a.n_visible, a.n_hidden)
    weight, rank_deficient = loss_weight(ctx, sigma)
    if rank_deficient:
        logger.warning(f"Overlap gradient: M is rank deficient, using central differences (step {OVERLAP_FD_STEP})")
        return _finite_difference_gradient(ctx, a)

    chi = _adjoint_covector(weight, psi, a.n_visible, a.n_hidden).conj()
    grad = np.zeros(a.n_params)
    for k in range(a.n_params - 1, -1, -1):
        generator, theta = a.generators[k], a.params[k]
        grad[k] = 2.0 * np.vdot(chi, -1j * apply_pauli_vector(psi, generator)).real
        psi = apply_rotation_vector(psi, generator, -theta)
        chi = apply_rotation_vector(chi, generator, -theta)
    return grad


def pool_gradients(ctx: LossContext, a: Ansatz, pool: OperatorPool) -> NDArray[np.float64]:
    """Derivative at theta_new = 0 of the loss after appending each pool element, in pool order."""
    if pool.n_qubits != a.n_total:
        raise ParameterError(f"Pool acts on {pool.n_qubits} qubits, ansatz on {a.n_total}")
    psi = a.amplitudes()
    sigma = reduced_from_statevector(psi, a.n_visible, a.n_hidden)
    weight, rank_deficient = loss_weight(ctx, sigma)
    grads = np.zeros(len(pool))

    if rank_deficient:
        logger.warning("Overlap pool gradients: M is rank deficient, using central differences")
        for j, candidate in enumerate(pool):
            up, down = (
                reduced_from_statevector(apply_rotation_vector(psi, candidate, s), a.n_visible, a.n_hidden)
                for s in (OVERLAP_FD_STEP, -OVERLAP_FD_STEP)
            )
            grads[j] = (loss_value(ctx, up) - loss_value(ctx, down)) / (2 * OVERLAP_FD_STEP)
        return grads

    phi = _adjoint_covector(weight, psi, a.n_visible, a.n_hidden)
    for j, candidate in enumerate(pool):
        grads[j] = 2.0 * np.sum(phi * (-1j * apply_pauli_vector(psi, candidate))).real
    return grads


def grad_infinity_norm(g: NDArray[np.float64] | list[float]) -> float:
    """max |g_i|, 0 for an empty vector."""
    values = np.abs(np.asarray(g, dtype=float))
    return float(values.max(initial=0.0))


def gibbs_parameter_shift_gradient(ctx: LossContext, a: Ansatz) -> NDArray[np.float64]:
    """Gibbs gradient from two shifted circuits per parameter.

    Uses C'(theta', theta) = -Tr(rho_G sigma(theta')) + Tr(sigma(theta') sigma(theta)), which is
    linear in sigma(theta'), and the shift rule r [C'(theta + pi/4r) - C'(theta - pi/4r)] with r = 1.
    """
    if ctx.kind != LossKind.GIBBS:
        raise ParameterError(f"Parameter-shift gradient is defined for the gibbs loss, not {ctx.kind}")
    rho_g = ctx.target_for_loss.matrix
    sigma = trial_density(a).matrix
    theta = a.theta
    r = 1.0

    def auxiliary(shifted: NDArray[np.float64]) -> float:
        s = reduced_from_statevector(a.amplitudes(shifted), a.n_visible, a.n_hidden)
        return -trace_product(rho_g, s).real + trace_product(s, sigma).real

    grad = np.zeros_like(theta)
    for k in range(theta.size):
        shift = np.zeros_like(theta)
        shift[k] = PARAMETER_SHIFT / r
        grad[k] = r * (auxiliary(theta + shift) - auxiliary(theta - shift))
    return ctx.scale * grad


def renyi_gradient_commutator(ctx: LossContext, a: Ansatz) -> NDArray[np.float64]:
    """Dense-unitary Renyi gradient for small registers.

    d sigma_k = -i Tr_h [H_k, |psi><psi|] with H_k = U_{>k} A_k U_{>k}^dagger, contracted as
    Tr({d sigma_k, sigma} rho^-1) / Tr(sigma^2 rho^-1).
    """
    if ctx.kind != LossKind.RENYI:
        raise ParameterError(f"Commutator gradient is defined for the renyi loss, not {ctx.kind}")
    if a.n_total > COMMUTATOR_ORACLE_MAX_QUBITS:
        raise CapacityError(f"Dense commutator gradient is limited to {COMMUTATOR_ORACLE_MAX_QUBITS} qubits")
    assert ctx.inv_target is not None

    dim = 1 << a.n_total
    identity = np.eye(dim, dtype=complex)
    generators = [to_matrix(g, a.n_total) for g in a.generators]
    gates = [np.cos(t) * identity - 1j * np.sin(t) * g for g, t in zip(generators, a.params, strict=True)]

    psi = a.amplitudes()
    projector = np.outer(psi, psi.conj())
    sigma = partial_trace_hidden(projector, a.n_visible, a.n_hidden)
    normalization = trace_product(sigma @ sigma, ctx.inv_target).real

    grad = np.zeros(a.n_params)
    suffix = identity
    for k in range(a.n_params - 1, -1, -1):
        dressed = suffix @ generators[k] @ suffix.conj().T
        d_sigma = partial_trace_hidden(-1j * (dressed @ projector - projector @ dressed), a.n_visible, a.n_hidden)
        grad[k] = trace_product(d_sigma @ sigma + sigma @ d_sigma, ctx.inv_target).real / normalization
        suffix = suffix @ gates[k]
    return ctx.scale * grad


def gradient_from_derivatives(ctx: LossContext, a: Ansatz) -> NDArray[np.float64]:
    """Chain rule over explicit density derivatives: Re Tr(W d sigma_k) per parameter."""
    sigma = trial_density(a).matrix
    weight, _ = loss_weight(ctx, sigma)
    return np.array([trace_product(weight, d).real for d in density_derivatives(a)])
