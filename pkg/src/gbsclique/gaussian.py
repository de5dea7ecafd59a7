"""Gaussian device states: covariance + displacement, loss, derived kernels.

Everything lives in the doubled amplitude-ordered basis (a, adag) with the
symmetrized covariance convention, so the vacuum has Sigma = I/2 and the
Husimi matrix is Sigma_Q = Sigma + I/2.  A pure encoding with kernel B has
Sigma_Q^-1 = I - X (B (+) B*), displacement is specified through the loop
vector gamma (doubled to gamma_hat), and d solves d = Sigma_Q gamma_hat*.

Loss is an output-side beam splitter per mode: Sigma -> eta Sigma +
(1 - eta) I/2 and d -> sqrt(eta) d, applied identically to both halves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .encoding import EncodedExperiment, _check_gamma
from .errors import ValidationError

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class GaussianState:
    """Immutable state: 2M x 2M covariance and length-2M mean vector."""

    sigma: np.ndarray
    disp: np.ndarray

    def __post_init__(self) -> None:
        sigma = np.asarray(self.sigma, dtype=complex)
        disp = np.asarray(self.disp, dtype=complex)
        if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
            raise ValidationError(f"covariance must be 2M x 2M, got {sigma.shape}")
        two_m = sigma.shape[0]
        m = two_m // 2
        if disp.shape != (two_m,):
            raise ValidationError(f"displacement must have length {two_m}")
        if np.max(np.abs(sigma - sigma.conj().T)) > 1e-12:
            raise ValidationError("covariance not Hermitian within 1e-12")
        # Conjugate block symmetry of the (a, adag) ordering.
        if (
            np.max(np.abs(sigma[m:, m:] - sigma[:m, :m].conj())) > 1e-12
            or np.max(np.abs(sigma[m:, :m] - sigma[:m, m:].conj())) > 1e-12
            or np.max(np.abs(disp[m:] - disp[:m].conj())) > 1e-10
        ):
            raise ValidationError("state violates conjugate pairing of (a, adag) halves")
        eigs = np.linalg.eigvalsh(sigma + 0.5 * np.eye(two_m))
        if eigs[0] <= 0:
            raise ValidationError(
                f"Sigma_Q not positive definite (min eigenvalue {eigs[0]:.3e})"
            )
        sigma.setflags(write=False)
        disp.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "disp", disp)

    @property
    def modes(self) -> int:
        return self.sigma.shape[0] // 2

    @property
    def sigma_q(self) -> np.ndarray:
        return self.sigma + 0.5 * np.eye(2 * self.modes)


class PhotonBudget(NamedTuple):
    n_sqz: float
    n_disp: float
    ratio: float  # inf when there is no squeezing
    collision_free: bool
    margin: float  # M - (n_sqz + n_disp)^2


def _solve_q(sigma_q: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Linear solve against Sigma_Q with an ill-conditioning diagnostic."""
    eigs = np.linalg.eigvalsh(sigma_q)
    if eigs[0] <= 0 or eigs[-1] / eigs[0] > CONDITION_LIMIT:
        raise ValidationError(
            f"Sigma_Q condition number {eigs[-1] / max(eigs[0], 1e-300):.3e} "
            "exceeds 1e12; refusing to solve"
        )
    return np.linalg.solve(sigma_q, rhs)


def vacuum_state(modes: int) -> GaussianState:
    eye = np.eye(2 * modes, dtype=complex)
    return GaussianState(0.5 * eye, np.zeros(2 * modes, dtype=complex))


def pure_state_from_encoding(exp: EncodedExperiment, gamma=None) -> GaussianState:
    """State of the lossless device for an encoding plus loop strengths.

    gamma overrides the encoding's stored loop vector when given (scalar or
    length-M, pre-rescaling).  The construction inverts
    Sigma_Q^-1 = I - X (B (+) B) directly and derives d from the doubled
    rescaled gamma.
    """
    m = exp.modes
    B = exp.B
    if np.any(exp.tanh_r >= 1):
        raise ValidationError("encoding has unphysical squeezing (tanh r >= 1)")
    if gamma is None:
        gamma_rescaled = exp.gamma_rescaled
    else:
        gamma_rescaled = exp.omega_diag * _check_gamma(gamma, m)
    q_inv = np.zeros((2 * m, 2 * m))
    q_inv[:m, :m] = np.eye(m)
    q_inv[m:, m:] = np.eye(m)
    q_inv[:m, m:] = -B
    q_inv[m:, :m] = -B
    sigma_q = np.linalg.inv(q_inv)
    gamma_hat = np.concatenate([gamma_rescaled, gamma_rescaled]).astype(complex)
    d = np.linalg.solve(q_inv, gamma_hat.conj())
    return GaussianState(sigma_q - 0.5 * np.eye(2 * m), d)


def apply_loss(state: GaussianState, eta) -> GaussianState:
    """Uniform or per-mode transmission eta in [0, 1] on the displaced state."""
    m = state.modes
    eta_vec = np.broadcast_to(np.asarray(eta, dtype=float), (m,))
    if np.any(eta_vec < 0) or np.any(eta_vec > 1):
        raise ValidationError(f"transmission must lie in [0, 1], got {eta}")
    t = np.sqrt(np.concatenate([eta_vec, eta_vec]))
    sigma = t[:, None] * state.sigma * t[None, :] + 0.5 * np.diag(1 - t**2)
    return GaussianState(sigma, t * state.disp)


def kernel_matrix(state: GaussianState) -> tuple[np.ndarray, np.ndarray]:
    """Sampling kernel X (I - Sigma_Q^-1) and loop vector d^dag Sigma_Q^-1.

    For lossless pure encodings the kernel is B (+) B and the loop vector is
    the doubled rescaled gamma.  The kernel is symmetrized to remove
    roundoff-level asymmetry before use as a (loop-)hafnian input.
    """
    m = state.modes
    sigma_q = state.sigma_q
    q_inv = _solve_q(sigma_q, np.eye(2 * m, dtype=complex))
    inner = np.eye(2 * m, dtype=complex) - q_inv
    kernel = np.vstack([inner[m:, :], inner[:m, :]])  # row-swap by X
    kernel = (kernel + kernel.T) / 2
    gamma_vec = np.conj(_solve_q(sigma_q, state.disp))
    return kernel, gamma_vec


def normalization_exponent(state: GaussianState) -> float:
    """The exponent (1/2) d^dag Sigma_Q^-1 d of the probability prefactor.

    Computed through a linear solve, never an explicit inverse.  Equal to
    (1/2) gamma_hat^dag Sigma_Q* gamma_hat when d derives from a loop vector.
    """
    if not np.any(state.disp):
        return 0.0
    sol = _solve_q(state.sigma_q, state.disp)
    return float(0.5 * np.real(np.vdot(state.disp, sol)))


def mean_photon_budget(state: GaussianState) -> PhotonBudget:
    """Squeezed and displaced mean photon numbers plus the collision margin.

    n_sqz comes from the covariance (central moments), n_disp from the mean
    vector's single-index half.  The collision-free indicator reports
    whether M >= (n_sqz + n_disp)^2 along with the margin.
    """
    m = state.modes
    n_sqz = float(np.real(np.trace(state.sigma[:m, :m])) - 0.5 * m)
    n_sqz = max(n_sqz, 0.0)
    n_disp = float(np.sum(np.abs(state.disp[:m]) ** 2))
    ratio = n_disp / n_sqz if n_sqz > 1e-12 else float("inf")
    total = n_sqz + n_disp
    margin = m - total**2
    return PhotonBudget(n_sqz, n_disp, ratio, margin >= 0, margin)
