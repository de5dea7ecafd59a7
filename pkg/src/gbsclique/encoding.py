"""Graph-to-device encoding: rescaling, Takagi factors, squeezing, loop strengths.

The general path rescales the adjacency as B = Omega A Omega with
Omega_ii = c (1 + alpha w_i); a plain scalar embedding is the alpha = 0,
unit-weight special case (effective scalar c^2 on A).  Experiments are
parameterized by the top singular value of B (lambda_max), and the scalar
is solved from it, which removes any ambiguity about where the constant
sits.  Loop strengths gamma are per-node and must be rescaled by the same
Omega before they reach a kernel diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .graph import Graph

SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class EncodedExperiment:
    """Device configuration for one graph embedding.

    Attributes:
        B: M x M real symmetric kernel, top singular value < 1.
        c: scalar in Omega_ii = c (1 + alpha w_i).
        omega_diag: diagonal of Omega.
        alpha: node-weight bias constant (>= 0).
        tanh_r: singular values of B, descending, all in [0, 1).
        unitary: complex M x M Takagi unitary.
        gamma: per-node loop strengths before Omega rescaling.
        gamma_rescaled: Omega gamma, the values that reach kernel diagonals.
    """

    B: np.ndarray
    c: float
    omega_diag: np.ndarray
    alpha: float
    tanh_r: np.ndarray
    unitary: np.ndarray
    gamma: np.ndarray
    gamma_rescaled: np.ndarray

    @property
    def modes(self) -> int:
        return self.B.shape[0]


def max_singular_value(A: np.ndarray) -> float:
    """Largest singular value of a symmetric matrix (relative accuracy 1e-10)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValidationError("matrix contains non-finite entries")
    if A.size and np.max(np.abs(A - A.T)) > SYMMETRY_TOL:
        raise ValidationError("matrix not symmetric within 1e-12")
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(A))))


def c_from_lambda_max(A: np.ndarray, lambda_max: float) -> float:
    """Scalar c with the largest singular value of cA equal to lambda_max."""
    if not 0 < lambda_max < 1:
        raise ValidationError(f"lambda_max {lambda_max} outside (0, 1)")
    s_max = max_singular_value(A)
    if s_max == 0:
        raise ValidationError("zero matrix has no rescaling")
    return lambda_max / s_max


def takagi_autonne(B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor a real symmetric B as U diag(lam) U^T with unitary U, lam in [0, 1).

    Computed from the real eigendecomposition; columns belonging to negative
    eigenvalues absorb the sign as a factor i.  The gauge is not unique
    (degenerate eigenvalues admit any orthonormal basis); only the
    reconstruction is guaranteed.  Singular values are sorted descending.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValidationError(f"matrix must be square, got shape {B.shape}")
    if B.size and np.max(np.abs(B - B.T)) > SYMMETRY_TOL:
        raise ValidationError("matrix not symmetric within 1e-12")
    eigvals, Q = np.linalg.eigh(B)
    lam = np.abs(eigvals)
    if np.any(lam >= 1):
        raise ValidationError(
            f"singular value {np.max(lam):.6g} >= 1: squeezing not physical"
        )
    U = Q.astype(complex)
    U[:, eigvals < 0] *= 1j
    order = np.argsort(-lam, kind="stable")
    return U[:, order], lam[order]


def omega_rescale(g: Graph, c: float, alpha: float = 0.0, gamma=None) -> EncodedExperiment:
    """Encode a graph with Omega_ii = c (1 + alpha w_i), B = Omega A Omega.

    gamma defaults to zeros (no displacement).  Fails if the resulting B has
    a singular value at or above 1.
    """
    if c <= 0:
        raise ValidationError(f"c must be positive, got {c}")
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    omega = c * (1 + alpha * g.node_weights)
    B = omega[:, None] * g.adjacency * omega[None, :]
    s = max_singular_value(B)
    if s >= 1:
        raise ValidationError(
            f"embedding needs all singular values < 1, got s_max(B) = {s:.6g}"
        )
    unitary, tanh_r = takagi_autonne(B)
    gamma = _check_gamma(gamma, g.node_count)
    B.setflags(write=False)
    return EncodedExperiment(
        B=B,
        c=float(c),
        omega_diag=omega,
        alpha=float(alpha),
        tanh_r=tanh_r,
        unitary=unitary,
        gamma=gamma,
        gamma_rescaled=omega * gamma,
    )


def encode(g: Graph, lambda_max: float, alpha: float = 0.0, gamma=None) -> EncodedExperiment:
    """Encode a graph so the top singular value of B equals lambda_max.

    Solves for the scalar c of omega_rescale; with alpha = 0 and unit
    weights this is c = sqrt(lambda_max / s_max(A)).
    """
    if not 0 < lambda_max < 1:
        raise ValidationError(f"lambda_max {lambda_max} outside (0, 1)")
    scaled = (1 + alpha * g.node_weights)
    base = scaled[:, None] * g.adjacency * scaled[None, :]
    s = max_singular_value(base)
    if s == 0:
        raise ValidationError("graph has no edges: nothing to encode")
    return omega_rescale(g, float(np.sqrt(lambda_max / s)), alpha, gamma)


def _check_gamma(gamma, modes: int) -> np.ndarray:
    if gamma is None:
        return np.zeros(modes)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim == 0:
        gamma = np.full(modes, float(gamma))
    if gamma.shape != (modes,):
        raise ValidationError(f"gamma must have {modes} entries, got shape {gamma.shape}")
    if np.any(gamma < 0) or not np.all(np.isfinite(gamma)):
        raise ValidationError("gamma entries must be finite and >= 0")
    return gamma


def with_gamma(exp: EncodedExperiment, gamma) -> EncodedExperiment:
    """Same encoding with new loop strengths (scalar broadcast over nodes)."""
    gamma = _check_gamma(gamma, exp.modes)
    return replace(exp, gamma=gamma, gamma_rescaled=exp.omega_diag * gamma)


def squeezing_report(exp: EncodedExperiment) -> tuple[np.ndarray, float]:
    """Per-mode squeezing r_i = atanh(lambda_i) and total mean photon number."""
    r = np.arctanh(exp.tanh_r)
    return r, float(np.sum(np.sinh(r) ** 2))


def gamma_rescale(exp: EncodedExperiment, gamma) -> np.ndarray:
    """Elementwise Omega gamma: loop strengths as they reach kernel diagonals."""
    gamma = _check_gamma(gamma, exp.modes)
    return exp.omega_diag * gamma


def validate_gamma_monotone(g: Graph, gamma) -> bool:
    """True iff gamma never decreases when the node weight increases."""
    gamma = _check_gamma(gamma, g.node_count)
    w = g.node_weights
    order = np.argsort(w, kind="stable")
    for a, b in zip(order, order[1:]):
        if w[a] < w[b] and gamma[a] > gamma[b]:
            return False
    return True
