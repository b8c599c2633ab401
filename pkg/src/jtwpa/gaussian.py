"""Gaussian states and linear Lindblad dynamics of bosonic modes.

Quadratures are ordered ``r = (x_1..x_n, y_1..y_n)`` with
``c = (x + i y)/sqrt(2)`` so the vacuum variance is 1/2 and
``[r_i, r_j] = i Omega_ij`` with ``Omega = [[0, I], [-I, 0]]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .errors import StabilityError


def symplectic_form(n):
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise ValueError("cov must be a square matrix of even size")
        if np.asarray(self.mean).shape != (cov.shape[0],):
            raise ValueError("mean length must match cov")
        if np.max(np.abs(cov - cov.T)) > 1e-12 * max(1.0, np.max(np.abs(cov))):
            raise ValueError("cov is not symmetric")

    @property
    def n_modes(self):
        return self.cov.shape[0] // 2

    @classmethod
    def vacuum(cls, n):
        return cls(np.zeros(2 * n), 0.5 * np.eye(2 * n))

    def uncertainty_margin(self):
        """Smallest eigenvalue of ``cov + (i/2) Omega`` (non-negative if physical)."""
        herm = self.cov + 0.5j * symplectic_form(self.n_modes)
        return float(np.min(np.linalg.eigvalsh(herm)))

    def purity(self):
        return float(1 / np.sqrt(np.linalg.det(2 * self.cov)))

    def quadratic_variance(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        return float(c @ self.cov @ c)

    def to_dict(self):
        return {"mean": [float(x) for x in self.mean],
                "cov": [float(x) for x in np.asarray(self.cov).reshape(-1)]}

    @classmethod
    def from_dict(cls, data):
        mean = np.asarray(data["mean"], dtype=float)
        cov = np.asarray(data["cov"], dtype=float).reshape(mean.size, mean.size)
        return cls(mean, cov)

    def to_json(self):
        return json.dumps(self.to_dict())


def pure_state_from_z(z):
    """Covariance of ``psi(x) ~ exp(i x^T Z x / 2)`` with ``Im Z > 0``."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    yinv = np.linalg.inv(y)
    vxx = 0.5 * yinv
    vxy = 0.5 * yinv @ x
    vyy = 0.5 * (y + x @ yinv @ x)
    cov = np.block([[vxx, vxy], [vxy.T, vyy]])
    cov = 0.5 * (cov + cov.T)
    return GaussianState(np.zeros(2 * z.shape[0]), cov)


def quadrature_coefficients(alpha, beta):
    """Rows ``Lambda`` with ``L_k = sum_j Lambda_kj r_j`` for ``L = alpha c + beta c^dag``."""
    alpha = np.atleast_2d(np.asarray(alpha, dtype=complex))
    beta = np.atleast_2d(np.asarray(beta, dtype=complex))
    if alpha.shape != beta.shape:
        raise ValueError("alpha and beta must have the same shape")
    s = 1 / np.sqrt(2)
    return np.hstack([s * (alpha + beta), 1j * s * (alpha - beta)])


def drift_diffusion(alpha, beta):
    """Drift ``A`` and diffusion ``D`` with ``dV/dt = A V + V A^T + D``."""
    lam = quadrature_coefficients(alpha, beta)
    g = lam.conj().T @ lam
    om = symplectic_form(lam.shape[1] // 2)
    drift = om @ g.imag
    diffusion = om @ g.real @ om.T
    return drift, 0.5 * (diffusion + diffusion.T)


def is_hurwitz(drift, margin=0.0):
    return bool(np.max(np.linalg.eigvals(drift).real) < -margin)


def gaussian_steady_state(alpha, beta) -> GaussianState:
    """Unique Gaussian steady state of linear jump operators ``alpha c + beta c^dag``."""
    drift, diffusion = drift_diffusion(alpha, beta)
    eig = np.linalg.eigvals(drift)
    if not np.max(eig.real) < -1e-12 * max(1.0, np.max(np.abs(eig))):
        raise StabilityError(f"drift is not Hurwitz (max Re eigenvalue {np.max(eig.real):.3e})")
    cov = solve_continuous_lyapunov(drift, -diffusion)
    cov = 0.5 * (cov + cov.T)
    state = GaussianState(np.zeros(cov.shape[0]), cov)
    if state.uncertainty_margin() < -1e-9:
        raise StabilityError("steady state violates the uncertainty relation")
    return state


def covariance_flow(alpha, beta, cov0, t_final, steps):
    """RK4 integration of the covariance equation from ``cov0``."""
    drift, diffusion = drift_diffusion(alpha, beta)
    h = t_final / steps
    v = np.array(cov0, dtype=float)

    def rhs(x):
        return drift @ x + x @ drift.T + diffusion

    for _ in range(steps):
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * h * k1)
        k3 = rhs(v + 0.5 * h * k2)
        k4 = rhs(v + h * k3)
        v = v + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
    return 0.5 * (v + v.T)


def bath_jump_operators(n_matrix, x_matrix, tol=1e-12):
    """Jump-operator coefficients reproducing a Gaussian bath.

    ``n_matrix = <b^dag b>`` (Hermitian) and ``x_matrix = <b b>`` (symmetric)
    describe the incoming field.  The rate matrix over ``(c, c^dag)`` is
    ``[[I + N^*, -X^*], [-X, N]]``; its eigen-factorization yields
    ``(alpha, beta)`` for each jump operator.
    """
    n_matrix = np.asarray(n_matrix, dtype=complex)
    x_matrix = np.asarray(x_matrix, dtype=complex)
    k = n_matrix.shape[0]
    rates = np.block([[np.eye(k) + n_matrix.conj(), -x_matrix.conj()], [-x_matrix, n_matrix]])
    rates = 0.5 * (rates + rates.conj().T)
    w, v = np.linalg.eigh(rates)
    if w[0] < -tol * max(1.0, w[-1]):
        raise StabilityError("bath moments are unphysical (rate matrix not positive)")
    keep = w > tol * max(1.0, w[-1])
    vecs = v[:, keep] * np.sqrt(w[keep])
    return vecs[:k].T.copy(), vecs[k:].T.copy()


def z_from_state(state: GaussianState):
    """Complex graph matrix ``Z = X + i Y`` of a pure zero-mean Gaussian state."""
    n = state.n_modes
    vxx = state.cov[:n, :n]
    vxy = state.cov[:n, n:]
    inv = np.linalg.inv(vxx)
    return inv @ vxy + 0.5j * inv
