"""Two qubits driven by a broadband two-mode squeezed bath.

Basis ordering is ``{ee, eg, ge, gg}`` with the first tensor factor being
qubit 1 and ``|e> = (1, 0)``.  Superoperators act on column-stacked density
matrices, ``vec(A rho B) = (B^T kron A) vec(rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvals

from .errors import MultiplicityError, PhysicalityError, PurityError, RegimeError

SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.T.copy()
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_I2 = np.eye(2)
_I4 = np.eye(4)


def on_qubit(op, which):
    """Embed a single-qubit operator on qubit 1 or 2."""
    return np.kron(op, _I2) if which == 1 else np.kron(_I2, op)


@dataclass(frozen=True)
class TwoQubitBath:
    """Bath seen by the two qubits.

    ``n1, n2`` and ``m`` are the moments of one directional field.  With
    ``reflection_mode`` both directions carry the same moments; otherwise
    the counter-propagating field is vacuum.
    """

    gamma1: float
    gamma2: float
    n1: float
    n2: float
    m: complex
    resonant: bool = True
    reflection_mode: bool = False

    def __post_init__(self):
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValueError("decay rates must be positive")
        if not (self.n1 >= 0 and self.n2 >= 0):
            raise ValueError("thermal photon numbers must be non-negative")
        nbar = 0.5 * (self.n1 + self.n2)
        bound = math.sqrt(nbar * (nbar + 1))
        if abs(self.m) > bound + 1e-9:
            raise PhysicalityError(f"|m|={abs(self.m):.12g} exceeds sqrt(nbar(nbar+1))={bound:.12g}")

    @property
    def completely_positive(self):
        """Whether the generator is completely positive.

        The averaged bound on ``|m|`` is necessary but not sufficient when
        ``n1 != n2``; positivity of the rate matrix requires
        ``|m|^2 <= min(n1 (n2 + 1), n2 (n1 + 1))``.
        """
        m2 = abs(self.m) ** 2
        return m2 <= min(self.n1 * (self.n2 + 1), self.n2 * (self.n1 + 1)) + 1e-9

    @classmethod
    def quantum_limited(cls, gamma, n, theta=0.0, **kw):
        return cls(gamma, gamma, n, n, math.sqrt(n * (n + 1)) * np.exp(1j * theta), **kw)


def spre(a):
    return np.kron(_I4, a)


def spost(a):
    return np.kron(a.T, _I4)


def sandwich(a, b):
    """Superoperator of ``rho -> a rho b``."""
    return np.kron(b.T, a)


def dissipator(a):
    """D[a] rho = a rho a^dag - {a^dag a, rho}/2."""
    ad = a.conj().T
    ada = ad @ a
    return sandwich(a, ad) - 0.5 * (spre(ada) + spost(ada))


def squeeze_coupler(a, b, m):
    """S_M[a, b] rho = M (a rho b + b rho a - {ab, rho}) + h.c."""
    ab = a @ b
    term = sandwich(a, b) + sandwich(b, a) - spre(ab) - spost(ab)
    ad, bd = a.conj().T, b.conj().T
    bdad = bd @ ad
    conj_term = sandwich(bd, ad) + sandwich(ad, bd) - spre(bdad) - spost(bdad)
    return m * term + np.conj(m) * conj_term


def superoperators(a, b, m):
    """Vectorized ``(D[a], S_M[a, b])``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != (4, 4) or b.shape != (4, 4):
        raise ValueError("operators must be 4x4")
    return dissipator(a), squeeze_coupler(a, b, m)


def build_liouvillian(bath: TwoQubitBath) -> np.ndarray:
    """16x16 generator of the interaction-picture master equation."""
    sm1, sm2 = on_qubit(SIGMA_MINUS, 1), on_qubit(SIGMA_MINUS, 2)
    sp1, sp2 = sm1.conj().T, sm2.conj().T
    directions = [(bath.n1, bath.n2, bath.m)]
    directions.append((bath.n1, bath.n2, bath.m) if bath.reflection_mode else (0.0, 0.0, 0.0))
    g1, g2 = bath.gamma1, bath.gamma2
    gg = math.sqrt(g1 * g2)
    out = np.zeros((16, 16), dtype=complex)
    for n1, n2, m in directions:
        out += 0.5 * g1 * ((n1 + 1) * dissipator(sm1) + n1 * dissipator(sp1))
        out += 0.5 * g2 * ((n2 + 1) * dissipator(sm2) + n2 * dissipator(sp2))
        if bath.resonant and m != 0:
            out -= 0.5 * gg * squeeze_coupler(sp1, sp2, m)
    return out


def vec(rho):
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v):
    return np.asarray(v).reshape(4, 4, order="F")


def check_density_matrix(rho, atol=1e-12, positive=True):
    rho = np.asarray(rho)
    if rho.shape != (4, 4):
        raise ValueError("density matrix must be 4x4")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > atol:
        raise ValueError("density matrix trace differs from 1")
    if positive and np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -1e-10:
        raise PhysicalityError("density matrix is not positive semidefinite")
    return rho


def steady_state_numeric(liouvillian, validate=True) -> np.ndarray:
    """Unique kernel vector of the generator as a density matrix.

    With ``validate=False`` the positivity check is skipped, which is useful
    for generators that are not completely positive.
    """
    w, v = np.linalg.eig(liouvillian)
    order = np.argsort(np.abs(w))
    radius = np.max(np.abs(w))
    kernel = int(np.sum(np.abs(w) <= 1e-8 * radius))
    if kernel != 1:
        raise MultiplicityError(kernel)
    rho = unvec(v[:, order[0]])
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return check_density_matrix(rho, atol=1e-10, positive=validate)


def steady_state_analytic(bath: TwoQubitBath) -> np.ndarray:
    """Closed-form steady state for a single-sided resonant bath."""
    if not bath.resonant or bath.reflection_mode:
        raise RegimeError("closed form holds only for the resonant single-sided bath")
    g1, g2, n1, n2, m = bath.gamma1, bath.gamma2, bath.n1, bath.n2, bath.m
    a = 4 * (n1 + 1) * (n2 + 1)
    b = g1 * (n1 + 1) + g2 * (n2 + 1)
    den = b**2 - 4 * g1 * g2 * abs(m) ** 2
    c = 4 * g1 * g2 * abs(m) ** 2 / (a * den)
    coh = 4 * math.sqrt(g1 * g2) * b * m / (a * den)
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = n1 * n2 / a + c
    rho[1, 1] = n1 * (n2 + 2) / a - c
    rho[2, 2] = (n1 + 2) * n2 / a - c
    rho[3, 3] = (n1 + 2) * (n2 + 2) / a + c
    rho[0, 3] = coh
    rho[3, 0] = np.conj(coh)
    return rho


def pure_state(n, theta=0.0):
    """Ket ``(sqrt(N) e^{i theta}|ee> + sqrt(N+1)|gg>)/sqrt(2N+1)``."""
    psi = np.array([math.sqrt(n) * np.exp(1j * theta), 0, 0, math.sqrt(n + 1)], dtype=complex)
    return psi / math.sqrt(2 * n + 1)


def expectation(rho, op):
    return float(np.real(np.trace(rho @ op)))


def correlators(rho) -> dict:
    """Single-qubit ``<sigma_z>`` and two-qubit transverse correlators."""
    x1, x2 = on_qubit(SIGMA_X, 1), on_qubit(SIGMA_X, 2)
    y1, y2 = on_qubit(SIGMA_Y, 1), on_qubit(SIGMA_Y, 2)
    return {
        "sz1": expectation(rho, on_qubit(SIGMA_Z, 1)),
        "sz2": expectation(rho, on_qubit(SIGMA_Z, 2)),
        "sxsx": expectation(rho, x1 @ x2),
        "sysy": expectation(rho, y1 @ y2),
        "sxsy": expectation(rho, x1 @ y2),
    }


_X_MASK = np.array([[0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 0, 1], [0, 1, 1, 0]], dtype=bool)


def concurrence(rho) -> float:
    """Wootters concurrence.

    X-shaped matrices use the closed form
    ``2 max(0, |r14| - sqrt(r22 r33), |r23| - sqrt(r11 r44))``, which stays
    accurate near pure states where the spin-flip eigenvalues lose
    precision.
    """
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho[_X_MASK])) <= 1e-13 * np.max(np.abs(rho)):
        d = np.clip(np.real(np.diag(rho)), 0, None)
        c = max(abs(rho[0, 3]) - math.sqrt(d[1] * d[2]), abs(rho[1, 2]) - math.sqrt(d[0] * d[3]))
        return float(min(1.0, max(0.0, 2 * c)))
    yy = np.kron(SIGMA_Y, SIGMA_Y)
    flipped = yy @ rho.conj() @ yy
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    root = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    prod = root @ flipped @ root
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (prod + prod.conj().T)), 0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def purity(rho):
    return float(np.real(np.trace(rho @ rho)))


def fidelity_pure(psi, rho):
    return float(np.real(psi.conj() @ rho @ psi))


def trace_distance(rho, sigma):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


def reduced_first(rho):
    return np.trace(rho.reshape(2, 2, 2, 2), axis1=1, axis2=3)


def entanglement_entropy(state) -> float:
    """Base-2 von Neumann entropy of qubit 1 for a pure two-qubit state."""
    state = np.asarray(state, dtype=complex)
    rho = np.outer(state, state.conj()) if state.ndim == 1 else state
    p = purity(rho) / abs(np.trace(rho)) ** 2
    if p < 1 - 1e-10:
        raise PurityError(f"state purity {p:.12g} is below 1 - 1e-10")
    ev = np.linalg.eigvalsh(reduced_first(rho / np.trace(rho)))
    ev = ev[ev > 1e-300]
    return float(max(0.0, -np.sum(ev * np.log2(ev))))


def spectral_gap(liouvillian) -> float:
    """Smallest ``|Re lambda|`` among the non-zero generator eigenvalues."""
    w = eigvals(liouvillian)
    order = np.argsort(np.abs(w))
    radius = np.max(np.abs(w))
    rest = w[order[1:]]
    rest = rest[np.abs(rest) > 1e-12 * radius]
    return float(np.min(np.abs(rest.real))) if rest.size else 0.0


def bath_from_spectrum(spec, omega1, omega2, gamma1, gamma2, *, resonant=None, reflection_mode=True):
    """Bath moments seen by qubits at ``omega1`` and ``omega2``.

    ``m`` is the average of the squeezing parameter at the two qubit
    frequencies; both frequencies must be grid points.
    """
    idx = []
    for w in (omega1, omega2):
        i = int(np.argmin(np.abs(spec.omega - w)))
        if abs(spec.omega[i] - w) > 1e-9 * w:
            raise ValueError(f"omega={w!r} is not on the spectrum grid")
        idx.append(i)
    if resonant is None:
        resonant = abs(omega1 + omega2 - 2 * spec.omega_pump) <= 1e-9 * spec.omega_pump
    m = 0.5 * (spec.m_squeeze[idx[0]] + spec.m_squeeze[idx[1]])
    return TwoQubitBath(gamma1, gamma2, float(spec.n_thermal[idx[0]]), float(spec.n_thermal[idx[1]]),
                        complex(m), resonant=resonant, reflection_mode=reflection_mode)


def concurrence_sweep(device, omega_pump, omega1, betas, eta=1.0, gamma=1.0, z=None):
    """Steady-state entanglement as the pump amplitude is ramped.

    Qubits sit at ``omega1`` and its idler in reflection mode.  The reported
    gain is the intrinsic amplifier gain ``|u|^2`` so curves with different
    ``eta`` share an axis.  Returns a list of dicts with keys ``gain_db, eta,
    concurrence, gap_over_gamma, s_db, n, m_abs``.
    """
    from .amplifier import LossModel, PumpConfig, spectrum

    omega2 = 2 * omega_pump - omega1
    grid = np.array(sorted({omega1, omega2}))
    loss = None if eta == 1 else LossModel(float(eta))
    rows = []
    for beta in betas:
        pump = PumpConfig(omega_pump, float(beta))
        spec = spectrum(device, pump, grid, loss, z)
        if np.any(spec.gap_flag):
            raise RegimeError("qubit frequency lies in a bandgap")
        i = int(np.argmin(np.abs(grid - omega1)))
        intrinsic = spec.gain[i] / (1.0 if loss is None else eta)
        bath = bath_from_spectrum(spec, omega1, omega2, gamma, gamma, reflection_mode=True)
        gen = build_liouvillian(bath)
        rho = steady_state_numeric(gen)
        rows.append({
            "gain_db": float(10 * np.log10(intrinsic)), "eta": float(eta),
            "concurrence": concurrence(rho), "gap_over_gamma": spectral_gap(gen) / gamma,
            "s_db": float(spec.squeezing_db[i]), "n": bath.n1, "m_abs": abs(bath.m),
        })
    return rows
