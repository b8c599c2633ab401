"""Parametric gain and squeezing spectra of a pumped junction line.

Undepleted monochromatic pump at ``omega_pump`` with amplitude
``beta = I_p / (4 I_c)``.  Signal ``w`` and idler ``2*omega_pump - w`` obey a
coupled-mode pair whose exact solution gives the amplitudes ``u, v`` with
``|u|^2 - |v|^2 = 1``.  For vacuum input the output moments are
``N = |v|^2`` and ``M = i u v exp(i dk z)``, and the optimal two-mode
quadrature variance is ``S = 2N + 1 - 2|M|`` (1 = vacuum).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import trapezoid

from .dispersion import JtwpaDevice, scan_bandgaps, wavevector_squared
from .errors import BandgapError, JtwpaError

_SERIES_CUTOFF = 1e-8

CSV_HEADER = ("omega_hz", "gain_db", "n_thermal", "m_re", "m_im", "s_db", "delta_k", "gap_flag")


@dataclass(frozen=True)
class PumpConfig:
    omega_pump: float
    beta: float
    i_pump: Optional[float] = None

    def __post_init__(self):
        if not self.omega_pump > 0:
            raise ValueError("omega_pump must be positive")
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta!r}")

    @classmethod
    def from_current(cls, omega_pump, i_pump, i_c):
        return cls(omega_pump, i_pump / (4 * i_c), i_pump)

    def check_current(self, i_c, rtol=1e-12):
        if self.i_pump is not None:
            expected = self.i_pump / (4 * i_c)
            if abs(expected - self.beta) > rtol * max(abs(expected), 1e-300):
                raise ValueError(f"beta={self.beta!r} inconsistent with i_pump/(4 i_c)={expected!r}")


@dataclass(frozen=True)
class LossModel:
    """Beam splitter of power transmittance ``eta`` after the amplifier.

    ``eta`` is a constant in (0, 1] or a callable of angular frequency.
    Use :meth:`tabulated` for sampled data.
    """

    eta: Union[float, Callable]

    def __post_init__(self):
        if not callable(self.eta) and not 0 < self.eta <= 1:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta!r}")

    @classmethod
    def tabulated(cls, omega, eta):
        omega = np.asarray(omega, dtype=float)
        eta = np.asarray(eta, dtype=float)
        if np.any(eta <= 0) or np.any(eta > 1):
            raise ValueError("tabulated eta must lie in (0, 1]")
        return cls(lambda w: np.interp(w, omega, eta))

    def __call__(self, omega):
        if callable(self.eta):
            out = np.asarray(self.eta(omega), dtype=float)
            if np.any(out <= 0) or np.any(out > 1):
                raise ValueError("eta(omega) left (0, 1]")
            return out
        return np.full(np.shape(omega), float(self.eta))


@dataclass(frozen=True)
class SqueezeSpectrum:
    omega: np.ndarray
    gain: np.ndarray
    n_thermal: np.ndarray
    m_squeeze: np.ndarray
    s_quad: np.ndarray
    delta_k: np.ndarray
    gap_flag: np.ndarray
    omega_pump: float
    lossless: bool = True

    @property
    def gain_db(self):
        return 10 * np.log10(self.gain)

    @property
    def squeezing_db(self):
        """Squeezing below vacuum in dB (positive when squeezed)."""
        return -10 * np.log10(self.s_quad)

    @property
    def s_anti(self):
        """Variance of the anti-squeezed two-mode quadrature."""
        return 2 * self.n_thermal + 1 + 2 * np.abs(self.m_squeeze)

    def idler(self, omega):
        return 2 * self.omega_pump - omega

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self._rows():
            writer.writerow([_fmt12(x) if not isinstance(x, int) else x for x in row])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [dict(zip(CSV_HEADER, [_json_float(x) if not isinstance(x, int) else x for x in r]))
                for r in self._rows()]
        return json.dumps({"omega_pump": self.omega_pump, "lossless": self.lossless,
                           "rows": rows}, indent=1)

    def _rows(self):
        gdb = self.gain_db
        sdb = self.squeezing_db
        for i in range(self.omega.size):
            yield (float(self.omega[i] / (2 * math.pi)), float(gdb[i]),
                   float(self.n_thermal[i]), float(self.m_squeeze[i].real),
                   float(self.m_squeeze[i].imag), float(sdb[i]), float(self.delta_k[i]),
                   int(bool(self.gap_flag[i])))

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        rows = data["rows"]

        def col(name):
            return np.array([np.nan if r[name] is None else r[name] for r in rows], dtype=float)

        gain = 10 ** (col("gain_db") / 10)
        s = 10 ** (-col("s_db") / 10)
        return cls(omega=2 * math.pi * col("omega_hz"), gain=gain, n_thermal=col("n_thermal"),
                   m_squeeze=col("m_re") + 1j * col("m_im"), s_quad=s, delta_k=col("delta_k"),
                   gap_flag=np.array([bool(r["gap_flag"]) for r in rows]),
                   omega_pump=data["omega_pump"], lossless=data["lossless"])


def _fmt12(x):
    return "nan" if not math.isfinite(x) else format(x + 0.0, ".12g")


def _json_float(x):
    return None if not math.isfinite(x) else x


def _k_triplet(device, pump, omega):
    """Real wavevectors at pump, signal and idler plus a traveling-wave mask."""
    omega = np.asarray(omega, dtype=float)
    idler = 2 * pump.omega_pump - omega
    k2p = wavevector_squared(device, pump.omega_pump)
    ok = idler > 0
    k2s = np.full(omega.shape, -1.0)
    k2i = np.full(omega.shape, -1.0)
    if np.any(ok):
        k2s[ok] = wavevector_squared(device, omega[ok])
        k2i[ok] = wavevector_squared(device, idler[ok])
    ok &= (k2s > 0) & (k2i > 0) & (k2p > 0)
    kp = math.sqrt(k2p) if k2p > 0 else math.nan
    ks = np.where(ok, np.sqrt(np.abs(k2s)), np.nan)
    ki = np.where(ok, np.sqrt(np.abs(k2i)), np.nan)
    return kp, ks, ki, ok


def _raise_gap(device, pump, omega):
    for w in (pump.omega_pump, float(omega), 2 * pump.omega_pump - float(omega)):
        if w <= 0:
            raise BandgapError(w)
        if wavevector_squared(device, w) <= 0:
            lo, hi = w * (1 - 1e-3), w * (1 + 1e-3)
            gap = scan_bandgaps(device, np.array([lo, hi])).containing(w)
            raise BandgapError(w, gap)


def _mismatch(kp, ks, ki, beta):
    return (2 * kp - ks - ki) + 2 * beta**2 * (kp - ki - ks)


def phase_mismatch(device: JtwpaDevice, pump: PumpConfig, omega):
    """Total phase mismatch (rad/m), including pump-induced phase modulation."""
    kp, ks, ki, ok = _k_triplet(device, pump, np.atleast_1d(omega))
    if not np.all(ok):
        bad = np.atleast_1d(omega)[~ok][0]
        _raise_gap(device, pump, bad)
    dk = _mismatch(kp, ks, ki, pump.beta)
    return dk if np.ndim(omega) else float(dk[0])


def coupling(device, pump, omega):
    """Parametric coupling ``beta^2 sqrt(k_s k_i)`` (rad/m)."""
    kp, ks, ki, ok = _k_triplet(device, pump, np.atleast_1d(omega))
    if not np.all(ok):
        _raise_gap(device, pump, np.atleast_1d(omega)[~ok][0])
    lam = pump.beta**2 * np.sqrt(ks * ki)
    return lam if np.ndim(omega) else float(lam[0])


def _hyperbolic(q):
    """cosh(s) and sinh(s)/s as functions of s^2 = q (q may be negative)."""
    q = np.asarray(q, dtype=float)
    s = np.sqrt(np.abs(q))
    small = s < _SERIES_CUTOFF
    hyp = (q >= 0) & ~small
    trig = (q < 0) & ~small
    ch = 1 + q / 2
    shc = 1 + q / 6
    ch = np.where(hyp, np.cosh(np.where(hyp, s, 0)), ch)
    shc = np.where(hyp, np.sinh(np.where(hyp, s, 0)) / np.where(hyp, s, 1), shc)
    ch = np.where(trig, np.cos(s), ch)
    shc = np.where(trig, np.sin(s) / np.where(trig, s, 1), shc)
    return ch, shc


def uv_closed_form(lam, dk, z):
    """``(u, v, g)`` for coupling ``lam``, mismatch ``dk`` and length ``z``."""
    g2 = lam**2 - (dk / 2) ** 2
    ch, shc = _hyperbolic(g2 * z**2)
    u = ch - 1j * (dk / 2) * z * shc
    v = lam * z * shc + 0j
    g = np.sqrt(g2 + 0j)
    return u, v, g


def uv_amplitudes(device, pump, omega, z=None):
    """Exact signal/idler amplitudes ``(u, v, g)`` after a length ``z`` (m).

    ``g`` may be imaginary when the mismatch exceeds the coupling; the
    hyperbolic functions continue to trigonometric ones.  Near ``g z = 0``
    the series limit ``u = 1 - i dk z/2``, ``v = lam z`` is used.
    """
    z = device.line.length if z is None else z
    if not z > 0:
        raise ValueError("z must be positive")
    lam = coupling(device, pump, omega)
    dk = phase_mismatch(device, pump, omega)
    u, v, g = uv_closed_form(np.asarray(lam), np.asarray(dk), z)
    if np.ndim(omega):
        return u, v, g
    return complex(u), complex(v), complex(g)


def spectrum(device, pump, grid, loss: Optional[LossModel] = None, z=None) -> SqueezeSpectrum:
    """Gain and output-field moments over ``grid`` (rad/s).

    Points where the signal or idler has no traveling solution carry
    ``gap_flag`` and NaN physics values.
    """
    omega = np.asarray(grid, dtype=float)
    z = device.line.length if z is None else z
    kp, ks, ki, ok = _k_triplet(device, pump, omega)
    if not math.isfinite(kp):
        raise BandgapError(pump.omega_pump)
    lam = pump.beta**2 * np.sqrt(ks * ki)
    dk = _mismatch(kp, ks, ki, pump.beta)
    u, v, _ = uv_closed_form(lam, dk, z)

    n = np.abs(v) ** 2
    # |u|^2 = 1 + |v|^2 exactly; this form has no cancellation when v is small
    gain = 1 + n
    m = 1j * u * v * np.exp(1j * dk * z)
    if loss is not None:
        idler = 2 * pump.omega_pump - omega
        eta_s = loss(omega)
        eta_i = np.where(idler > 0, loss(np.where(idler > 0, idler, omega)), np.nan)
        gain = eta_s * gain
        n = eta_s * n
        m = np.sqrt(eta_s * eta_i) * m
    s = 2 * n + 1 - 2 * np.abs(m)
    return SqueezeSpectrum(omega=omega, gain=gain, n_thermal=n, m_squeeze=m, s_quad=s,
                           delta_k=dk, gap_flag=~ok, omega_pump=pump.omega_pump,
                           lossless=loss is None)


def heisenberg_check(spec: SqueezeSpectrum) -> float:
    """Largest relative departure from ``|M|^2 = N(N+1)`` over traveling points."""
    ok = ~spec.gap_flag
    if not np.any(ok):
        return 0.0
    n = spec.n_thermal[ok]
    bound = n * (n + 1)
    return float(np.max(np.abs(np.abs(spec.m_squeeze[ok]) ** 2 - bound) / (bound + 1)))


def _window_mean(omega, values, lo, hi):
    if lo == hi:
        return float(np.interp(lo, omega, values))
    inside = (omega > lo) & (omega < hi)
    xs = np.concatenate(([lo], omega[inside], [hi]))
    ys = np.concatenate(([np.interp(lo, omega, values)], values[inside],
                         [np.interp(hi, omega, values)]))
    return float(trapezoid(ys, xs) / (hi - lo))


def filtered_two_mode_variance(spec: SqueezeSpectrum, omega0, filter_halfwidth):
    """Variance of the filtered two-mode quadrature around ``omega0``.

    The filter is a normalized top hat of half-width ``filter_halfwidth``
    (rad/s); the result is the mean of ``S`` over the signal window and over
    its mirror about the pump, with the ``1/2`` two-mode normalization.
    """
    h = float(filter_halfwidth)
    if h < 0:
        raise ValueError("filter_halfwidth must be non-negative")
    omega = spec.omega
    mirror = 2 * spec.omega_pump - omega0
    total = 0.0
    for centre in (omega0, mirror):
        lo, hi = centre - h, centre + h
        if lo < omega[0] or hi > omega[-1]:
            raise ValueError(f"filter window [{lo:.6g}, {hi:.6g}] leaves the grid")
        touched = (omega >= lo) & (omega <= hi)
        nearest = np.searchsorted(omega, [lo, hi])
        touched[np.clip(nearest[0] - 1, 0, omega.size - 1):np.clip(nearest[1] + 1, 0, omega.size)] = True
        if np.any(spec.gap_flag & touched):
            raise BandgapError(centre)
        total += _window_mean(omega, spec.s_quad, lo, hi)
    return 0.5 * total


def squeezing_db_from_n(n, eta=1.0):
    """Squeezing of a quantum-limited source seen through loss ``eta``."""
    s = 2 * eta * n + 1 - 2 * eta * np.sqrt(n * (n + 1))
    return -10 * np.log10(s)


def peak_point(spec: SqueezeSpectrum):
    """Index of the grid point with the largest gain."""
    gain = np.where(spec.gap_flag, -np.inf, spec.gain)
    if not np.any(np.isfinite(gain)):
        raise JtwpaError("spectrum has no traveling-wave points")
    return int(np.argmax(gain))


def loss_sweep(device, omega_pump, betas, etas, grid, z=None):
    """Squeezing versus loss-inclusive gain as the pump is ramped.

    For every ``(eta, beta)`` the grid point of largest gain is reported.
    Returns a list of dicts with keys ``eta, beta, omega, gain_db,
    squeezing_db, anti_squeezing_db``.
    """
    rows = []
    for eta in etas:
        loss = None if eta == 1 else LossModel(float(eta))
        for beta in betas:
            spec = spectrum(device, PumpConfig(omega_pump, float(beta)), grid, loss, z)
            i = peak_point(spec)
            rows.append({
                "eta": float(eta), "beta": float(beta), "omega": float(spec.omega[i]),
                "gain_db": float(spec.gain_db[i]), "squeezing_db": float(spec.squeezing_db[i]),
                "anti_squeezing_db": float(10 * np.log10(spec.s_anti[i])),
            })
    return rows


def beta_for_gain(device, omega_pump, target_gain_db, grid, eta=1.0, z=None,
                  bracket=(1e-4, 0.5), rtol=1e-10):
    """Pump amplitude at which the peak loss-inclusive gain hits the target."""
    from scipy.optimize import brentq

    loss = None if eta == 1 else LossModel(float(eta))

    def excess(beta):
        spec = spectrum(device, PumpConfig(omega_pump, beta), grid, loss, z)
        return spec.gain_db[peak_point(spec)] - target_gain_db

    return brentq(excess, *bracket, rtol=rtol)
