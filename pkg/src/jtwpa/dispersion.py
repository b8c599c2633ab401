"""Engineered dispersion of a Josephson junction transmission line.

Each unit cell is a junction in series along the line, shunted to ground by a
capacitance ``C = c*a`` plus any number of lossless resonator branches.  A
branch is a coupling capacitor ``c_c`` in series with a parallel ``l_r || c_r``
tank.  Any Foster-form admittance can be emulated by choosing branches.

In the continuum limit the wavevector obeys::

    k^2 = -i w (Y(w)/a) l / (1 - w^2/w_P^2)

with ``Y`` the shunt admittance per cell.  Writing ``Y = iB`` with ``B`` the
(real) susceptance this is ``k^2 = w B l / (a (1 - w^2/w_P^2))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.constants import physical_constants
from scipy.optimize import brentq

from .errors import OnResonanceError, UntunableError

PHI0 = physical_constants["mag. flux quantum"][0]

# relative distance to a branch pole treated as "on resonance"
_POLE_RTOL = 1e-13


@dataclass(frozen=True)
class LineParams:
    """Continuum parameters of the junction line (SI units).

    ``c`` and ``l`` are per unit length; ``omega_p`` is the junction plasma
    frequency (not the pump).
    """

    n_cells: int
    a: float
    c: float
    l: float
    omega_p: float
    i_c: float

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells <= 0:
            raise ValueError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        for name in ("a", "c", "l", "omega_p", "i_c"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def z0(self) -> float:
        return math.sqrt(self.l / self.c)

    @property
    def length(self) -> float:
        return self.n_cells * self.a

    @property
    def velocity(self) -> float:
        return 1.0 / math.sqrt(self.l * self.c)

    @classmethod
    def from_junctions(cls, n_cells, z0, i_c, omega_p, a=1e-5):
        """Build a line from impedance and critical current.

        The junction inductance ``Phi0/(2 pi I_c)`` is the series inductance of
        one cell; the ground capacitance follows from ``Z0``.
        """
        l_cell = PHI0 / (2 * math.pi * i_c)
        return cls(n_cells=int(n_cells), a=a, c=l_cell / z0**2 / a, l=l_cell / a,
                   omega_p=omega_p, i_c=i_c)


@dataclass(frozen=True)
class ResonatorSpec:
    """One shunt branch: ``c_c`` in series with the tank ``l_r || c_r``."""

    c_c: float
    c_r: float
    l_r: float

    def __post_init__(self):
        for name in ("c_c", "c_r", "l_r"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    @property
    def omega_r(self) -> float:
        """Bare tank resonance 1/sqrt(l_r c_r)."""
        return 1.0 / math.sqrt(self.l_r * self.c_r)

    @property
    def omega_pole(self) -> float:
        """Dressed resonance where the branch impedance vanishes."""
        return 1.0 / math.sqrt(self.l_r * (self.c_r + self.c_c))

    @classmethod
    def from_frequency(cls, omega_r, c_c, c_r):
        return cls(c_c=c_c, c_r=c_r, l_r=1.0 / (omega_r**2 * c_r))

    def susceptance(self, omega):
        """Imaginary part of the branch admittance (S)."""
        omega = np.asarray(omega, dtype=float)
        x_pole = 1.0 - omega**2 / self.omega_pole**2
        if np.any(np.abs(x_pole) < _POLE_RTOL):
            bad = omega.flat[np.argmin(np.abs(x_pole))]
            raise OnResonanceError(float(bad), self.omega_pole)
        return omega * self.c_c * (1.0 - omega**2 / self.omega_r**2) / x_pole


@dataclass(frozen=True)
class JtwpaDevice:
    """A junction line plus its resonator branches, sorted by ``omega_r``."""

    line: LineParams
    resonators: tuple = field(default_factory=tuple)

    def __post_init__(self):
        res = tuple(sorted(self.resonators, key=lambda r: r.omega_r))
        for lo, hi in zip(res, res[1:]):
            if not hi.omega_r > lo.omega_r:
                raise ValueError("resonator frequencies must be strictly increasing")
        object.__setattr__(self, "resonators", res)

    def with_resonator(self, index, resonator):
        res = list(self.resonators)
        res[index] = resonator
        return replace(self, resonators=tuple(res))

    def poles(self):
        return sorted(r.omega_pole for r in self.resonators)


@dataclass(frozen=True)
class BandgapReport:
    """Disjoint, sorted angular-frequency intervals without traveling waves."""

    gaps: tuple = ()

    def __len__(self):
        return len(self.gaps)

    def __iter__(self):
        return iter(self.gaps)

    def containing(self, omega):
        for lo, hi in self.gaps:
            if lo <= omega <= hi:
                return (lo, hi)
        return None

    def intersecting(self, lo, hi):
        return [g for g in self.gaps if g[1] >= lo and g[0] <= hi]


def _check_omega(omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(~(omega > 0)):
        raise ValueError("omega must be strictly positive")
    return omega


def shunt_susceptance(device, omega):
    """Real ``B`` with ``Y = iB``, the per-cell shunt admittance."""
    omega = _check_omega(omega)
    b = omega * device.line.c * device.line.a
    for res in device.resonators:
        b = b + res.susceptance(omega)
    return b


def shunt_admittance_per_cell(device, omega):
    """Complex shunt admittance per unit cell; purely imaginary for real omega."""
    b = shunt_susceptance(device, omega)
    return 1j * b if np.ndim(b) else complex(0.0, float(b))


def wavevector_squared(device, omega):
    """``k^2`` in rad^2/m^2; negative inside a bandgap."""
    omega = _check_omega(omega)
    line = device.line
    plasma = 1.0 - (omega / line.omega_p) ** 2
    if np.any(plasma == 0):
        raise ValueError("omega coincides with the junction plasma frequency")
    k2 = omega * shunt_susceptance(device, omega) * line.l / (line.a * plasma)
    return k2 if np.ndim(k2) else float(k2)


def wavevector(device, omega):
    """Complex wavevector (rad/m).

    Traveling solutions are real with ``Re k >= 0``.  In a bandgap the result
    is purely imaginary with ``Im k > 0`` (evanescent); test with
    ``np.imag(k) > 0``.
    """
    k2 = np.asarray(wavevector_squared(device, omega))
    k = np.where(k2 >= 0, np.sqrt(np.abs(k2)) + 0j, 1j * np.sqrt(np.abs(k2)))
    return k if k.ndim else complex(k)


def _susceptance_zeros(device, lo, hi):
    """Zeros of the shunt susceptance between consecutive poles.

    Lossless reactances are strictly increasing between poles (Foster), so
    each inter-pole interval above the first pole holds exactly one zero.
    """
    poles = device.poles()
    zeros = []
    for i, p in enumerate(poles):
        a = p * (1 + 1e-11)
        if i + 1 < len(poles):
            b = poles[i + 1] * (1 - 1e-11)
        else:
            b = 2 * p
            while shunt_susceptance(device, b) < 0:
                b *= 2
        if a > hi:
            break
        fa, fb = shunt_susceptance(device, a), shunt_susceptance(device, b)
        if fa < 0 < fb:
            zeros.append(brentq(lambda w: shunt_susceptance(device, w), a, b,
                                xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500))
    return zeros


def scan_bandgaps(device, omega_grid=None):
    """Report the bandgaps that intersect the span of ``omega_grid``.

    The grid fixes the frequency window.  Gap edges are located exactly
    from the pole/zero structure of the shunt susceptance and the plasma
    frequency, so gaps narrower than the grid spacing are still found.
    """
    if omega_grid is None:
        raise ValueError("omega_grid is required")
    grid = _check_omega(omega_grid)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("omega_grid must be a strictly ascending 1-D grid")
    lo, hi = float(grid[0]), float(grid[-1])

    marks = set(device.poles()) | set(_susceptance_zeros(device, lo, hi))
    marks.add(device.line.omega_p)
    cuts = sorted(m for m in marks if lo < m < hi)
    edges = [lo] + cuts + [hi]

    gaps = []
    for a, b in zip(edges, edges[1:]):
        mid = math.sqrt(a * b)
        if mid in marks:
            continue
        if wavevector_squared(device, mid) < 0:
            if gaps and gaps[-1][1] == a:
                gaps[-1] = (gaps[-1][0], b)
            else:
                gaps.append((a, b))
    return BandgapReport(tuple(gaps))


def _bisect_secant(f, a, b, fa, fb, rtol, maxiter=200):
    """Bracketed root search: secant steps, bisection when they misbehave."""
    for _ in range(maxiter):
        if abs(b - a) <= rtol * max(abs(a), abs(b)):
            break
        x = b - fb * (b - a) / (fb - fa) if fb != fa else 0.5 * (a + b)
        width = b - a
        if not (a + 0.01 * width < x < b - 0.01 * width):
            x = 0.5 * (a + b)
        try:
            fx = f(x)
        except Exception:
            x = 0.5 * (a + b)
            fx = f(x)
        if fx == 0:
            return x, fx
        if np.sign(fx) == np.sign(fa):
            a, fa = x, fx
        else:
            b, fb = x, fx
    return (a, fa) if abs(fa) < abs(fb) else (b, fb)


def tune_operating_point(device, beta, target_omega, knob, bracket, *,
                         omega_pump=None, resonator_index=0, rtol=1e-10):
    """Find the knob value that zeroes the phase mismatch at ``target_omega``.

    ``knob`` is ``"pump_frequency"`` (vary the pump, everything else fixed) or
    ``"resonator_frequency"`` (vary the bare frequency of one resonator at
    fixed ``c_r`` and ``c_c``; needs ``omega_pump``).  Returns the knob value
    in rad/s.
    """
    from .amplifier import PumpConfig, phase_mismatch

    if knob == "pump_frequency":
        def mismatch(x):
            return phase_mismatch(device, PumpConfig(x, beta), target_omega)
    elif knob == "resonator_frequency":
        if omega_pump is None:
            raise ValueError("resonator_frequency knob needs omega_pump")
        base = device.resonators[resonator_index]

        def mismatch(x):
            res = ResonatorSpec.from_frequency(x, base.c_c, base.c_r)
            tuned = device.with_resonator(resonator_index, res)
            return phase_mismatch(tuned, PumpConfig(omega_pump, beta), target_omega)
    else:
        raise ValueError(f"unknown knob {knob!r}")

    a, b = sorted(float(x) for x in bracket)
    scale = abs(wavevector(device, target_omega))
    tol = 1e-6 * scale
    fa, fb = mismatch(a), mismatch(b)
    if abs(fa) <= tol and abs(fa) <= abs(fb):
        return a
    if abs(fb) <= tol:
        return b
    if np.sign(fa) == np.sign(fb):
        raise UntunableError(
            f"no sign change of delta_k over [{a:.12g}, {b:.12g}] rad/s: "
            f"delta_k = {fa:.6g}, {fb:.6g} rad/m")
    x, fx = _bisect_secant(mismatch, a, b, fa, fb, rtol)
    if abs(fx) > tol:
        raise UntunableError(
            f"sign change of delta_k over [{a:.12g}, {b:.12g}] rad/s is a pole, "
            f"not a root (residual {fx:.6g} rad/m at {x:.12g})")
    return x


def linear_grid(f_min_hz, f_max_hz, points):
    """Angular-frequency grid from a frequency span in Hz."""
    return 2 * np.pi * np.linspace(f_min_hz, f_max_hz, int(points))


def comb_resonators(base: ResonatorSpec, count: int, spacing_fraction: float,
                    coupling_scale: float) -> Sequence[ResonatorSpec]:
    """Extra resonances at ``w_r0 + k*spacing_fraction*w_r0`` for k = 1..count."""
    out = []
    for k in range(1, count + 1):
        w = base.omega_r * (1 + k * spacing_fraction)
        out.append(ResonatorSpec.from_frequency(w, coupling_scale * base.c_c, base.c_r))
    return out
