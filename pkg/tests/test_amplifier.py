import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from conftest import PUMP
from jtwpa.amplifier import (LossModel, PumpConfig, SqueezeSpectrum, beta_for_gain, coupling,
                             filtered_two_mode_variance, heisenberg_check, loss_sweep, peak_point,
                             phase_mismatch, spectrum, squeezing_db_from_n, uv_amplitudes,
                             uv_closed_form)
from jtwpa.dispersion import scan_bandgaps, wavevector
from jtwpa.errors import BandgapError


def test_pump_config_validation():
    with pytest.raises(ValueError):
        PumpConfig(PUMP, 1.0)
    with pytest.raises(ValueError):
        PumpConfig(-1.0, 0.1)
    pump = PumpConfig.from_current(PUMP, 1.1e-6, 2.75e-6)
    assert pump.beta == pytest.approx(0.1)
    with pytest.raises(ValueError):
        PumpConfig(PUMP, 0.2, 1.1e-6).check_current(2.75e-6)


def test_loss_model_validation():
    with pytest.raises(ValueError):
        LossModel(0.0)
    with pytest.raises(ValueError):
        LossModel(1.5)
    tab = LossModel.tabulated([1.0, 3.0], [0.5, 0.9])
    assert tab(2.0) == pytest.approx(0.7)
    with pytest.raises(ValueError):
        LossModel(lambda w: 2.0)(1.0)


def test_mismatch_at_pump_frequency(rpm_device):
    pump = PumpConfig(PUMP, 0.125)
    kp = wavevector(rpm_device, PUMP).real
    assert phase_mismatch(rpm_device, pump, PUMP) == pytest.approx(-2 * 0.125**2 * kp, rel=1e-12)


def test_zero_pump_gives_unit_gain(rpm_device, band):
    spec = spectrum(rpm_device, PumpConfig(PUMP, 0.0), band)
    ok = ~spec.gap_flag
    assert np.allclose(spec.gain[ok], 1.0, rtol=0, atol=1e-14)
    assert np.all(spec.n_thermal[ok] == 0.0)
    assert np.allclose(spec.s_quad[ok], 1.0, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 50), st.floats(-200, 200), st.floats(1e-4, 0.1))
def test_symplectic_invariant(lam, dk, z):
    u, v, _ = uv_closed_form(np.array(lam), np.array(dk), z)
    scale = max(1.0, abs(u) ** 2)
    assert abs(abs(u) ** 2 - abs(v) ** 2 - 1) <= 1e-11 * scale


def test_against_coupled_mode_integration():
    lam, dk, z = 120.0, 90.0, 0.02

    def rhs(_, y):
        a, b = y[0] + 1j * y[1], y[2] + 1j * y[3]
        da = -1j * dk / 2 * a + lam * b
        db = lam * a + 1j * dk / 2 * b
        return [da.real, da.imag, db.real, db.imag]

    sol = solve_ivp(rhs, (0, z), [1, 0, 0, 0], method="DOP853", rtol=1e-12, atol=1e-14)
    a = sol.y[0, -1] + 1j * sol.y[1, -1]
    b = sol.y[2, -1] + 1j * sol.y[3, -1]
    u, v, _ = uv_closed_form(np.array(lam), np.array(dk), z)
    assert complex(u) == pytest.approx(a, rel=1e-9)
    assert complex(v) == pytest.approx(b, rel=1e-9)


def test_phase_matched_and_large_mismatch_limits():
    lam, z = 80.0, 0.02
    u, v, g = uv_closed_form(np.array(lam), np.array(0.0), z)
    assert complex(u) == pytest.approx(math.cosh(lam * z), rel=1e-14)
    assert complex(v) == pytest.approx(math.sinh(lam * z), rel=1e-14)
    # far from phase matching the gain oscillates and stays bounded
    u, v, g = uv_closed_form(np.array(lam), np.array(1e5), z)
    assert abs(v) < 2 * lam / 1e5 + 1e-12
    assert g.imag > 0


def test_series_branch_is_continuous():
    lam, z = 1.0, 1.0
    for dk in (2.0 - 1e-12, 2.0, 2.0 + 1e-12):
        u, v, _ = uv_closed_form(np.array(lam), np.array(dk), z)
        assert complex(u) == pytest.approx(1 - 1j * dk / 2 * z, rel=1e-9)
        assert complex(v) == pytest.approx(lam * z, rel=1e-9)


def test_uv_amplitudes_scalar_and_array(rpm_device):
    pump = PumpConfig(PUMP, 0.125)
    w = 2 * math.pi * 5e9
    u, v, _ = uv_amplitudes(rpm_device, pump, w)
    ua, va, _ = uv_amplitudes(rpm_device, pump, np.array([w, w]))
    assert isinstance(u, complex)
    assert ua[1] == u and va[0] == v
    with pytest.raises(ValueError):
        uv_amplitudes(rpm_device, pump, w, z=0.0)


def _with_gap(device, grid):
    lo, hi = scan_bandgaps(device, grid).gaps[0]
    return np.sort(np.concatenate([grid, np.linspace(lo, hi, 7)[1:-1]]))


def test_gap_points_are_flagged(rpm_device, band):
    band = _with_gap(rpm_device, band)
    spec = spectrum(rpm_device, PumpConfig(PUMP, 0.125), band)
    assert np.any(spec.gap_flag)
    assert np.all(np.isnan(spec.gain[spec.gap_flag]))
    with pytest.raises(BandgapError):
        coupling(rpm_device, PumpConfig(PUMP, 0.125), band[spec.gap_flag][0])


def test_lossless_spectrum_saturates_heisenberg(rpm_device, band):
    spec = spectrum(rpm_device, PumpConfig(PUMP, 0.125), band)
    assert heisenberg_check(spec) < 1e-12
    ok = ~spec.gap_flag
    assert np.allclose(spec.gain[ok], spec.n_thermal[ok] + 1, rtol=1e-12)


def test_idler_symmetry(rpm_device):
    pump = PumpConfig(PUMP, 0.125)
    w = 2 * np.pi * np.linspace(4.5e9, 5.9e9, 101)
    a = spectrum(rpm_device, pump, w)
    b = spectrum(rpm_device, pump, 2 * PUMP - w)
    assert np.allclose(a.n_thermal, b.n_thermal, rtol=1e-10)
    assert np.allclose(np.abs(a.m_squeeze), np.abs(b.m_squeeze), rtol=1e-10)


def test_resonant_line_outperforms_plain_line(rpm_device, plain_device, band):
    pump = PumpConfig(PUMP, 0.125)
    with_res = spectrum(rpm_device, pump, band)
    without = spectrum(plain_device, pump, band)
    assert np.nanmax(with_res.gain_db) > np.nanmax(without.gain_db) + 10


def test_twenty_db_gives_twenty_six_db_squeezing():
    assert squeezing_db_from_n(99.0) == pytest.approx(25.98, abs=0.02)
    assert squeezing_db_from_n(99.0, 0.75) == pytest.approx(-10 * math.log10(0.25), abs=0.05)


def test_loss_floor_approached(rpm_device, band):
    beta = beta_for_gain(rpm_device, PUMP, 20.0, band, eta=0.75)
    spec = spectrum(rpm_device, PumpConfig(PUMP, beta), band, LossModel(0.75))
    i = peak_point(spec)
    assert spec.gain_db[i] == pytest.approx(20.0, abs=1e-6)
    floor = -10 * math.log10(0.25)
    assert floor - 0.05 < spec.squeezing_db[i] < floor


def test_loss_ordering(rpm_device):
    grid = 2 * np.pi * np.linspace(4e9, 8e9, 401)
    rows = loss_sweep(rpm_device, PUMP, [0.1], [1.0, 0.99, 0.9, 0.5], grid)
    sq = [r["squeezing_db"] for r in rows]
    assert sq == sorted(sq, reverse=True)
    assert all(r["anti_squeezing_db"] > 0 for r in rows)


def test_loss_model_consistency(rpm_device, band):
    pump = PumpConfig(PUMP, 0.1)
    lossless = spectrum(rpm_device, pump, band)
    lossy = spectrum(rpm_device, pump, band, LossModel(0.8))
    ok = ~lossless.gap_flag
    assert np.allclose(lossy.n_thermal[ok], 0.8 * lossless.n_thermal[ok])
    assert np.all(lossy.s_quad[ok] >= 0.2 - 1e-12)
    assert not lossy.lossless


def test_filtered_variance_without_pump(rpm_device, band):
    spec = spectrum(rpm_device, PumpConfig(PUMP, 0.0), band)
    w0 = 2 * math.pi * 5e9
    assert filtered_two_mode_variance(spec, w0, 2 * math.pi * 50e6) == pytest.approx(1.0)


def test_filtered_variance_zero_width_is_pointwise(rpm_device):
    pump = PumpConfig(PUMP, 0.1)
    w0 = 2 * math.pi * 5.2e9
    grid = np.sort(np.concatenate([2 * np.pi * np.linspace(4e9, 8e9, 2001), [w0, 2 * PUMP - w0]]))
    spec = spectrum(rpm_device, pump, grid)
    point = spectrum(rpm_device, pump, np.array([w0])).s_quad[0]
    assert filtered_two_mode_variance(spec, w0, 0.0) == pytest.approx(point, rel=1e-12)


def test_filtered_variance_converges(rpm_device):
    pump = PumpConfig(PUMP, 0.1)
    w0, h = 2 * math.pi * 5.2e9, 2 * math.pi * 100e6
    coarse = spectrum(rpm_device, pump, 2 * np.pi * np.linspace(4e9, 8e9, 2001))
    fine = spectrum(rpm_device, pump, 2 * np.pi * np.linspace(4e9, 8e9, 20001))
    a = filtered_two_mode_variance(coarse, w0, h)
    b = filtered_two_mode_variance(fine, w0, h)
    assert a == pytest.approx(b, rel=1e-4)
    # averaging over the window cannot beat the best point inside it
    assert b >= np.nanmin(fine.s_quad) - 1e-12


def test_filtered_variance_rejects_gap(rpm_device, band):
    band = _with_gap(rpm_device, band)
    spec = spectrum(rpm_device, PumpConfig(PUMP, 0.1), band)
    gap_centre = band[spec.gap_flag][0]
    with pytest.raises(BandgapError):
        filtered_two_mode_variance(spec, gap_centre, 2 * math.pi * 10e6)
    with pytest.raises(ValueError):
        filtered_two_mode_variance(spec, 2 * math.pi * 5e9, -1.0)


def test_json_round_trip(rpm_device):
    grid = 2 * np.pi * np.linspace(4e9, 8e9, 201)
    spec = spectrum(rpm_device, PumpConfig(PUMP, 0.1), grid, LossModel(0.9))
    back = SqueezeSpectrum.from_json(spec.to_json())
    ok = ~spec.gap_flag
    assert np.array_equal(back.gap_flag, spec.gap_flag)
    assert np.allclose(back.n_thermal[ok], spec.n_thermal[ok], rtol=1e-15)
    assert np.allclose(back.m_squeeze[ok], spec.m_squeeze[ok], rtol=1e-15)
    assert np.allclose(back.omega, spec.omega, rtol=1e-15)


def test_csv_layout(rpm_device):
    spec = spectrum(rpm_device, PumpConfig(PUMP, 0.1), 2 * np.pi * np.linspace(4e9, 8e9, 11))
    lines = spec.to_csv().splitlines()
    assert lines[0] == "omega_hz,gain_db,n_thermal,m_re,m_im,s_db,delta_k,gap_flag"
    assert len(lines) == 12
    assert "-0," not in spec.to_csv()
