import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omitsense.errors import SingularSystemError
from omitsense.linear_response import (
    RegimeWarning, ResponseSpectrum, closed_form_sidebands, closed_form_transmissions,
    mech_susceptibility, response_factor, sideband_matrix, solve_sidebands, spectrum_sweep,
    transmissions,
)
from omitsense.steady_state import SteadyState, operating_point, stability_matrix

import oracles
from conftest import TWO_PI, device


def _dark(p):
    """Undriven cavity parked on the red sideband."""
    return SteadyState(a_bar=0j, x_bar=0.0, delta_bar=-p.omega_m, stable=True)


def test_susceptibility_limits(bare):
    assert mech_susceptibility(bare, 0.0) == pytest.approx(1 / (bare.m_eff * bare.omega_m ** 2))
    chi = mech_susceptibility(bare, bare.omega_m)
    assert chi.real == pytest.approx(0.0, abs=1e-12 * abs(chi))
    assert chi.imag == pytest.approx(1 / (bare.m_eff * bare.omega_m * bare.gamma_m))
    # pg^-1 ns^2 -> kg^-1 s^2 is a factor 1e-3
    assert abs(chi) * 1e-3 == pytest.approx(1.62, rel=5e-3)


def test_response_factor_zero_field(bare):
    assert response_factor(bare, _dark(bare), bare.omega_m) == 0


def test_response_factor_magnitudes(bare):
    s = operating_point(bare)
    f = response_factor(bare, s, bare.omega_m)
    fp = response_factor(bare, s, bare.omega_m, sideband="probe")
    # frozen from the Cramer oracle: |1 + 1/(i f)| = |A-|/|A+*|
    assert abs(f) == pytest.approx(22.22807152817005, rel=1e-9)
    assert 300 <= abs(fp) <= 500
    assert abs(fp.imag) > abs(fp.real)
    with pytest.raises(ValueError):
        response_factor(bare, s, 1.4, sideband="both")


def test_response_factor_linear_in_power(bare):
    s1 = operating_point(bare, 2e6)
    s2 = operating_point(bare, 4e6)
    f1 = response_factor(bare, s1, bare.omega_m)
    f2 = response_factor(bare, s2, bare.omega_m)
    assert abs(f2 / f1) == pytest.approx(2.0, rel=1e-9)


def test_decoupled_cavity_solution(bare):
    sol = solve_sidebands(bare, _dark(bare), 0.3, 1.4)
    expected = math.sqrt(bare.kappa_ex) * 0.3 / (-1j * (-1.4 + 1.4) + bare.kappa / 2)
    assert sol.a_minus == pytest.approx(expected)
    assert sol.a_plus_conj == 0 and sol.x_amp == 0


def test_critical_coupling_dip():
    p = device(100.0, 50.0)
    t_plus, t_minus, _ = transmissions(p, _dark(p), p.omega_m)
    assert abs(t_minus) < 1e-12 and t_plus == 0


def test_residual_small_at_operating_point(bare):
    sol = solve_sidebands(bare, operating_point(bare), 1.0, bare.omega_m)
    assert sol.residual <= 1e-9


def test_solve_rejects_bad_probe(bare):
    with pytest.raises(ValueError):
        solve_sidebands(bare, operating_point(bare), 0.0, 1.4)


def test_singular_system_raises(bare, monkeypatch):
    import omitsense.linear_response as lr
    monkeypatch.setattr(lr, "sideband_matrix", lambda *a, **k: np.zeros((3, 3), complex))
    with pytest.raises(SingularSystemError):
        lr.solve_sidebands(bare, operating_point(bare), 1.0, 1.4)


def test_g_to_zero_lorentzian():
    p = device(100.0, 25.0, g_coupling=0.0)
    s = operating_point(p)
    for w in (1.3, 1.4, 1.5):
        t_plus, t_minus, _ = transmissions(p, s, w)
        bare = 1 - p.kappa_ex / (-1j * (s.delta_bar + w) + p.kappa / 2)
        assert t_plus == 0
        assert abs(t_minus - bare) <= 1e-9


def test_stokes_equals_homodyne_at_resonance(omit):
    t_plus, _, t_hom = transmissions(omit, operating_point(omit), omit.omega_m)
    assert abs(t_hom) == pytest.approx(abs(t_plus), rel=1e-2)


def _dip(p, half_width, n=4001):
    grid = np.linspace(-half_width, half_width, n)
    mag = np.abs(spectrum_sweep(p, operating_point(p), grid).t_hom)
    return grid, mag


def test_transparency_feature_is_sub_kappa(omit):
    grid, mag = _dip(omit, omit.kappa / 2)
    i = int(np.argmin(mag))
    assert abs(grid[i]) < omit.kappa / 10
    assert min(mag[0], mag[-1]) > 5 * mag[i]


def test_feature_centred_within_effective_linewidth(omit):
    s = operating_point(omit)
    eig = np.linalg.eigvals(stability_matrix(omit, s))
    mech = eig[np.argmin(np.abs(np.abs(eig.imag) - omit.omega_m))]
    gamma_eff = -2 * mech.real
    grid, mag = _dip(omit, 0.02)
    centre = grid[int(np.argmin(mag))]
    assert abs(centre) / omit.omega_m <= gamma_eff / omit.omega_m


def test_single_point_sweep_matches_transmissions(omit):
    s = operating_point(omit)
    spec = spectrum_sweep(omit, s, [0.0])
    assert spec.t_hom[0] == transmissions(omit, s, omit.omega_m)[2]


def test_spectrum_validation():
    with pytest.raises(ValueError):
        ResponseSpectrum(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2), np.zeros(2))
    with pytest.raises(ValueError):
        ResponseSpectrum(np.array([0.0, 1.0]), np.zeros(1), np.zeros(2), np.zeros(2))


@pytest.mark.parametrize("offset", np.linspace(-0.5, 0.5, 11))
def test_regime_warning_iff_large_transmission(offset):
    p = device(100.0, 100.0, pump_power=2e9, probe_power=0.0)
    s = operating_point(p)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        _, t_minus, _ = transmissions(p, s, p.omega_m + offset)
    warned = any(issubclass(c.category, RegimeWarning) for c in caught)
    assert warned == (abs(t_minus) > 1.5)


def test_rows_schema(omit):
    spec = spectrum_sweep(omit, operating_point(omit), [-0.001, 0.0, 0.001])
    rows = list(spec.rows())
    assert len(rows) == 3 and len(rows[0]) == 10
    assert rows[2][0] == pytest.approx(1.0)


def _random_point(draw_kappa, frac, power, target, w):
    p = device(draw_kappa, frac * draw_kappa, pump_power=power, probe_power=0.0,
               detuning_bar_target=target)
    return p, operating_point(p), w


@settings(max_examples=100, derandomize=True, deadline=None)
@given(st.floats(20, 400), st.floats(0.1, 1.0), st.floats(1e5, 5e7), st.floats(-2.5, -0.5),
       st.floats(0.5, 2.5))
def test_solver_matches_cramer_and_closed_form(kappa_mhz, frac, power, target, w):
    p, s, w = _random_point(kappa_mhz, frac, power, target, w)
    sol = solve_sidebands(p, s, 1.0, w)
    assert sol.residual <= 1e-9
    ref = oracles.sidebands_cramer(p.m_eff, p.omega_m, p.gamma_m, p.kappa, p.kappa_ex,
                                   p.g_coupling, s.a_bar, s.delta_bar, w)
    scale = max(abs(ref[0]), abs(ref[1]))
    assert abs(sol.a_minus - ref[0]) <= 1e-8 * scale
    assert abs(sol.a_plus_conj - ref[1]) <= 1e-8 * scale
    am, apc = closed_form_sidebands(p, s, 1.0, w)
    assert abs(am - sol.a_minus) <= 1e-8 * scale
    assert abs(apc - sol.a_plus_conj) <= 1e-8 * scale


@settings(max_examples=100, derandomize=True, deadline=None)
@given(st.floats(20, 400), st.floats(0.1, 1.0), st.floats(1e5, 5e7), st.floats(-2.5, -0.5),
       st.floats(0.5, 2.5))
def test_kst_identity(kappa_mhz, frac, power, target, w):
    p, s, w = _random_point(kappa_mhz, frac, power, target, w)
    t_plus, _, t_hom = transmissions(p, s, w)
    f = response_factor(p, s, w)
    assert abs(t_hom / t_plus) == pytest.approx(abs(1 + 1 / (1j * f)), rel=1e-9)


def test_closed_form_transmissions_agree(omit):
    s = operating_point(omit)
    direct = transmissions(omit, s, omit.omega_m)
    closed = closed_form_transmissions(omit, s, omit.omega_m)
    for a, b in zip(direct, closed):
        assert abs(a - b) <= 1e-9 * max(abs(a), 1)


def test_sideband_matrix_shape(bare):
    m = sideband_matrix(bare, operating_point(bare), 1.4)
    assert m.shape == (3, 3) and m[0, 1] == 0 and m[1, 0] == 0
