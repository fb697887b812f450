import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from omitsense.model import HBAR
from omitsense.steady_state import (
    bistability_scan, classify_stability, laser_detuning, operating_point, solve_cubic,
    stability_matrix, steady_states,
)

import oracles
from conftest import device


def _check_relations(p, s, rtol=1e-10):
    x = -HBAR * p.g_coupling * abs(s.a_bar) ** 2 / (p.m_eff * p.omega_m ** 2)
    assert s.x_bar == pytest.approx(x, rel=rtol, abs=1e-300)
    a = math.sqrt(p.kappa_ex) * p.eps_pump / complex(p.kappa / 2, -s.delta_bar)
    if s.pump_power == p.pump_power:
        assert abs(s.a_bar - a) <= rtol * abs(a)


def test_zero_pump_single_trivial_root(bare):
    states = steady_states(bare, 0.0)
    assert len(states) == 1
    assert states[0].x_bar == 0.0 and states[0].a_bar == 0
    assert states[0].stable


def test_operating_power_single_stable_root(bare):
    states = steady_states(bare, 7.3e6)
    assert len(states) == 1
    ref = oracles.steady_roots_scan(2.0, 1.4, bare.kappa, bare.kappa_ex, -0.485,
                                    oracles.drive_amplitude(7.3e6, 532e3), -1.4)
    assert states[0].x_bar == pytest.approx(0.02047509228255974, abs=1e-9)
    assert states[0].x_bar == pytest.approx(ref[0], abs=1e-9)
    assert states[0].x_bar > 0  # G < 0 pushes the mirror outward
    assert states[0].stable
    _check_relations(bare, states[0])


def test_three_roots_at_80uW_stability(bare):
    states = steady_states(bare, 80e6)
    assert len(states) == 3
    low, mid, high = sorted(states, key=lambda s: s.x_bar)
    assert low.stable and not mid.stable
    # middle root: saddle, one real positive eigenvalue
    eig = np.linalg.eigvals(stability_matrix(bare, mid))
    assert np.any((eig.real > 0) & (np.abs(eig.imag) < 1e-12))
    # upper root sits blue of the shifted resonance: radiation pressure
    # anti-damps the mechanics and the instability is oscillatory
    assert high.delta_bar > 0 and not high.stable
    eig = np.linalg.eigvals(stability_matrix(bare, high))
    assert np.all(np.abs(eig[eig.real > 0].imag) > 0.5)


def test_roots_sorted_by_magnitude(bare):
    xs = [abs(s.x_bar) for s in steady_states(bare, 100e6)]
    assert xs == sorted(xs)


def test_operating_point_is_on_target(bare):
    st_ = operating_point(bare)
    assert st_.delta_bar == pytest.approx(-bare.omega_m, rel=1e-12)
    assert st_.pump_detuning == pytest.approx(laser_detuning(bare, bare.pump_power), rel=1e-15)


def test_solve_cubic_known_roots():
    roots, dbl = solve_cubic(-6.0, 11.0, -6.0)  # (t-1)(t-2)(t-3)
    np.testing.assert_allclose(roots, [1, 2, 3], rtol=1e-12)
    assert dbl == [False] * 3
    roots, dbl = solve_cubic(0.0, 0.0, -8.0)
    np.testing.assert_allclose(roots, [2.0])


def test_solve_cubic_double_root_flagged():
    roots, dbl = solve_cubic(-4.0, 5.0, -2.0)  # (t-1)^2 (t-2)
    assert len(roots) == 2
    assert dict(zip([round(r, 9) for r in roots], dbl)) == {1.0: True, 2.0: False}


def test_marginal_root_reported_unstable(bare):
    # locate the lower fold of the default scan and land on it
    p_lo, p_hi = 12e6, 14e6
    for _ in range(80):
        mid = 0.5 * (p_lo + p_hi)
        if len(steady_states(bare, mid)) == 3:
            p_hi = mid
        else:
            p_lo = mid
    states = steady_states(bare, p_hi)
    assert len(states) in (2, 3)
    assert sum(not s.stable for s in states) >= 1


def test_stability_matrix_undriven():
    p = device()
    s = steady_states(p, 0.0)[0]
    eig = np.linalg.eigvals(stability_matrix(p, s))
    assert np.all(eig.real < 0)
    assert classify_stability(p, s)


def test_scan_powers_zero_and_validation(bare):
    curve = bistability_scan(bare, [0.0])
    assert curve.root_counts.tolist() == [1]
    assert curve.points[0][1][0].x_bar == 0.0
    with pytest.raises(ValueError):
        bistability_scan(bare, [])
    with pytest.raises(ValueError):
        bistability_scan(bare, [2e6, 1e6])


def test_scan_rows_schema(bare):
    rows = list(bistability_scan(bare, [7.3e6, 80e6]).rows())
    assert len(rows) == 4
    assert rows[0][:2] == (7.3, 0)


def test_lowest_stable_branch_monotone(bare):
    curve = bistability_scan(bare, np.linspace(1e6, 300e6, 120))
    # past the upper fold only the blue-detuned root is left, and it is unstable
    low = [min((s for s in states if s.stable), key=lambda s: abs(s.x_bar)).x_bar
           for _, states in curve.points if any(s.stable for s in states)]
    assert len(low) > 50
    assert np.all(np.diff(np.abs(low)) >= 0)


@settings(max_examples=100, derandomize=True, deadline=None)
@given(
    power=st.floats(0.0, 400e6),
    kappa_mhz=st.floats(20, 400),
    frac=st.floats(0.1, 1.0),
    g=st.floats(-1.0, 1.0),
    target=st.floats(-3.0, 3.0),
)
def test_roots_self_consistent_and_odd(power, kappa_mhz, frac, g, target):
    assume(abs(g) > 1e-6)
    p = device(kappa_mhz, frac * kappa_mhz, g_coupling=g, pump_power=max(power, 1.0),
               probe_power=0.0)
    states = steady_states(p, p.pump_power, delta_bar_target=target)
    marginal = sum(s.marginal for s in states)
    assert len(states) + marginal in (1, 3)
    for s in states:
        _check_relations(p, s)
