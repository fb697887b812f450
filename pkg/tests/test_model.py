import math

import pytest
from hypothesis import given, settings, strategies as st

from omitsense.errors import ConfigError, ParameterError
from omitsense.model import (
    C_LIGHT, HBAR, DriveFields, SystemParams, build_params, drive_amplitude, make_drives,
    photon_energy, power_for_amplitude,
)

import oracles
from conftest import device


def test_hbar_in_internal_units():
    assert HBAR == pytest.approx(oracles.HBAR, rel=1e-15)
    assert HBAR == pytest.approx(1.0546e-4, rel=1e-4)
    assert C_LIGHT == pytest.approx(2.99792458e11, rel=1e-15)


def test_photon_energy_at_532nm():
    # oracle value, frozen
    assert photon_energy(532e3) == pytest.approx(373.39207841145287, rel=1e-12)


def test_pump_amplitude_at_7_3_uW():
    assert drive_amplitude(7.3e6, 532e3) == pytest.approx(139.82308500998275, rel=1e-12)


def test_zero_power_gives_zero_amplitude():
    assert drive_amplitude(0.0, 532e3) == 0.0


@pytest.mark.parametrize("power, wavelength", [(-1.0, 532e3), (1.0, 0.0), (1.0, -5.0)])
def test_drive_amplitude_rejects_bad_input(power, wavelength):
    with pytest.raises(ValueError):
        drive_amplitude(power, wavelength)


@settings(max_examples=100, derandomize=True)
@given(st.floats(1e-3, 1e9), st.floats(300e3, 2000e3))
def test_amplitude_power_round_trip(power, wavelength):
    eps = drive_amplitude(power, wavelength)
    assert power_for_amplitude(eps, wavelength) == pytest.approx(power, rel=1e-12)


def test_defaults_and_derived_fields():
    p = device()
    assert p.detuning_bar_target == -p.omega_m
    assert p.kappa_0 == pytest.approx(p.kappa - p.kappa_ex)
    assert p.eps_probe / p.eps_pump == pytest.approx(math.sqrt(1e-3))


@pytest.mark.parametrize("field", ["m_eff", "omega_m", "gamma_m", "kappa", "kappa_ex"])
def test_nonpositive_rejected_with_name(field):
    with pytest.raises(ParameterError, match=field):
        device(**{field: 0.0})


def test_kappa_ex_above_kappa_rejected():
    with pytest.raises(ParameterError, match="kappa_ex"):
        device(50.0, 60.0)


def test_probe_too_strong_rejected():
    with pytest.raises(ParameterError, match="probe_power"):
        device(probe_power=1e6, pump_power=7.3e6)


def test_with_kappa_critical_coupling():
    p = device().with_kappa(2.0, critical_coupling=True)
    assert (p.kappa, p.kappa_ex) == (2.0, 1.0)
    q = device().with_kappa(2.0)
    assert q.kappa_ex == device().kappa_ex


def test_drive_fields_probe_ratio_limit():
    with pytest.raises(ParameterError):
        DriveFields(eps_pump=1.0, eps_probe=0.2, beat_freq=1.4, pump_detuning=-1.4)
    d = make_drives(device(), -1.4)
    assert d.beat_freq == 1.4
    assert make_drives(device(), -1.4, probe=False).eps_probe == 0.0


def test_build_params_from_text():
    text = """
m_eff = 2.0 pg
omega_m = 1.4 GHz
gamma_m_over_2pi = 35 kHz
kappa_over_2pi = 50 MHz
kappa_ex_over_2pi = 25 MHz
g_coupling = -485 GHz/nm
pump_power = 7.3 uW
probe_power = 7.3 nW
"""
    p = build_params(text)
    ref = device()
    for key in ("m_eff", "omega_m", "gamma_m", "kappa", "kappa_ex", "g_coupling",
                "pump_power", "probe_power"):
        assert getattr(p, key) == pytest.approx(getattr(ref, key), rel=1e-14), key


def test_build_params_missing_key():
    with pytest.raises(ConfigError, match="missing key: kappa_ex"):
        build_params("m_eff = 2 pg\nomega_m = 1.4 GHz\ngamma_m = 1 MHz\nkappa = 1 GHz\n"
                     "g_coupling = -0.485 rad/ns/pm\n")
