"""Device parameters, internal units and drive amplitudes.

Everything in the package works in one scaled unit system:

=====================  ===========================================
quantity               internal unit
=====================  ===========================================
time                   ns
length                 pm
mass                   pg
angular frequency      rad/ns
energy                 pg pm^2 / ns^2  (1e-21 J)
power                  pg pm^2 / ns^3  (1 pW)
field amplitude        ns^-1/2 (square root of photon flux)
=====================  ===========================================

With these choices hbar is ~1e-4 and every state variable stays between
roughly 1e-4 and 1e4, so nothing needs SI-scale exponents.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

from scipy import constants as _codata

from .errors import ParameterError

# J s -> pg pm^2 / ns : 1e15 * 1e24 * 1e-9
HBAR = _codata.hbar * 1e30
# m/s -> pm/ns
C_LIGHT = _codata.c * 1e3

MAX_PROBE_TO_PUMP_POWER = 1e-2


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = HBAR
    c_light: float = C_LIGHT


CONSTANTS = PhysicalConstants()


def photon_energy(wavelength, constants=CONSTANTS):
    """Photon energy hbar*omega for a vacuum wavelength given in pm."""
    if not wavelength > 0:
        raise ValueError(f"wavelength must be positive, got {wavelength!r}")
    return constants.hbar * 2.0 * math.pi * constants.c_light / wavelength


def drive_amplitude(power, wavelength, constants=CONSTANTS):
    """Input field amplitude sqrt(P / (hbar*omega)) in ns^-1/2.

    ``power`` is in pW and ``wavelength`` in pm.
    """
    if power < 0:
        raise ValueError(f"power must be non-negative, got {power!r}")
    return math.sqrt(power / photon_energy(wavelength, constants))


def power_for_amplitude(eps, wavelength, constants=CONSTANTS):
    """Inverse of :func:`drive_amplitude`."""
    return eps * eps * photon_energy(wavelength, constants)


@dataclass(frozen=True)
class SystemParams:
    """Device and drive constants, all in internal units.

    ``detuning_bar_target`` is the effective pump detuning the laser is parked
    at; ``None`` means the red mechanical sideband, -omega_m.
    """

    m_eff: float
    omega_m: float
    gamma_m: float
    kappa: float
    kappa_ex: float
    g_coupling: float
    pump_wavelength: float = 532e3
    pump_power: float = 7.3e6
    probe_power: float = 7.3e3
    detuning_bar_target: float | None = None

    def __post_init__(self):
        for name in ("m_eff", "omega_m", "gamma_m", "kappa", "kappa_ex", "pump_wavelength"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be positive, got {value!r}", key=name)
        if self.kappa_ex > self.kappa:
            raise ParameterError(
                f"kappa_ex must not exceed kappa (got {self.kappa_ex!r} > {self.kappa!r})",
                key="kappa_ex",
            )
        if not math.isfinite(self.g_coupling):
            raise ParameterError("g_coupling must be finite", key="g_coupling")
        for name in ("pump_power", "probe_power"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be non-negative, got {value!r}", key=name)
        if self.probe_power > MAX_PROBE_TO_PUMP_POWER * self.pump_power:
            raise ParameterError(
                "probe_power must be at most 1e-2 of pump_power for the linearised "
                f"response to hold (got {self.probe_power!r} vs {self.pump_power!r})",
                key="probe_power",
            )
        if self.detuning_bar_target is None:
            object.__setattr__(self, "detuning_bar_target", -self.omega_m)
        elif not math.isfinite(self.detuning_bar_target):
            raise ParameterError("detuning_bar_target must be finite", key="detuning_bar_target")

    @property
    def kappa_0(self):
        """Intrinsic cavity loss rate."""
        return self.kappa - self.kappa_ex

    @property
    def eps_pump(self):
        return drive_amplitude(self.pump_power, self.pump_wavelength)

    @property
    def eps_probe(self):
        return drive_amplitude(self.probe_power, self.pump_wavelength)

    def with_kappa(self, kappa, critical_coupling=False):
        """Copy with a new total decay rate; optionally lock kappa_ex = kappa/2."""
        kappa_ex = kappa / 2.0 if critical_coupling else self.kappa_ex
        return replace(self, kappa=kappa, kappa_ex=kappa_ex)

    def replace(self, **changes):
        return replace(self, **changes)

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class DriveFields:
    """Drive amplitudes and frequencies in the frame rotating with the pump.

    ``pump_detuning`` is the bare laser detuning omega_1 - omega_c and
    ``beat_freq`` the probe-pump offset omega_p - omega_1.
    """

    eps_pump: float
    eps_probe: float
    beat_freq: float
    pump_detuning: float
    probe_phase: float = field(default=0.0)

    def __post_init__(self):
        if self.eps_pump < 0 or self.eps_probe < 0:
            raise ParameterError("drive amplitudes must be non-negative")
        if self.eps_pump > 0 and self.eps_probe > 0.1 * self.eps_pump * (1 + 1e-12):
            raise ParameterError("eps_probe/eps_pump must not exceed 0.1", key="eps_probe")


def make_drives(params, pump_detuning, beat_freq=None, probe=True):
    """Build :class:`DriveFields` from ``params``; the beat defaults to omega_m."""
    return DriveFields(
        eps_pump=params.eps_pump,
        eps_probe=params.eps_probe if probe else 0.0,
        beat_freq=params.omega_m if beat_freq is None else beat_freq,
        pump_detuning=pump_detuning,
    )


def build_params(config):
    """Create :class:`SystemParams` from a parsed configuration document.

    Values in the document are already converted to internal units, so this
    only checks presence and delegates invariant checks to the dataclass.
    """
    from .config import DEVICE_KEYS, ConfigDocument, parse_config  # local: avoid cycle
    from .errors import ConfigError

    if not isinstance(config, ConfigDocument):
        config = parse_config(config)
    device = config.section("device")
    required = ("m_eff", "omega_m", "gamma_m", "kappa", "kappa_ex", "g_coupling")
    values = {}
    for key in DEVICE_KEYS:
        if key in device:
            values[key] = float(device[key])
        elif key in required:
            raise ConfigError(f"missing key: {key}", key=key)
    return SystemParams(**values)
