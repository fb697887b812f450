"""Mean-field steady states, their stability, and pump-power scans.

Setting the time derivatives of the driven cavity/oscillator equations to
zero gives

    a = sqrt(kappa_ex) eps / (-i Dbar + kappa/2),     Dbar = Delta - G x
    x = -hbar G |a|^2 / (m omega_m^2)

With ``u = -G x`` (the radiation-pressure shift of the detuning, rad/ns) this
collapses to the cubic ``u ((Delta + u)^2 + kappa^2/4) = p`` with
``p = hbar G^2 kappa_ex eps^2 / (m omega_m^2) >= 0``. Up to three real roots
exist, which is the origin of optical bistability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import NumericalError
from .model import HBAR, drive_amplitude

SELF_CONSISTENCY_RTOL = 1e-10


@dataclass(frozen=True)
class SteadyState:
    """One steady-state branch.

    ``pump_detuning`` is the bare laser detuning omega_1 - omega_c the state was
    solved for; ``delta_bar`` the effective detuning including the
    radiation-pressure shift.
    """

    a_bar: complex
    x_bar: float
    delta_bar: float
    stable: bool
    pump_power: float = 0.0
    pump_detuning: float = 0.0
    marginal: bool = False

    @property
    def photon_number(self):
        return abs(self.a_bar) ** 2


@dataclass
class BistabilityCurve:
    points: list = field(default_factory=list)  # [(power, [SteadyState, ...]), ...]

    @property
    def powers(self):
        return np.array([p for p, _ in self.points])

    @property
    def root_counts(self):
        return np.array([len(states) for _, states in self.points])

    def multistable_range(self):
        """(lowest, highest) scanned power with three roots, or None."""
        multi = [p for p, states in self.points if len(states) >= 3]
        if not multi:
            return None
        return min(multi), max(multi)

    def rows(self):
        """CSV rows: power_uW, branch_index, x_bar_pm, re_a_bar, im_a_bar, stable."""
        for power, states in self.points:
            for i, st in enumerate(states):
                yield (power * 1e-6, i, st.x_bar, st.a_bar.real, st.a_bar.imag, int(st.stable))


def _pressure_coefficient(params, eps):
    """p in u((Delta+u)^2 + kappa^2/4) = p."""
    g = params.g_coupling
    return HBAR * g * g * params.kappa_ex * eps * eps / (params.m_eff * params.omega_m ** 2)


def solve_cubic(b, c, d):
    """Real roots of ``t^3 + b t^2 + c t + d`` in closed form.

    Returns ``(roots, double)`` where ``double`` marks a root of multiplicity
    two (the fold point of a bistability curve). Roots come out ascending.
    """
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    disc = -(4.0 * p ** 3 + 27.0 * q * q)
    scale = max(abs(4.0 * p ** 3), 27.0 * q * q, 1e-300)
    if abs(disc) <= 1e-12 * scale:
        if abs(p) <= 1e-300 ** (1 / 3):
            return [-shift], [False]
        simple, double = 3.0 * q / p, -1.5 * q / p
        roots = sorted([(simple - shift, False), (double - shift, True)])
        return [r for r, _ in roots], [f for _, f in roots]
    if disc > 0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * r)
        theta = math.acos(max(-1.0, min(1.0, arg)))
        roots = [r * math.cos((theta - 2.0 * math.pi * k) / 3.0) - shift for k in range(3)]
        return sorted(roots), [False] * 3
    s = math.sqrt(q * q / 4.0 + p ** 3 / 27.0)
    t = float(np.cbrt(-q / 2.0 + s) + np.cbrt(-q / 2.0 - s))
    return [t - shift], [False]


def _polish(u, b, c, d, iterations=50):
    for _ in range(iterations):
        f = ((u + b) * u + c) * u + d
        df = (3.0 * u + 2.0 * b) * u + c
        if df == 0.0:
            break
        step = f / df
        u -= step
        if abs(step) <= 1e-15 * max(abs(u), 1e-300):
            break
    return u


def laser_detuning(params, reference_power=0.0, delta_bar_target=None):
    """Bare detuning that puts the steady state at ``reference_power`` on target.

    The laser is referenced to the radiation-pressure shifted resonance, so
    at ``reference_power`` the effective detuning equals ``delta_bar_target``
    exactly (there the displacement is explicit).
    """
    target = params.detuning_bar_target if delta_bar_target is None else delta_bar_target
    eps = drive_amplitude(reference_power, params.pump_wavelength)
    n_ref = params.kappa_ex * eps * eps / (target ** 2 + params.kappa ** 2 / 4.0)
    x_ref = -HBAR * params.g_coupling * n_ref / (params.m_eff * params.omega_m ** 2)
    return target + params.g_coupling * x_ref


def _state_from_shift(params, u, eps, pump_detuning, pump_power, marginal=False):
    g = params.g_coupling
    delta_bar = pump_detuning + u
    a_bar = math.sqrt(params.kappa_ex) * eps / complex(params.kappa / 2.0, -delta_bar)
    x_bar = -u / g if g != 0 else 0.0
    # self-consistency of both steady-state relations
    x_check = -HBAR * g * abs(a_bar) ** 2 / (params.m_eff * params.omega_m ** 2)
    if abs(x_bar - x_check) > SELF_CONSISTENCY_RTOL * max(abs(x_bar), abs(x_check), 1e-300):
        raise NumericalError(
            f"steady state failed self-consistency: x={x_bar!r}, from field {x_check!r}"
        )
    state = SteadyState(
        a_bar=a_bar, x_bar=x_bar, delta_bar=delta_bar, stable=False,
        pump_power=pump_power, pump_detuning=pump_detuning, marginal=marginal,
    )
    stable = (not marginal) and classify_stability(params, state)
    return replace(state, stable=stable)


def steady_states(params, pump_power=None, delta_bar_target=None, reference_power=0.0,
                  pump_detuning=None):
    """All real steady states at ``pump_power``, sorted by ascending |x_bar|.

    The laser detuning is fixed by :func:`laser_detuning` from
    ``delta_bar_target`` and ``reference_power`` unless ``pump_detuning`` is
    given explicitly. With the default reference power of zero the laser sits
    at ``delta_bar_target`` from the cold-cavity resonance.
    """
    power = params.pump_power if pump_power is None else pump_power
    if power < 0:
        raise ValueError("pump_power must be non-negative")
    if pump_detuning is None:
        pump_detuning = laser_detuning(params, reference_power, delta_bar_target)
    eps = drive_amplitude(power, params.pump_wavelength)

    if params.g_coupling == 0.0:
        return [_state_from_shift(params, 0.0, eps, pump_detuning, power)]

    b = 2.0 * pump_detuning
    c = pump_detuning ** 2 + params.kappa ** 2 / 4.0
    d = -_pressure_coefficient(params, eps)
    roots, doubles = solve_cubic(b, c, d)
    states = []
    for u, dbl in zip(roots, doubles):
        u = _polish(u, b, c, d) if not dbl else u
        states.append(_state_from_shift(params, u, eps, pump_detuning, power, marginal=dbl))
    states.sort(key=lambda s: abs(s.x_bar))
    return states


def operating_point(params, pump_power=None, delta_bar_target=None):
    """The steady state with the effective detuning exactly on target.

    This is the working point used for every spectrum and sensing run: the
    laser is referenced to the shifted resonance at the operating power.
    """
    power = params.pump_power if pump_power is None else pump_power
    target = params.detuning_bar_target if delta_bar_target is None else delta_bar_target
    states = steady_states(params, power, target, reference_power=power)
    best = min(states, key=lambda s: abs(s.delta_bar - target))
    return best


def stability_matrix(params, state, omega_m=None):
    """Jacobian of (Re da, Im da, dx, dv) about ``state``."""
    om = params.omega_m if omega_m is None else omega_m
    g, k2, db = params.g_coupling, params.kappa / 2.0, state.delta_bar
    ar, ai = state.a_bar.real, state.a_bar.imag
    force = HBAR * g / params.m_eff
    return np.array([
        [-k2, -db, g * ai, 0.0],
        [db, -k2, -g * ar, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-2.0 * force * ar, -2.0 * force * ai, -om * om, -params.gamma_m],
    ])


def classify_stability(params, state, omega_m=None):
    """True iff every eigenvalue of the linearised dynamics has negative real part."""
    eig = np.linalg.eigvals(stability_matrix(params, state, omega_m))
    return bool(np.all(eig.real < 0.0))


def bistability_scan(params, powers, reference_power=0.0, delta_bar_target=None):
    """Steady states for every pump power in ``powers`` (ascending)."""
    powers = np.asarray(powers, dtype=float)
    if powers.ndim != 1 or powers.size == 0:
        raise ValueError("powers must be a non-empty 1-D sequence")
    if np.any(np.diff(powers) < 0):
        raise ValueError("powers must be ascending")
    detuning = laser_detuning(params, reference_power, delta_bar_target)
    curve = BistabilityCurve()
    for p in powers:
        curve.points.append((float(p), steady_states(params, float(p), pump_detuning=detuning)))
    return curve
