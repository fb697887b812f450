"""Linearised pump-probe response around a steady state.

Writing the intracavity field as ``a_bar + A- e^{-i W t} + A+ e^{+i W t}`` and
the displacement as ``x_bar + X e^{-i W t} + c.c.`` turns the equations of
motion into a 3x3 complex linear system for (A-, conj(A+), X). The direct
solve in :func:`solve_sidebands` is the reference; the closed forms in
:func:`closed_form_transmissions` are kept as an independent check.

Output conventions (intracavity ``A`` mapped to the waveguide by
``sqrt(kappa_ex)``):

* ``t_hom = sqrt(kappa_ex) A- / s_p``   probe-frequency (homodyne) component
* ``t_minus = 1 - t_hom``               probe transmission
* ``t_plus = sqrt(kappa_ex) conj(A+) / s_p``, with the pump phase removed,
  the Stokes component at ``2 omega_1 - omega_p``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError
from .model import HBAR

RESIDUAL_RTOL = 1e-9


class RegimeWarning(UserWarning):
    """The probe transmission left the range where linearisation is trustworthy."""


@dataclass(frozen=True)
class SidebandSolution:
    a_minus: complex
    a_plus_conj: complex
    x_amp: complex
    residual: float = 0.0


@dataclass
class ResponseSpectrum:
    delta_prime: np.ndarray
    t_plus: np.ndarray
    t_minus: np.ndarray
    t_hom: np.ndarray

    def __post_init__(self):
        n = len(self.delta_prime)
        if not (len(self.t_plus) == len(self.t_minus) == len(self.t_hom) == n):
            raise ValueError("spectrum arrays must have equal length")
        if np.any(np.diff(self.delta_prime) <= 0):
            raise ValueError("delta_prime must be strictly ascending")

    def rows(self):
        """CSV rows: dprime_MHz (angular) then re/im/abs of t_plus, t_minus, t_hom."""
        for i, dp in enumerate(self.delta_prime):
            row = [dp * 1e3]
            for arr in (self.t_plus, self.t_minus, self.t_hom):
                z = arr[i]
                row += [z.real, z.imag, abs(z)]
            yield tuple(row)


def mech_susceptibility(params, omega, omega_m=None):
    """chi(W) = 1 / (m (omega_m^2 - W^2 - i W gamma_m)) in pg^-1 ns^2."""
    om = params.omega_m if omega_m is None else omega_m
    omega = np.asarray(omega, dtype=float)
    out = 1.0 / (params.m_eff * (om * om - omega * omega - 1j * omega * params.gamma_m))
    return out if out.ndim else complex(out)


def response_factor(params, state, omega, omega_m=None, sideband="stokes"):
    """Dimensionless optomechanical response f(W).

    ``f = hbar G^2 |a_bar|^2 chi(W) / D`` where ``D`` is the cavity response at
    the Stokes sideband, ``i(Dbar - W) + kappa/2``. This is the form for which
    the closed-form sideband amplitudes and ``K_st = |1 + 1/(i f)|`` are exact.

    ``sideband="probe"`` uses the probe-sideband denominator
    ``i(Dbar + W) + kappa/2`` instead; on the red sideband that denominator is
    resonant and gives |f| of several hundred, but it does not reproduce the
    direct solve and is only kept for comparison.
    """
    chi = mech_susceptibility(params, omega, omega_m)
    db = state.delta_bar
    if sideband == "stokes":
        den = 1j * (db - np.asarray(omega)) + params.kappa / 2.0
    elif sideband == "probe":
        den = 1j * (db + np.asarray(omega)) + params.kappa / 2.0
    else:
        raise ValueError(f"sideband must be 'stokes' or 'probe', got {sideband!r}")
    f = HBAR * params.g_coupling ** 2 * abs(state.a_bar) ** 2 * chi / den
    return f if np.ndim(f) else complex(f)


def sideband_matrix(params, state, omega, omega_m=None):
    """Coefficient matrix acting on (A-, conj(A+), X)."""
    om = params.omega_m if omega_m is None else omega_m
    g, k2, db, a = params.g_coupling, params.kappa / 2.0, state.delta_bar, state.a_bar
    return np.array([
        [-1j * (db + omega) + k2, 0.0, 1j * g * a],
        [0.0, 1j * (db - omega) + k2, -1j * g * a.conjugate()],
        [HBAR * g * a.conjugate(), HBAR * g * a,
         params.m_eff * (om * om - omega * omega - 1j * omega * params.gamma_m)],
    ], dtype=complex)


def _relative_residual(matrix, vec, rhs):
    terms = matrix * vec[None, :]
    scale = np.maximum(np.abs(terms).max(axis=1), np.abs(rhs))
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(np.abs(terms.sum(axis=1) - rhs) / scale))


def solve_sidebands(params, state, probe_amp, omega, omega_m=None):
    """Solve the linearised system directly for one beat frequency."""
    if not probe_amp > 0:
        raise ValueError("probe_amp must be positive")
    matrix = sideband_matrix(params, state, omega, omega_m)
    rhs = np.array([math.sqrt(params.kappa_ex) * probe_amp, 0.0, 0.0], dtype=complex)
    det = np.linalg.det(matrix)
    if not abs(det) > 1e-300:
        raise SingularSystemError(f"sideband system is singular (|det| = {abs(det):.3g})")
    try:
        vec = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from None
    res = _relative_residual(matrix, vec, rhs)
    return SidebandSolution(complex(vec[0]), complex(vec[1]), complex(vec[2]), res)


def _pump_phase(state):
    """exp(2i arg a_bar); removes the pump-phase gauge from the Stokes term."""
    if state.a_bar == 0:
        return 1.0
    return cmath.exp(2j * cmath.phase(state.a_bar))


def transmissions(params, state, omega, omega_m=None):
    """(t_plus, t_minus, t_hom) at beat frequency ``omega`` from the direct solve."""
    sol = solve_sidebands(params, state, 1.0, omega, omega_m)
    root = math.sqrt(params.kappa_ex)
    t_hom = root * sol.a_minus
    t_plus = root * sol.a_plus_conj * _pump_phase(state)
    t_minus = 1.0 - t_hom
    if abs(t_minus) > 1.5:
        warnings.warn(
            f"|t_minus| = {abs(t_minus):.3g} > 1.5: outside the weak-probe regime",
            RegimeWarning, stacklevel=2,
        )
    return t_plus, t_minus, t_hom


def closed_form_transmissions(params, state, omega, omega_m=None):
    """Analytic (t_plus, t_minus, t_hom) assuming a real pump amplitude.

    With ``f`` from :func:`response_factor` and
    ``N = -i(Dbar + W) + kappa/2 + 2 Dbar f``::

        t_plus = -i f kappa_ex / N
        t_hom  = (1 + i f) kappa_ex / N,   t_minus = 1 - t_hom
    """
    f = response_factor(params, state, omega, omega_m)
    db = state.delta_bar
    den = -1j * (db + omega) + params.kappa / 2.0 + 2.0 * db * f
    t_plus = -1j * f * params.kappa_ex / den
    t_hom = (1.0 + 1j * f) * params.kappa_ex / den
    return t_plus, 1.0 - t_hom, t_hom


def closed_form_sidebands(params, state, probe_amp, omega, omega_m=None):
    """Analytic sideband amplitudes; companion of :func:`closed_form_transmissions`."""
    t_plus, _, t_hom = closed_form_transmissions(params, state, omega, omega_m)
    root = math.sqrt(params.kappa_ex)
    a_minus = t_hom * probe_amp / root
    a_plus_conj = t_plus * probe_amp / root / _pump_phase(state)
    return a_minus, a_plus_conj


def spectrum_sweep(params, state, delta_prime_grid, probe_amp=None, omega_m=None):
    """Evaluate :func:`transmissions` at W = params.omega_m + dprime.

    ``omega_m`` optionally detunes the resonator itself (mass loading) while the
    grid stays referenced to the unloaded frequency. ``probe_amp`` is accepted
    for symmetry with :func:`solve_sidebands`; transmissions do not depend on
    it in the linear regime.
    """
    grid = np.atleast_1d(np.asarray(delta_prime_grid, dtype=float))
    if np.any(np.diff(grid) <= 0):
        raise ValueError("delta_prime grid must be strictly ascending")
    base = params.omega_m
    t_plus = np.empty(grid.size, complex)
    t_minus = np.empty(grid.size, complex)
    t_hom = np.empty(grid.size, complex)
    for i, dp in enumerate(grid):
        t_plus[i], t_minus[i], t_hom[i] = transmissions(params, state, base + dp, omega_m)
    return ResponseSpectrum(grid, t_plus, t_minus, t_hom)
