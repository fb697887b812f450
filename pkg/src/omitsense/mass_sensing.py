"""Relative-intensity observable K_st and the mass it encodes.

K_st is the ratio of the homodyne (probe-frequency) to the Stokes output
amplitude. Propagation losses common to both sidebands cancel in the ratio,
so only the intracavity response matters:

    K_st = |t_hom / t_plus| = |1 + 1/(i f)|

with ``f`` from :func:`omitsense.linear_response.response_factor`. A mass
``m_d`` deposited on the resonator lowers its frequency by
``dW = m_d omega_m / (2 m_eff)``. The probe stays at the unloaded frequency,
so the resonator is pulled off the OMIT window and K_st grows almost
linearly with ``m_d``.

Masses are in pg internally; derivative and slope helpers that talk about
"per fg" say so explicitly.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import InversionError
from .linear_response import response_factor
from .model import HBAR, drive_amplitude, power_for_amplitude
from .steady_state import operating_point

log = logging.getLogger(__name__)

FG = 1e-3  # pg
DERIVATIVE_STEP = 1e-3 * FG


@dataclass
class SensingCurve:
    shifts: np.ndarray  # rad/ns, or pg when ``axis == "mass"``
    kst: np.ndarray
    axis: str = "shift"

    def rows(self):
        """CSV rows (shift_MHz or mass_fg, kst); the shift is angular, like omega_m."""
        xs = self.shifts / FG if self.axis == "mass" else self.shifts * 1e3
        return zip(xs.tolist(), self.kst.tolist())


@dataclass
class SensitivityMap:
    kappa_grid: np.ndarray
    g_eps_grid: np.ndarray
    beta: np.ndarray  # per fg, shape (len(kappa_grid), len(g_eps_grid))

    def rows(self):
        """CSV rows (kappa_GHz, g_eps, beta_per_fg); kappa as ordinary frequency."""
        for i, k in enumerate(self.kappa_grid):
            for j, ge in enumerate(self.g_eps_grid):
                yield (k / (2 * math.pi), ge, self.beta[i, j])


def relative_intensity(params, state, omega_probe=None, omega_m_actual=None):
    """K_st = |1 + 1/(i f)| for a probe at ``omega_probe`` and a resonator at
    ``omega_m_actual`` (both default to the unloaded ``omega_m``)."""
    w = params.omega_m if omega_probe is None else omega_probe
    f = response_factor(params, state, w, omega_m_actual)
    if np.any(np.asarray(f) == 0):
        raise ZeroDivisionError("undefined ratio: Stokes vanishes (f = 0)")
    k = np.abs(1.0 + 1.0 / (1j * np.asarray(f)))
    return k if np.ndim(k) else float(k)


def mass_from_shift(params, delta_omega_m):
    """Deposited mass (pg) for a resonance downshift ``delta_omega_m`` (rad/ns)."""
    return 2.0 * params.m_eff / params.omega_m * delta_omega_m


def shift_from_mass(params, m_d):
    """Resonance downshift (rad/ns) caused by a deposited mass ``m_d`` (pg)."""
    return m_d * params.omega_m / (2.0 * params.m_eff)


def loaded_frequency(params, m_d):
    """Mechanical frequency of the loaded resonator, omega_m - shift."""
    return params.omega_m - shift_from_mass(params, m_d)


def kst_of_mass(params, state, m_d, include_unity=True):
    """K_st as an explicit function of deposited mass.

    With ``d = m_d omega_m / (2 m_eff)`` and ``n = |a_bar|^2``::

        K = | 1 + m_eff/(hbar G^2 n) (2 omega_m + d - i kappa/2)
                                     (2 omega_m d - d^2 - i omega_m gamma_m) |

    The product inside is 1/(i f) for a red-sideband pump and a probe held at
    the unloaded frequency, up to a relative correction of order
    ``d / omega_m``. ``include_unity=False`` drops the leading 1 and returns
    ``1/|f|``, which is small (not ~1) near m_d = 0.
    """
    m_d = np.asarray(m_d, dtype=float)
    om, k, g = params.omega_m, params.kappa, params.gamma_m
    d = shift_from_mass(params, m_d)
    n = abs(state.a_bar) ** 2
    if n == 0:
        raise ZeroDivisionError("undefined ratio: Stokes vanishes (no intracavity pump)")
    pref = params.m_eff / (HBAR * params.g_coupling ** 2 * n)
    inner = pref * (2 * om + d - 0.5j * k) * (2 * om * d - d * d - 1j * om * g)
    out = np.abs(1.0 + inner) if include_unity else np.abs(inner)
    return out if out.ndim else float(out)


def derivatives(func, x0=0.0, step=DERIVATIVE_STEP):
    """First and second derivative of ``func`` at ``x0``.

    Central differences at ``step`` and ``step/2`` combined by one Richardson
    extrapolation (error O(step^4)).
    """
    def d1(h):
        return (func(x0 + h) - func(x0 - h)) / (2.0 * h)

    def d2(h):
        return (func(x0 + h) - 2.0 * func(x0) + func(x0 - h)) / (h * h)

    first = (4.0 * d1(step / 2) - d1(step)) / 3.0
    second = (4.0 * d2(step / 2) - d2(step)) / 3.0
    return first, second


def _curvature_floor(func, x0, step):
    # rounding noise of the second difference at the finer step
    scale = max(abs(func(x0 + step)), abs(func(x0)), abs(func(x0 - step)), 1e-300)
    return max(1e-30, 16.0 * np.finfo(float).eps * scale / (step / 2) ** 2)


def ratio_of_derivatives(func, x0=0.0, step=DERIVATIVE_STEP):
    """|f'| / |f''| at ``x0``; ``inf`` when the curvature is below rounding noise."""
    first, second = derivatives(func, x0, step)
    if abs(second) <= _curvature_floor(func, x0, step):
        return math.inf
    return abs(first) / abs(second)


def sensitivity_beta(params, state, step=DERIVATIVE_STEP):
    """dK_st/dm_d at m_d = 0, per fg, from Richardson-refined central differences."""
    first, _ = derivatives(lambda m: kst_of_mass(params, state, m), 0.0, step)
    return first * FG


def beta_closed_form(params, eps_pump=None):
    """Closed-form slope expression, per fg, kept for comparison only.

    ``m W^2 (G' k^4 + 12 G' k^2 W^2 - 4 k^2 W^2 + 16 G' W^2)
    / (G^2 eps^2 hbar kappa_ex (k^2 + 4 W^2) sqrt(k^2 + 16 W^2))`` with
    ``W = omega_m``, ``k = kappa`` and ``G' = gamma_m``. The expression is not
    dimensionally homogeneous and does not track the finite-difference slope;
    :func:`sensitivity_beta` is the value used everywhere.
    """
    eps = params.eps_pump if eps_pump is None else eps_pump
    w, k, gm = params.omega_m, params.kappa, params.gamma_m
    num = params.m_eff * w ** 2 * (
        gm * k ** 4 + 12 * gm * k ** 2 * w ** 2 - 4 * k ** 2 * w ** 2 + 16 * gm * w ** 2
    )
    den = (params.g_coupling ** 2 * eps ** 2 * HBAR * params.kappa_ex
           * (k ** 2 + 4 * w ** 2) * math.sqrt(k ** 2 + 16 * w ** 2))
    return num / den * FG


def linearity_ratio(params, state, step=DERIVATIVE_STEP):
    """r = |K'(0)| / |K''(0)| in fg: the mass at which curvature catches up.

    The quadratic term stays below a fraction ``q`` of the linear one for all
    masses up to ``2 q r``.
    """
    return ratio_of_derivatives(lambda m: kst_of_mass(params, state, m), 0.0, step) / FG


def invert_mass(params, state, kst_measured, kst_baseline, upper=None, zero_tolerance=1e-3):
    """Deposited mass (pg) whose normalised K_st matches a measurement.

    Solves ``K(m)/K(0) = kst_measured/kst_baseline`` on ``[0, upper]``
    (default ``m_eff/10``). Readings below the zero point by less than
    ``zero_tolerance`` (relative) map to zero mass.
    """
    if not kst_baseline > 0:
        raise InversionError("kst_baseline must be positive")
    target = kst_measured / kst_baseline
    if target <= 1.0:
        if target >= 1.0 - zero_tolerance:
            return 0.0
        raise InversionError(
            f"measured K_st is below the zero point (ratio {target:.6g}); mass out of sensing range"
        )
    k0 = kst_of_mass(params, state, 0.0)
    upper = params.m_eff / 10.0 if upper is None else upper

    def residual(m):
        return kst_of_mass(params, state, m) / k0 - target

    # start from the linear estimate and widen until the root is bracketed
    beta_pg = sensitivity_beta(params, state) / FG
    guess = (target - 1.0) * k0 / beta_pg if beta_pg > 0 else upper
    hi = min(max(2.0 * guess, 1e-9), upper)
    while residual(hi) < 0:
        if hi >= upper:
            raise InversionError("no sign change in bracket: mass out of sensing range")
        hi = min(2.0 * hi, upper)
    return brentq(residual, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def kst_curve(params, state, shifts, axis="shift"):
    """K_st against resonance downshift (rad/ns) or deposited mass (pg)."""
    shifts = np.asarray(shifts, dtype=float)
    masses = shifts if axis == "mass" else mass_from_shift(params, shifts)
    return SensingCurve(shifts, np.asarray(kst_of_mass(params, state, masses)), axis)


def kst_curves_over_kappa(params, kappas, shifts, critical_coupling=False):
    """One :class:`SensingCurve` per decay rate, each at its own operating point."""
    curves = []
    for kappa in np.atleast_1d(kappas):
        p = params.with_kappa(float(kappa), critical_coupling)
        curves.append(kst_curve(p, operating_point(p), shifts))
    return curves


def g_eps(params, pump_power=None):
    """Composite coupling |G| * eps_pump (rad ns^-3/2 pm^-1)."""
    power = params.pump_power if pump_power is None else pump_power
    return abs(params.g_coupling) * drive_amplitude(power, params.pump_wavelength)


def beta_map(params, kappas, g_eps_values, critical_coupling=False):
    """Slope of K_st per fg on a (kappa x G*eps) grid.

    Each G*eps value is realised by choosing the pump power, keeping G fixed.
    """
    kappas = np.atleast_1d(np.asarray(kappas, dtype=float))
    g_eps_values = np.atleast_1d(np.asarray(g_eps_values, dtype=float))
    beta = np.empty((kappas.size, g_eps_values.size))
    for i, kappa in enumerate(kappas):
        p = params.with_kappa(float(kappa), critical_coupling)
        for j, ge in enumerate(g_eps_values):
            power = power_for_amplitude(ge / abs(p.g_coupling), p.pump_wavelength)
            beta[i, j] = sensitivity_beta(p, operating_point(p, power))
    return SensitivityMap(kappas, g_eps_values, beta)


def linearity_sweep(params, kappas, critical_coupling=False):
    """Linearity ratio r (fg) for each decay rate."""
    out = []
    for kappa in np.atleast_1d(kappas):
        p = params.with_kappa(float(kappa), critical_coupling)
        out.append(linearity_ratio(p, operating_point(p)))
    return np.array(out)


def log_beta_discrepancy(params, state):
    """Compare the closed-form slope with the numerical one and log the ratio."""
    numeric = sensitivity_beta(params, state)
    closed = beta_closed_form(params)
    rel = abs(closed - numeric) / abs(numeric)
    if rel > 1e-3:
        log.warning(
            "closed-form beta %.6g /fg differs from finite-difference beta %.6g /fg "
            "(relative %.3g); using the finite-difference value", closed, numeric, rel,
        )
    return numeric, closed, rel
