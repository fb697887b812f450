"""Time-domain integration of the nonlinear mean-field equations.

In the frame rotating at the pump frequency::

    da/dt = (i Delta - kappa/2 - i G x) a + sqrt(kappa_ex) (eps_1 + eps_p e^{-i W t})
    m (x'' + gamma_m x' + omega_m'^2 x) = -hbar G |a|^2

The trajectory is sampled on a uniform grid with an integer number of
samples per beat period, so projections onto ``e^{-/+ i W t}`` over the
post-transient window are free of spectral leakage.
"""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp

from .errors import SimulationDivergence
from .mass_sensing import FG, invert_mass, loaded_frequency, relative_intensity
from .model import HBAR, make_drives
from .steady_state import operating_point


@dataclass(frozen=True)
class SimulationConfig:
    duration: float = 2000.0
    transient_cut: float = 200.0
    solver_rel_tol: float = 1e-9
    solver_abs_tol: float = 1e-12
    record_stride: int = 64
    method: str = "DOP853"

    def __post_init__(self):
        if not self.duration > self.transient_cut >= 0:
            raise ValueError("need duration > transient_cut >= 0")
        if self.record_stride < 4 or int(self.record_stride) != self.record_stride:
            raise ValueError("record_stride must be an integer >= 4")
        if not (self.solver_rel_tol > 0 and self.solver_abs_tol > 0):
            raise ValueError("tolerances must be positive")

    def tightened(self, factor=0.5):
        return replace(self, solver_rel_tol=self.solver_rel_tol * factor,
                       solver_abs_tol=self.solver_abs_tol * factor)


@dataclass
class Trajectory:
    times: np.ndarray
    a: np.ndarray
    x: np.ndarray
    v: np.ndarray
    beat_freq: float
    stride: int

    @property
    def dt(self):
        return self.times[1] - self.times[0]

    def rows(self):
        """CSV rows: t_ns, re_a, im_a, abs_a, x_pm."""
        return zip(self.times.tolist(), self.a.real.tolist(), self.a.imag.tolist(),
                   np.abs(self.a).tolist(), self.x.tolist())


@dataclass
class FieldSpectrum:
    """Discrete spectrum of the post-transient window.

    ``freqs`` follow the ``e^{+i w t}`` convention, so the probe-beat component
    ``e^{-i W t}`` sits at ``-W`` and the Stokes component at ``+W``.
    """

    freqs: np.ndarray
    amps: np.ndarray
    times: np.ndarray = field(repr=False)
    samples: np.ndarray = field(repr=False)

    def rows(self):
        """CSV rows: offset_GHz (angular, so the beat lines sit at +-omega_m), abs_amp."""
        return zip(self.freqs.tolist(), np.abs(self.amps).tolist())


@dataclass(frozen=True)
class SensingReport:
    """One run of the sensing experiment. Masses in fg."""

    mass_true: float
    homodyne_amp: float
    stokes_amp: float
    kst_sim: float
    mass_recovered: float
    relative_error: float
    mass_recovered_uncalibrated: float
    relative_error_uncalibrated: float
    kst_analytic: float

    def row(self):
        """CSV row: mass_true_fg, kst_sim, mass_recovered_fg, rel_error."""
        return (self.mass_true, self.kst_sim, self.mass_recovered, self.relative_error)


def record_times(sim, beat_freq):
    """Uniform sample times and the (start, length) of the analysis window."""
    period = 2.0 * math.pi / beat_freq
    dt = period / sim.record_stride
    start = int(math.ceil(sim.transient_cut / dt - 1e-9))
    periods = int(math.floor((sim.duration - start * dt) / period + 1e-9))
    if periods < 1:
        raise ValueError("record window after the transient cut is shorter than one beat period")
    length = periods * sim.record_stride
    return np.arange(start + length) * dt, start, length


def simulate(params, drives, omega_m_actual=None, sim=None, y0=None):
    """Integrate from a cold start (a = x = x' = 0) with an embedded RK 8(5,3) scheme."""
    sim = SimulationConfig() if sim is None else sim
    om = params.omega_m if omega_m_actual is None else omega_m_actual
    if not om > 0:
        raise ValueError("omega_m_actual must be positive")
    times, _, _ = record_times(sim, drives.beat_freq)

    k2 = params.kappa / 2.0
    g = params.g_coupling
    detuning = drives.pump_detuning
    root = math.sqrt(params.kappa_ex)
    pump = root * drives.eps_pump
    probe = root * drives.eps_probe * cmath.exp(1j * drives.probe_phase)
    w = drives.beat_freq
    om2 = om * om
    gamma = params.gamma_m
    force = -HBAR * g / params.m_eff

    def rhs(t, y):
        ar, ai, x, v = y
        a = complex(ar, ai)
        da = complex(-k2, detuning - g * x) * a + pump + probe * cmath.exp(-1j * w * t)
        return [da.real, da.imag, v, -gamma * v - om2 * x + force * (ar * ar + ai * ai)]

    start = np.zeros(4) if y0 is None else np.asarray(y0, dtype=float)
    sol = solve_ivp(rhs, (0.0, times[-1]), start, method=sim.method, t_eval=times,
                    rtol=sim.solver_rel_tol, atol=sim.solver_abs_tol)
    if sol.status != 0:
        t_reached = float(sol.t[-1]) if sol.t.size else 0.0
        raise SimulationDivergence(f"integration failed: {sol.message}", t_reached)
    y = sol.y
    if y.shape[1] != times.size or not np.all(np.isfinite(y)):
        bad = np.nonzero(~np.all(np.isfinite(y), axis=0))[0]
        t_bad = float(times[bad[0]]) if bad.size else float(sol.t[-1])
        raise SimulationDivergence("non-finite state", t_bad)
    return Trajectory(times, y[0] + 1j * y[1], y[2].copy(), y[3].copy(), w, sim.record_stride)


def _window(traj, sim):
    dt = traj.dt
    period = 2.0 * math.pi / traj.beat_freq
    start = int(math.ceil(sim.transient_cut / dt - 1e-9))
    available = traj.times.size - start
    if available < traj.stride or traj.times[-1] - traj.times[start] < period * (1 - 1e-9) - dt:
        raise ValueError("analysis window is shorter than one beat period")
    length = (available // traj.stride) * traj.stride
    return start, length


def spectrum(traj, sim=None):
    """Normalised DFT of a(t) over the post-transient window.

    A tone ``c e^{-i W t}`` gives ``|amp| = |c|`` at offset ``-W``.
    """
    sim = SimulationConfig() if sim is None else sim
    start, length = _window(traj, sim)
    seg = traj.a[start:start + length]
    amps = np.fft.fftshift(np.fft.fft(seg)) / length
    freqs = np.fft.fftshift(np.fft.fftfreq(length, traj.dt)) * 2.0 * math.pi
    return FieldSpectrum(freqs, amps, traj.times[start:start + length], seg)


def project(times, samples, omega):
    """Complex amplitude of the ``e^{-i omega t}`` component (lock-in projection)."""
    return complex(np.mean(samples * np.exp(1j * omega * times)))


def extract_peaks(spec, omega_beat):
    """(homodyne, Stokes) amplitudes: the ``e^{-i W t}`` and ``e^{+i W t}`` parts."""
    hom = abs(project(spec.times, spec.samples, omega_beat))
    stokes = abs(project(spec.times, spec.samples, -omega_beat))
    return hom, stokes


def settling_time(traj, tol=0.01, tail_periods=20):
    """Time after which the per-period peak of |a(t)| stays within ``tol`` of its final value."""
    stride = traj.stride
    periods = traj.a.size // stride
    env = np.abs(traj.a[: periods * stride]).reshape(periods, stride).max(axis=1)
    final = env[-tail_periods:].mean()
    off = np.nonzero(np.abs(env - final) > tol * final)[0]
    period = 2.0 * math.pi / traj.beat_freq
    return 0.0 if off.size == 0 else float((off[-1] + 1) * period)


def _measure(args):
    params, drives, omega_m_actual, sim, output_field = args
    traj = simulate(params, drives, omega_m_actual, sim)
    hom, stokes = extract_peaks(spectrum(traj, sim), drives.beat_freq)
    if output_field:
        scale = math.sqrt(params.kappa_ex)
        hom, stokes = hom * scale, stokes * scale
    return hom, stokes


def _relative_error(recovered, true):
    if true == 0:
        return abs(recovered)
    return abs(recovered - true) / true


def sense_mass_pipeline(params, mass_list, sim=None, workers=1, output_field=False):
    """Run the simulated weighing experiment for each mass (fg); first entry is the baseline.

    Every run uses the same laser settings, fixed at the unloaded operating
    point; only the mechanical frequency changes. Recovery uses
    :func:`~omitsense.mass_sensing.invert_mass` normalised by the measured
    baseline (calibrated) and by the ideal zero point 1 (uncalibrated).
    With ``output_field`` the amplitudes are scaled to the waveguide output;
    K_st is unchanged.
    """
    masses = [float(m) * FG for m in mass_list]
    if not masses or masses[0] != 0.0:
        raise ValueError("mass_list must start with the unloaded baseline (0)")
    if any(m < 0 for m in masses):
        raise ValueError("masses must be non-negative")
    sim = SimulationConfig() if sim is None else sim
    state = operating_point(params)
    drives = make_drives(params, state.pump_detuning)
    jobs = [(params, drives, loaded_frequency(params, m), sim, output_field) for m in masses]
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            peaks = list(pool.map(_measure, jobs))
    else:
        peaks = [_measure(job) for job in jobs]

    base_k = peaks[0][0] / peaks[0][1]
    reports = []
    for m, (hom, stokes) in zip(masses, peaks):
        k = hom / stokes
        cal = invert_mass(params, state, k, base_k)
        uncal = invert_mass(params, state, k, 1.0, zero_tolerance=0.02)
        analytic = relative_intensity(params, state, params.omega_m, loaded_frequency(params, m))
        reports.append(SensingReport(
            mass_true=m / FG, homodyne_amp=hom, stokes_amp=stokes, kst_sim=k,
            mass_recovered=cal / FG, relative_error=_relative_error(cal, m),
            mass_recovered_uncalibrated=uncal / FG,
            relative_error_uncalibrated=_relative_error(uncal, m),
            kst_analytic=analytic,
        ))
    return reports
