"""Command-line front end: ``omitsense <command> --config FILE --out DIR``.

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 mass inversion out of range.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np

from . import __version__
from .errors import ConfigError, InversionError, NumericalError
from .io import load_any_config, make_manifest, write_csv
from .linear_response import spectrum_sweep
from .mass_sensing import (
    FG, beta_map, g_eps, kst_curves_over_kappa, linearity_sweep, loaded_frequency,
)
from .model import build_params, make_drives
from .steady_state import bistability_scan, operating_point
from .time_domain import (
    SimulationConfig, extract_peaks, sense_mass_pipeline, settling_time, simulate, spectrum,
)

log = logging.getLogger("omitsense")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INVERSION = 0, 2, 3, 4

TWO_PI = 2.0 * math.pi


def _grid(doc, section, key, default):
    value = doc.get(section, key)
    if value is None:
        return np.asarray(default, dtype=float)
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 0:
        raise ConfigError("list is empty", key=f"[{section}] {key}")
    return arr


def _sim_config(doc):
    sec = doc.section("simulation")
    kwargs = {k: sec[k] for k in ("duration", "transient_cut", "solver_rel_tol", "solver_abs_tol")
              if k in sec}
    if "record_stride" in sec:
        stride = sec["record_stride"]
        if stride != int(stride):
            raise ConfigError("must be an integer", key="record_stride")
        kwargs["record_stride"] = int(stride)
    try:
        return SimulationConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), key="[simulation]") from None


def _ascending(arr, key):
    if np.any(np.diff(arr) <= 0):
        raise ConfigError("values must be strictly ascending", key=key)
    return arr


def cmd_steady(params, doc, args, out):
    powers = _ascending(_grid(doc, "steady", "powers", np.linspace(1e6, 300e6, 300)), "powers")
    ref = float(doc.get("steady", "reference_power", 0.0))
    curve = bistability_scan(params, powers, reference_power=ref)
    files = [write_csv(os.path.join(out, "steady.csv"), "steady", curve.rows())]
    rng = curve.multistable_range()
    if rng:
        print(f"three-root region: {rng[0] * 1e-6:.4g} to {rng[1] * 1e-6:.4g} uW")
    else:
        print("no three-root region on the scanned powers")
    if args.plot:
        from .plotting import plot_steady
        files.append(plot_steady(curve, os.path.join(out, "steady.svg")))
    return files


def cmd_spectrum(params, doc, args, out):
    default = np.linspace(-0.3, 0.3, 1201)
    grid = _ascending(_grid(doc, "spectrum", "dprime", default), "dprime")
    state = operating_point(params)
    spec = spectrum_sweep(params, state, grid)
    files = [write_csv(os.path.join(out, "spectrum.csv"), "spectrum", spec.rows())]
    if args.plot:
        from .plotting import plot_spectrum
        files.append(plot_spectrum(spec, os.path.join(out, "spectrum.svg")))
    return files


def cmd_kst(params, doc, args, out):
    kappas = _grid(doc, "kst", "kappa", np.array([0.05, 0.1, 0.2]) * TWO_PI)
    shifts = _ascending(_grid(doc, "kst", "shift", np.linspace(0, 2e-3, 41)), "shift")
    curves = kst_curves_over_kappa(params, kappas, shifts, args.critical_coupling)
    files = []
    for kappa, curve in zip(kappas, curves):
        name = f"kst_kappa{kappa / TWO_PI * 1e3:g}MHz.csv"
        files.append(write_csv(os.path.join(out, name), "kst_shift", curve.rows()))
    if args.plot:
        from .plotting import plot_kst
        files.append(plot_kst(curves, kappas, os.path.join(out, "kst.svg")))
    return files


def cmd_beta(params, doc, args, out):
    kappas = _grid(doc, "beta", "kappa", np.linspace(0.05, 1.0, 20) * TWO_PI)
    scales = _grid(doc, "beta", "g_eps_scale", np.linspace(0.5, 2.0, 16))
    smap = beta_map(params, kappas, scales * g_eps(params), args.critical_coupling)
    files = [write_csv(os.path.join(out, "beta_map.csv"), "beta_map", smap.rows())]
    if args.plot:
        from .plotting import plot_beta
        files.append(plot_beta(smap, os.path.join(out, "beta_map.svg")))
    return files


def cmd_linearity(params, doc, args, out):
    kappas = _grid(doc, "linearity", "kappa", np.linspace(0.05, 1.0, 20) * TWO_PI)
    threshold = float(doc.get("linearity", "threshold", 50 * FG)) / FG
    ratios = linearity_sweep(params, kappas, args.critical_coupling)
    rows = [(k / TWO_PI, r) for k, r in zip(kappas.tolist(), ratios.tolist())]
    files = [write_csv(os.path.join(out, "linearity.csv"), "linearity", rows)]
    ok = kappas[ratios >= threshold]
    if ok.size:
        print(f"r >= {threshold:g} fg for kappa/2pi in [{ok.min() / TWO_PI:.4g}, {ok.max() / TWO_PI:.4g}] GHz")
    else:
        print(f"r < {threshold:g} fg for every scanned kappa")
    if args.plot:
        from .plotting import plot_linearity
        files.append(plot_linearity(kappas, ratios, threshold, os.path.join(out, "linearity.svg")))
    return files


def cmd_simulate(params, doc, args, out):
    sim = _sim_config(doc)
    mass = float(doc.get("simulation", "mass", 0.0))
    state = operating_point(params)
    drives = make_drives(params, state.pump_detuning)
    traj = simulate(params, drives, loaded_frequency(params, mass), sim)
    fspec = spectrum(traj, sim)
    hom, stokes = extract_peaks(fspec, drives.beat_freq)
    if args.output_field:
        hom, stokes = hom * math.sqrt(params.kappa_ex), stokes * math.sqrt(params.kappa_ex)
    print(f"homodyne {hom:.6g}  stokes {stokes:.6g}  K_st {hom / stokes:.6g}  "
          f"settling {settling_time(traj):.4g} ns")
    files = [
        write_csv(os.path.join(out, "trajectory.csv"), "trajectory", traj.rows()),
        write_csv(os.path.join(out, "field_spectrum.csv"), "field_spectrum", fspec.rows()),
    ]
    if args.plot:
        from .plotting import plot_simulation
        files.append(plot_simulation(traj, fspec, os.path.join(out, "simulation.svg")))
    return files


def cmd_sense(params, doc, args, out):
    masses = _grid(doc, "sense", "masses", np.array([0, 1.428, 2.857, 4.287, 5.671]) * FG) / FG
    workers = int(doc.get("sense", "workers", 1))
    reports = sense_mass_pipeline(params, masses.tolist(), _sim_config(doc), workers,
                                  args.output_field)
    for r in reports:
        print(f"m = {r.mass_true:.4g} fg  K_st = {r.kst_sim:.6g}  recovered {r.mass_recovered:.4g} fg "
              f"(uncalibrated {r.mass_recovered_uncalibrated:.4g} fg)")
    files = [write_csv(os.path.join(out, "report.csv"), "report", [r.row() for r in reports])]
    if args.plot:
        from .plotting import plot_sense
        files.append(plot_sense(reports, os.path.join(out, "sense.svg")))
    return files


COMMANDS = {
    "steady": (cmd_steady, "pump-power scan of steady states"),
    "spectrum": (cmd_spectrum, "probe transmission and Stokes spectrum"),
    "kst": (cmd_kst, "K_st against resonance shift for several decay rates"),
    "beta": (cmd_beta, "slope of K_st on a (kappa, G*eps) grid"),
    "linearity": (cmd_linearity, "linearity ratio against decay rate"),
    "simulate": (cmd_simulate, "single time-domain run and its spectrum"),
    "sense": (cmd_sense, "simulated weighing experiment with mass recovery"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="omitsense", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file or a previous manifest.json")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--plot", action="store_true", help="also write SVG figures")
        p.add_argument("--critical-coupling", action="store_true",
                       help="lock kappa_ex = kappa/2 (for every kappa used)")
        p.add_argument("--output-field", action="store_true",
                       help="report waveguide output amplitudes instead of intracavity ones")
    return parser


def run_command(argv=None):
    args = build_parser().parse_args(argv)
    handler = COMMANDS[args.command][0]
    try:
        doc, saved_flags = load_any_config(args.config)
        for flag in ("critical_coupling", "output_field"):
            if saved_flags.get(flag):
                setattr(args, flag, True)
        params = build_params(doc)
        if args.critical_coupling:
            params = params.with_kappa(params.kappa, critical_coupling=True)
        os.makedirs(args.out, exist_ok=True)
        files = handler(params, doc, args, args.out)
    except InversionError as exc:
        print(f"omitsense: inversion error: {exc}", file=sys.stderr)
        return EXIT_INVERSION
    except ConfigError as exc:
        print(f"omitsense: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ZeroDivisionError, FloatingPointError) as exc:
        print(f"omitsense: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"omitsense: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    flags = {"critical_coupling": args.critical_coupling, "output_field": args.output_field}
    manifest = make_manifest(args.command, params, doc.text, __version__, flags,
                             [os.path.basename(f) for f in files])
    manifest.write(args.out)
    return EXIT_OK


def main():
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    sys.exit(run_command())


if __name__ == "__main__":
    main()
