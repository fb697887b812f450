"""Static SVG figures for each command. Reproduction aids only; CSVs are the record."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "omitsense"


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_steady(curve, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for stable, style in ((True, dict(c="C0", s=6)), (False, dict(c="C3", s=6, marker="x"))):
        pts = [(p * 1e-6, s.x_bar) for p, states in curve.points for s in states if s.stable == stable]
        if pts:
            xs, ys = zip(*pts)
            ax.scatter(xs, ys, label="stable" if stable else "unstable", **style)
    ax.set_xlabel("pump power (uW)")
    ax.set_ylabel("x_bar (pm)")
    ax.legend()
    return _save(fig, path)


def plot_spectrum(spec, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    dp = spec.delta_prime * 1e3
    ax.plot(dp, np.abs(spec.t_plus), label="|t+|")
    ax.plot(dp, np.abs(spec.t_minus), label="|t-|")
    ax.plot(dp, np.abs(spec.t_hom), "--", label="|t_hom|")
    ax.set_xlabel("probe offset from omega_m (MHz, angular)")
    ax.set_ylabel("amplitude")
    ax.legend()
    return _save(fig, path)


def plot_kst(curves, kappas, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for curve, kappa in zip(curves, kappas):
        x, y = zip(*curve.rows())
        ax.plot(x, y, label=f"kappa/2pi = {kappa / (2 * math.pi) * 1e3:g} MHz")
    ax.set_xlabel("mass (fg)" if curves and curves[0].axis == "mass" else "downshift (MHz, angular)")
    ax.set_ylabel("K_st")
    ax.legend()
    return _save(fig, path)


def plot_beta(smap, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    mesh = ax.pcolormesh(smap.g_eps_grid, smap.kappa_grid / (2 * math.pi), smap.beta, shading="auto")
    fig.colorbar(mesh, ax=ax, label="beta (1/fg)")
    ax.set_xlabel("G eps")
    ax.set_ylabel("kappa/2pi (GHz)")
    return _save(fig, path)


def plot_linearity(kappas, ratios, threshold, path):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(kappas / (2 * math.pi), ratios, "o-")
    ax.axhline(threshold, color="k", ls=":", label=f"threshold {threshold:g} fg")
    ax.set_xlabel("kappa/2pi (GHz)")
    ax.set_ylabel("r (fg)")
    ax.legend()
    return _save(fig, path)


def plot_simulation(traj, fspec, path):
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(5, 5))
    top.plot(traj.times, np.abs(traj.a), lw=0.5)
    top.set_xlabel("t (ns)")
    top.set_ylabel("|a|")
    bottom.semilogy(fspec.freqs, np.maximum(np.abs(fspec.amps), 1e-12), lw=0.7)
    bottom.set_xlim(-3, 3)
    bottom.set_xlabel("offset from pump (GHz, angular)")
    bottom.set_ylabel("|amp|")
    return _save(fig, path)


def plot_sense(reports, path):
    fig, (left, right) = plt.subplots(1, 2, figsize=(8, 3.5))
    true = [r.mass_true for r in reports]
    left.plot(true, [r.kst_sim for r in reports], "o-", label="simulated")
    left.plot(true, [r.kst_analytic for r in reports], "x--", label="linear response")
    left.set_xlabel("mass (fg)")
    left.set_ylabel("K_st")
    left.legend()
    right.plot(true, true, "k:")
    right.plot(true, [r.mass_recovered for r in reports], "o", label="calibrated")
    right.plot(true, [r.mass_recovered_uncalibrated for r in reports], "s", label="uncalibrated")
    right.set_xlabel("true mass (fg)")
    right.set_ylabel("recovered mass (fg)")
    right.legend()
    return _save(fig, path)
