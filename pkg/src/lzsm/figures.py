"""Matplotlib rendering of sweep and chain results to image files.

Every renderer takes already-computed data and writes one PNG next to
the corresponding CSV; nothing here feeds back into the numerics.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import SweepRow


def _report_columns(rows: list[SweepRow]):
    ok = [r for r in rows if r.report is not None]
    cols = {
        "param": np.array([r.value for r in ok]),
        "abs_R2": np.array([abs(r.report.R) ** 2 for r in ok]),
        "abs_T2": np.array([abs(r.report.T) ** 2 for r in ok]),
        "phi_d": np.array([r.report.phi_d for r in ok]),
        "phi_r": np.array([r.report.phi_r for r in ok]),
        "phi_L": np.array([r.report.phi_L for r in ok]),
        "p_mm_tm": np.array([r.report.p_mm_tm for r in ok]),
        "p_mm_num": np.array([r.report.p_mm_num for r in ok]),
    }
    return cols


def render_sweep_figure(rows: list[SweepRow], param_name: str, path) -> None:
    """Three panels: amplitudes, phases, and TM-vs-numeric probability."""
    c = _report_columns(rows)
    fig, axes = plt.subplots(3, 1, figsize=(7.0, 9.0), sharex=True)

    ax = axes[0]
    ax.plot(c["param"], c["abs_R2"], "b-", label=r"$|R|^2$")
    ax.plot(c["param"], c["abs_T2"], "r--", label=r"$|T|^2$")
    ax.plot(c["param"], 4 * c["abs_R2"] * c["abs_T2"], "k.-", ms=3,
            label=r"$4|R|^2|T|^2$")
    ax.set_ylabel("amplitudes")
    ax.legend(loc="best", fontsize=8)

    ax = axes[1]
    ax.plot(c["param"], c["phi_d"] / np.pi, "ko", ms=3, label=r"$\phi_d/\pi$")
    ax.plot(c["param"], c["phi_r"] / np.pi, "bs", ms=3, label=r"$\phi_r/\pi$")
    ax.plot(c["param"], c["phi_L"] / np.pi, "r*", ms=4, label=r"$\phi_L/\pi$")
    ax.set_ylabel("phases / $\\pi$")
    ax.legend(loc="best", fontsize=8)

    ax = axes[2]
    ax.plot(c["param"], c["p_mm_tm"], "b-", label="transfer matrix")
    ax.plot(c["param"], c["p_mm_num"], "r*", ms=4, label="numerical")
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel(param_name)
    ax.set_ylabel(r"$P_{--}$")
    ax.legend(loc="best", fontsize=8)

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_transport_figure(values, p_chain, p_reduced, path) -> None:
    """Edge-to-edge transport probability against the reduced model."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    ax.plot(values, p_chain, "b-", label=r"$P_{2N}$ (chain)")
    ax.plot(values, p_reduced, "r--", label=r"$P_{--}$ (reduced)")
    ax.set_xlabel("total time $T$")
    ax.set_ylabel("probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_spectrum_figure(times, energies, n_cells: int, path) -> None:
    """Bulk bands in black, the two in-gap edge branches highlighted."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    n_bands = energies.shape[1]
    for k in range(n_bands):
        if k in (n_cells - 1, n_cells):
            continue
        ax.plot(times, energies[:, k], "k-", lw=0.6)
    ax.plot(times, energies[:, n_cells - 1], "b--", lw=1.4, label="lower edge")
    ax.plot(times, energies[:, n_cells], "r--", lw=1.4, label="upper edge")
    ax.set_xlabel("time $t$")
    ax.set_ylabel("energy / $J$")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_occupation_figure(times, p_minus, dp_minus, path) -> None:
    """Ground-band occupation and its time derivative for one run."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax1.plot(times, p_minus, "b-")
    ax1.set_ylabel(r"$P_-$")
    ax1.set_ylim(-0.02, 1.02)
    ax2.plot(times, dp_minus, "r-")
    ax2.set_xlabel("time $t$")
    ax2.set_ylabel(r"$\dot P_-$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
