"""Quick-look figures rendered next to the CSV outputs by the CLI."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def plot_j_sweep(rows, path) -> None:
    """Coupling strength versus flux, one line per method."""
    fig, ax = plt.subplots(figsize=(6, 4))
    methods = sorted({r["method"] for r in rows})
    for m in methods:
        pts = [(r["flux1_phi0"], r["j_mhz"]) for r in rows
               if r["method"] == m and r["j_mhz"] is not None]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, label=m)
    ax.set_xlabel(r"$\Phi_1/\Phi_0$")
    ax.set_ylabel("J (MHz)")
    ax.axhline(0.0, color="0.8", lw=0.8, zorder=0)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_j_vs_ljc(rows, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ljc = [r["ljc_nh"] for r in rows]
    for col, label in (("j_numeric_mhz", "numeric"),
                       ("j_current_product_mhz", "current product")):
        ys = [r.get(col) for r in rows]
        if any(v is not None for v in ys):
            ax.plot(ljc, [np.nan if v is None else v for v in ys], label=label)
    ax.set_xlabel(r"$L_{J,C}$ (nH)")
    ax.set_ylabel("J (MHz)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_transmon_spectrum(rows, path) -> None:
    """f01 per spin branch versus the swept flux."""
    fig, ax = plt.subplots(figsize=(6, 4))
    branches = sorted({r["spin_config"] for r in rows})
    for br in branches:
        pts = [(r["flux1_phi0"], r["f_ghz"]) for r in rows
               if r["spin_config"] == br and r["level"] == 1]
        if pts:
            xs, ys = zip(*pts)
            ax.plot(xs, ys, label=br)
    ax.set_xlabel(r"$\Phi_1/\Phi_0$")
    ax.set_ylabel(r"$f_{01}$ (GHz)")
    ax.legend(title="branch")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_map(power_db, fd_ghz, signal, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(fd_ghz, power_db, signal, shading="auto")
    fig.colorbar(mesh, ax=ax, label="signal (median subtracted)")
    ax.set_xlabel(r"$f_d$ (GHz)")
    ax.set_ylabel("pump power (dB)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_fit(x, y, y_fit, path, xlabel="x", ylabel="y") -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    if np.iscomplexobj(y):
        ax.plot(np.real(y), np.imag(y), ".", ms=3, label="data")
        ax.plot(np.real(y_fit), np.imag(y_fit), "-", label="fit")
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_aspect("equal", adjustable="datalim")
    else:
        ax.plot(x, y, ".", ms=3, label="data")
        ax.plot(x, y_fit, "-", label="fit")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
