"""SVG figure emission for the CLI report paths.

Rendering is forced onto the Agg backend and stripped of every volatile
input: fixed hash salt for element ids, no embedded creation date, fixed
figure geometry.  Re-running a command must reproduce the SVG byte for
byte, matching the CSV/JSON determinism guarantee.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .observability import INVERSE_BOUND_CONSTANT, overlap_kernel  # noqa: E402

__all__ = [
    "plot_signal",
    "plot_kernel_bound",
    "plot_window_masses",
    "plot_sweep_convergence",
]

matplotlib.rcParams["svg.hashsalt"] = "beamctl"
matplotlib.rcParams["svg.fonttype"] = "path"

_FIGSIZE = (6.4, 4.0)


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_signal(times, values, path, title: str, ylabel: str) -> Path:
    """Polyline of one time signal (trace or control amplitude)."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(np.asarray(times), np.asarray(values), lw=1.0, color="#1f5fa8")
    ax.axhline(0.0, lw=0.5, color="#999999")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, lw=0.3, alpha=0.5)
    return _save(fig, path)


def plot_kernel_bound(path, t_values=(0.1, 0.5, 1.0, 2.5), b_count: int = 400) -> Path:
    """I(b, t) curves over b against the uniform bound c sin^2(pi b)."""
    b = np.linspace(0.0, 1.0, b_count)
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for t in t_values:
        ax.plot(b, overlap_kernel(b, np.full_like(b, t)), lw=1.0, label=f"t = {t:g}")
    ax.plot(
        b,
        INVERSE_BOUND_CONSTANT * np.sin(np.pi * b) ** 2,
        lw=1.6,
        ls="--",
        color="#b02020",
        label="bound",
    )
    ax.set_xlabel("b")
    ax.set_ylabel("I(b, t)")
    ax.set_title("window kernel vs uniform lower bound")
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(True, lw=0.3, alpha=0.5)
    return _save(fig, path)


def plot_window_masses(rows, path) -> Path:
    """Per-mode window masses against the claimed 1/(2n) - sin(pi/2n)/pi floor."""
    ms = [r.m for r in rows]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.semilogy(ms, [r.mass for r in rows], "o-", ms=3, lw=0.8, label="window mass")
    if rows:
        ax.axhline(rows[0].bound, ls="--", color="#b02020", lw=1.2, label="claimed floor")
        ax.axhline(0.5 / rows[0].n, ls=":", color="#777777", lw=1.0, label="mean value 1/(2n)")
    ax.set_xlabel("mode m")
    ax.set_ylabel("mass")
    ax.set_title("window masses")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(True, lw=0.3, alpha=0.5)
    return _save(fig, path)


def plot_sweep_convergence(result, path) -> Path:
    """Log-log convergence panel of a sweep against the pointwise limit."""
    ns = [r.n for r in result.records]
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    series = (
        ("trace_distance_l2", "effective trace, L2"),
        ("trace_distance_hneg", "effective trace, H^-1 surrogate"),
        ("pairing_gap_max", "pairing gap (battery max)"),
    )
    drew = False
    for attr, label in series:
        vals = np.array([getattr(r, attr) for r in result.records], dtype=float)
        if np.all(np.isfinite(vals)) and np.all(vals > 0):
            ax.loglog(ns, vals, "o-", ms=3, lw=0.9, label=label)
            drew = True
    if not drew:
        ax.text(0.5, 0.5, "no finite limit distances\n(non-strategic point)",
                ha="center", va="center", transform=ax.transAxes)
    ax.set_xlabel("n")
    ax.set_ylabel("distance")
    ax.set_title(f"window to point convergence, xi = {result.xi_num}/{result.xi_den}")
    if drew:
        ax.legend(loc="lower left", fontsize=8)
    ax.grid(True, which="both", lw=0.3, alpha=0.4)
    return _save(fig, path)
