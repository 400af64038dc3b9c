"""Figure rendering next to the delimited report artifacts."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def plot_sse_curve(sse: Mapping[int, float], chosen_k: int, path: str | Path) -> None:
    """SSE versus k with the selected knee marked."""
    ks = sorted(sse)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [sse[k] for k in ks], "o-", color="tab:blue")
    ax.axvline(chosen_k, color="tab:red", linestyle="--", label=f"selected k = {chosen_k}")
    ax.set_xlabel("number of clusters k")
    ax.set_ylabel("within-cluster SSE")
    ax.set_title("Cluster count selection")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_alpha_sweep(rows: Sequence[Mapping], path: str | Path) -> None:
    """Reduct count and reduct size bounds across the precision grid."""
    alphas = [r["alpha"] for r in rows]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6.5, 6), sharex=True)
    top.plot(alphas, [r["reduct_count"] for r in rows], "o-", color="tab:blue")
    top.set_ylabel("number of reducts")
    top.set_title("Precision value versus reducts")
    bottom.plot(alphas, [r["max_size"] for r in rows], "s-", label="largest reduct",
                color="tab:orange")
    bottom.plot(alphas, [r["min_size"] for r in rows], "^-", label="smallest reduct",
                color="tab:green")
    bottom.set_xlabel("precision value (alpha)")
    bottom.set_ylabel("attributes in reduct")
    bottom.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_benchmark(rows: Sequence, path: str | Path) -> None:
    """Mean ranking time per pipeline for both sweeps."""
    sweeps = sorted({r.sweep for r in rows})
    fig, axes = plt.subplots(1, len(sweeps), figsize=(6.5 * len(sweeps), 4.5))
    if len(sweeps) == 1:
        axes = [axes]
    for ax, sweep in zip(axes, sweeps):
        for pipeline, style in (("full", "o-"), ("reduced", "s--")):
            points = sorted(
                (r.x, r.mean_ms) for r in rows if r.sweep == sweep and r.pipeline == pipeline
            )
            if points:
                ax.plot(*zip(*points), style, label=pipeline)
        ax.set_xscale("log")
        ax.set_xlabel(f"number of {sweep}")
        ax.set_ylabel("mean ranking time (ms)")
        ax.set_title(f"Ranking time versus {sweep}")
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
