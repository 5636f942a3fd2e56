"""Figures for the report paths of the CLI."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

COLORS = {"read": "#c44e52", "download": "#4c72b0"}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    return path


def plot_traffic(summaries, path) -> Path:
    """Grouped bars of read and download per variant, relative to the MBR bound."""
    fig = Figure(figsize=(6.0, 3.6))
    ax = fig.add_subplot(111)
    names = [str(s.variant) for s in summaries]
    x = np.arange(len(names))
    w = 0.38
    reads = [s.read_ratio for s in summaries]
    downs = [s.download_ratio for s in summaries]
    ax.bar(x - w / 2, reads, w, label="read / bound", color=COLORS["read"])
    ax.bar(x + w / 2, downs, w, label="download / bound", color=COLORS["download"])
    ax.axhline(1.0, color="black", lw=0.8, ls="--")
    ax.set_xticks(x)
    ax.set_xticklabels(names)
    ax.set_ylabel("traffic per repair / lower bound")
    if summaries:
        p = summaries[0].params
        ax.set_title(f"n={p.n} k={p.k} d={p.d} beta={p.beta}, {summaries[0].repairs} repairs", fontsize=9)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.legend(frameon=False, fontsize=8)
    return _save(fig, path)


def plot_feasibility(reports, path) -> Path:
    """Fraction of (failed node, helper set) pairs repairable by transfer, per variant."""
    fig = Figure(figsize=(5.0, 3.2))
    ax = fig.add_subplot(111)
    names = [str(r.variant) for r in reports]
    frac = [r.feasible_count / len(r.pairs) if r.pairs else 0.0 for r in reports]
    bars = ax.bar(names, frac, color=["#55a868" if r.overall else "#8172b2" for r in reports])
    for b, r in zip(bars, reports):
        ax.annotate(f"{r.feasible_count}/{len(r.pairs)}", (b.get_x() + b.get_width() / 2, b.get_height()),
                    ha="center", va="bottom", fontsize=8)
    ax.set_ylim(0, 1.15)
    ax.set_ylabel("pairs with a transfer schedule")
    if reports:
        p = reports[0].params
        ax.set_title(f"n={p.n} k={p.k} d={p.d}", fontsize=9)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    return _save(fig, path)
