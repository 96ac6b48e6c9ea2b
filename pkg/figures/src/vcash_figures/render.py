"""Figure assembly: the ratio grid and the per-mode cash series.

Layout is contractual (grid rows are densities, columns are m values, one
curve per framework; cash plots one curve per vehicle mode); styling is
not.  Output dimensions are fixed by figsize and dpi so repeated renders
of the same inputs agree pixel for pixel.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from vcash_figures.loader import (
    FigureInputError,
    discover_sweep_grid,
    load_cash_series,
)

RATIO_GRID = "ratio_grid"
CASH_SERIES = "cash_series"

_DPI = 100


@dataclass(frozen=True)
class FigureSpec:
    """What to render, from where, to which file."""

    input_dir: Path
    figure: str
    output: Path
    image_format: str | None = None

    def resolved_format(self) -> str:
        if self.image_format:
            return self.image_format
        suffix = self.output.suffix.lstrip(".")
        return suffix or "png"


def render(spec: FigureSpec):
    """Render one figure and write it; returns the matplotlib figure."""
    if spec.figure == RATIO_GRID:
        fig = build_ratio_grid(Path(spec.input_dir))
    elif spec.figure == CASH_SERIES:
        fig = build_cash_series(Path(spec.input_dir))
    else:
        raise FigureInputError(f"unknown figure kind {spec.figure!r}")
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, format=spec.resolved_format(), dpi=_DPI)
    plt.close(fig)
    return fig


def build_ratio_grid(input_dir: Path):
    """One panel per (density, m) cell, one ratio curve per framework."""
    densities, m_values, cells = discover_sweep_grid(input_dir)
    by_key = {(c.density, c.m): c for c in cells}
    n_rows, n_cols = len(densities), len(m_values)
    fig, axes = plt.subplots(
        n_rows,
        n_cols,
        figsize=(4.0 * n_cols, 3.0 * n_rows),
        squeeze=False,
        sharex=True,
        sharey=True,
    )
    for i, density in enumerate(densities):
        for j, m in enumerate(m_values):
            ax = axes[i][j]
            cell = by_key[(density, m)]
            for curve in cell.curves:
                ax.plot(curve.t, curve.mean, label=curve.label, linewidth=1.2)
            ax.set_title(f"p={format(density, 'g')}/km, m={m}", fontsize=9)
            ax.set_ylim(bottom=0.0)
            if i == n_rows - 1:
                ax.set_xlabel("time (seconds)")
            if j == 0:
                ax.set_ylabel("bogus event ratio")
    axes[0][0].legend(fontsize=7)
    fig.tight_layout()
    return fig


def build_cash_series(input_dir: Path):
    """Mean vehicle cash over time, one labeled curve per mode."""
    series = load_cash_series(Path(input_dir) / "cash_timeseries.csv")
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    for s in series:
        ax.plot(s.t, s.mean_balance, label=s.mode, linewidth=1.4)
    ax.set_xlabel("time (seconds)")
    ax.set_ylabel("vehicle cash")
    ax.legend()
    fig.tight_layout()
    return fig
