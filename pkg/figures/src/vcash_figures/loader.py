"""CSV loading against the simulator's fixed output schemas.

Every failure names the offending file (and column where that makes
sense), because the command-line contract is a nonzero exit with enough
context to fix the input.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from pathlib import Path


class FigureInputError(Exception):
    """An input CSV is missing, empty, or does not match its schema."""


RATIO_COLUMNS = ("t", "mean_ratio", "sd_ratio")
CASH_COLUMNS = ("t", "vehicle_id", "mode", "balance")

_CELL_PATTERN = re.compile(r"^p(?P<density>[0-9.]+)_m(?P<m>\d+)$")


def _read_rows(path: Path, columns: tuple[str, ...]) -> list[dict[str, str]]:
    if not path.is_file():
        raise FigureInputError(f"missing input file: {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in columns:
            if column not in header:
                raise FigureInputError(f"{path}: missing column {column!r}")
        rows = list(reader)
    if not rows:
        raise FigureInputError(f"{path}: no data rows")
    return rows


def _parse_float(value: str, path: Path, column: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise FigureInputError(
            f"{path}: column {column!r} has non-numeric value {value!r}"
        )


@dataclass(frozen=True)
class RatioSeries:
    label: str
    t: list[float]
    mean: list[float]


def load_ratio_series(path: Path, label: str) -> RatioSeries:
    rows = _read_rows(path, RATIO_COLUMNS)
    t = [_parse_float(r["t"], path, "t") for r in rows]
    mean = [_parse_float(r["mean_ratio"], path, "mean_ratio") for r in rows]
    return RatioSeries(label=label, t=t, mean=mean)


@dataclass(frozen=True)
class CashSeries:
    mode: str
    t: list[float]
    mean_balance: list[float]


def load_cash_series(path: Path) -> list[CashSeries]:
    """Per-mode mean balance over time from the per-vehicle cash table."""
    rows = _read_rows(path, CASH_COLUMNS)
    sums: dict[str, dict[float, list[float]]] = {}
    for row in rows:
        t = _parse_float(row["t"], path, "t")
        balance = _parse_float(row["balance"], path, "balance")
        mode = row["mode"]
        if not mode:
            raise FigureInputError(f"{path}: column 'mode' has an empty value")
        sums.setdefault(mode, {}).setdefault(t, []).append(balance)
    series = []
    for mode in sorted(sums):
        ticks = sorted(sums[mode])
        means = [sum(sums[mode][t]) / len(sums[mode][t]) for t in ticks]
        series.append(CashSeries(mode=mode, t=ticks, mean_balance=means))
    return series


@dataclass(frozen=True)
class GridCell:
    density: float
    m: int
    curves: list[RatioSeries]


def discover_sweep_grid(input_dir: Path) -> tuple[list[float], list[int], list[GridCell]]:
    """Find p{density}_m{m} cells and load every framework curve in each.

    Cell subdirectories (one per framework variant) are used as curve
    labels; each must contain a ratio_timeseries.csv.
    """
    if not input_dir.is_dir():
        raise FigureInputError(f"missing input directory: {input_dir}")
    cells: list[GridCell] = []
    for entry in sorted(input_dir.iterdir()):
        match = _CELL_PATTERN.match(entry.name)
        if not match or not entry.is_dir():
            continue
        curves = []
        for sub in sorted(p for p in entry.iterdir() if p.is_dir()):
            curves.append(load_ratio_series(sub / "ratio_timeseries.csv", sub.name))
        if not curves:
            raise FigureInputError(f"{entry}: no framework subdirectories with CSVs")
        cells.append(
            GridCell(
                density=float(match.group("density")),
                m=int(match.group("m")),
                curves=curves,
            )
        )
    if not cells:
        raise FigureInputError(f"{input_dir}: no p<density>_m<m> cell directories")
    densities = sorted({c.density for c in cells})
    m_values = sorted({c.m for c in cells})
    by_key = {(c.density, c.m): c for c in cells}
    for density in densities:
        for m in m_values:
            if (density, m) not in by_key:
                raise FigureInputError(
                    f"{input_dir}: sweep grid is missing cell "
                    f"p{format(density, 'g')}_m{m}"
                )
    return densities, m_values, cells
