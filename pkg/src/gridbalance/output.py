"""CSV time series and SVG charts for a finished run.

Four tables are produced, each written as ``<name>.csv`` and optionally
rendered as ``<name>.svg``:

``demands``  slot, b0..b{n-1}
``prices``   slot, p0..p{n-1}
``totals``   slot, total_true, capacity, constraint_ok
``cutdown``  building, initial, final, cut
"""

from __future__ import annotations

import csv
from pathlib import Path

from .plots import render_svg
from .protocol import SimulationRecord

__all__ = ["TABLES", "record_tables", "write_csv", "write_svg", "format_real"]

TABLES = ("demands", "prices", "totals", "cutdown")


def format_real(x: float) -> str:
    return f"{float(x):.10g}"


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return format_real(value)


def record_tables(record: SimulationRecord) -> dict[str, tuple[list[str], list[list]]]:
    """Column headers and rows for each of the four output tables."""
    n = len(record.initial_demands)
    demands = (["slot"] + [f"b{i}" for i in range(n)], [])
    prices = (["slot"] + [f"p{i}" for i in range(n)], [])
    totals = (["slot", "total_true", "capacity", "constraint_ok"], [])
    for out in record.slots:
        demands[1].append([out.slot, *map(float, out.demands)])
        prices[1].append([out.slot, *map(float, out.prices)])
        totals[1].append([out.slot, out.total_true, float(record.capacity), bool(out.constraint_ok)])

    final = record.initial_demands if record.final_demands is None else record.final_demands
    cut = record.cut_down
    cutdown = (
        ["building", "initial", "final", "cut"],
        [[i, float(record.initial_demands[i]), float(final[i]), float(cut[i])] for i in range(n)],
    )
    return {"demands": demands, "prices": prices, "totals": totals, "cutdown": cutdown}


def write_csv(record: SimulationRecord, directory) -> list[Path]:
    """Write the four CSV files into ``directory`` (created if missing)."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {directory}: {exc}") from exc
    paths = []
    for name, (header, rows) in record_tables(record).items():
        path = directory / f"{name}.csv"
        try:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(header)
                writer.writerows([_cell(v) for v in row] for row in rows)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        paths.append(path)
    return paths


def write_svg(record: SimulationRecord, directory) -> list[Path]:
    """Render each non-empty table as ``<name>.svg`` next to the CSVs."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, (header, rows) in record_tables(record).items():
        if not rows:
            continue
        columns = {h: [row[k] for row in rows] for k, h in enumerate(header)}
        path = directory / f"{name}.svg"
        path.write_text(render_svg(name, columns), encoding="utf-8", newline="\n")
        paths.append(path)
    return paths
