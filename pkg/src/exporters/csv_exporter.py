"""CSV export for snapshots, step diagnostics and convergence tables."""

import csv
import logging
import math
from collections.abc import Sequence
from pathlib import Path

from src.analysis import ErrorReport
from src.config import format_float
from src.schemes import RunResult, StepDiagnostics

logger = logging.getLogger(__name__)


def _number(value: float) -> str:
    return "" if math.isnan(value) else format_float(value)


def export_snapshots(result: RunResult, filename: str | Path) -> int:
    """Write time,edge,x,u rows sorted by (time, edge, x)."""
    network = result.network
    rows = 0
    with open(filename, "w", newline="", encoding="utf-8") as csvfile:
        writer = csv.writer(csvfile, lineterminator="\n")
        writer.writerow(["time", "edge", "x", "u"])
        for t, arrays in zip(result.times, result.snapshots, strict=True):
            for edge, values in zip(network.edges, arrays, strict=True):
                for x, u in zip(network.grid.centers(edge), values, strict=True):
                    writer.writerow(
                        [format_float(t), edge.index, format_float(x), format_float(u)]
                    )
                    rows += 1
    logger.info("Exported %d snapshot rows to %s", rows, filename)
    return rows


def export_diagnostics(diagnostics: Sequence[StepDiagnostics], filename: str | Path) -> int:
    """Write step,time,total_mass,node_residual,tv rows, one per step."""
    with open(filename, "w", newline="", encoding="utf-8") as csvfile:
        writer = csv.writer(csvfile, lineterminator="\n")
        writer.writerow(["step", "time", "total_mass", "node_residual", "tv"])
        for d in diagnostics:
            writer.writerow([
                d.step,
                format_float(d.time),
                format_float(d.total_mass),
                format_float(d.node_residual),
                format_float(d.tv),
            ])
    logger.info("Exported %d diagnostic rows to %s", len(diagnostics), filename)
    return len(diagnostics)


def export_table(reports: Sequence[ErrorReport], filename: str | Path) -> int:
    """Write inv_dx,scheme,l1,eoc_l1,linf,eoc_linf rows grouped by resolution."""
    rows = sorted(
        ((row.inv_dx, index, report.variant, row) for index, report in enumerate(reports)
         for row in report.rows),
        key=lambda item: (item[0], item[1]),
    )
    with open(filename, "w", newline="", encoding="utf-8") as csvfile:
        writer = csv.writer(csvfile, lineterminator="\n")
        writer.writerow(["inv_dx", "scheme", "l1", "eoc_l1", "linf", "eoc_linf"])
        for inv_dx, _, variant, row in rows:
            writer.writerow([
                inv_dx,
                variant,
                _number(row.l1),
                _number(row.eoc_l1),
                _number(row.linf),
                _number(row.eoc_linf),
            ])
    logger.info("Exported %d table rows to %s", len(rows), filename)
    return len(rows)
