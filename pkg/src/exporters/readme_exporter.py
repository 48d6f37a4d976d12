"""README generator for output directories."""

import logging
from pathlib import Path
from typing import Any

from src.config import RunConfig, format_float

logger = logging.getLogger(__name__)

FILE_DESCRIPTIONS = {
    "snapshots.csv": (
        "CSV (time, edge, x, u)",
        "Cell averages of every edge at each snapshot time, sorted by time, edge and x.",
    ),
    "diagnostics.csv": (
        "CSV (step, time, total_mass, node_residual, tv)",
        "Per-step total mass, scaled junction flux balance and total variation.",
    ),
    "diagnostics.json": (
        "JSON",
        "Run metadata and the junction-face flux of every edge for every step.",
    ),
    "table.csv": (
        "CSV (inv_dx, scheme, l1, eoc_l1, linf, eoc_linf)",
        "Errors and experimental orders of convergence per resolution and scheme.",
    ),
    "config.yaml": (
        "YAML",
        "Effective run configuration; pass it back with --config to reproduce the run.",
    ),
}


def export_output_readme(output_dir: Path, config: RunConfig, files: list[str]) -> None:
    """Generate README.md in output directory explaining all generated files."""
    readme_path = output_dir / "README.md"

    with open(readme_path, "w", encoding="utf-8") as f:
        f.write(f"# netflux run - {config.preset}\n\n")
        _write_summary(f, config)
        _write_file_descriptions(f, files)
        f.write("---\n\n")
        f.write("*Generated by netflux*\n")

    logger.info("Generated README.md in output directory: %s", readme_path)


def _write_summary(f: Any, config: RunConfig) -> None:
    f.write("## Run Summary\n\n")
    f.write(f"- **Preset:** {config.preset}\n")
    if config.scheme is not None:
        f.write(f"- **Scheme:** {config.scheme}\n")
    f.write(f"- **Coupling:** {config.coupling}\n")
    if config.m is not None:
        f.write(f"- **Cells per edge:** {config.m}\n")
    if config.cfl is not None:
        f.write(f"- **CFL:** {format_float(config.cfl)}\n")
    if config.t_end is not None:
        f.write(f"- **End time:** {format_float(config.t_end)}\n")
    f.write("\n")


def _write_file_descriptions(f: Any, files: list[str]) -> None:
    f.write("## Generated Files\n\n")
    for name in files:
        if name not in FILE_DESCRIPTIONS:
            continue
        fmt, desc = FILE_DESCRIPTIONS[name]
        f.write(f"### `{name}`\n")
        f.write(f"**Format:** {fmt}\n\n")
        f.write(f"**Description:** {desc}\n\n")
