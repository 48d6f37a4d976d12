"""JSON sidecar with run metadata and the junction flux history."""

import json
import logging
from pathlib import Path
from typing import Any

from src.config import RunConfig
from src.schemes import RunResult

logger = logging.getLogger(__name__)


def diagnostics_payload(result: RunResult, config: RunConfig | None = None) -> dict[str, Any]:
    """Run summary for the JSON sidecar; the output directory is left out so reruns match."""
    network = result.network
    diagnostics = result.diagnostics
    payload: dict[str, Any] = {
        "topology": {"n_minus": network.n_minus, "n_plus": network.n_plus},
        "m": network.grid.m,
        "lambdas": [float(lam) for lam in network.lambdas],
        "steps": len(diagnostics),
        "initial_mass": result.initial_mass,
        "final_mass": diagnostics[-1].total_mass if diagnostics else result.initial_mass,
        "max_node_residual": max((d.node_residual for d in diagnostics), default=0.0),
        "clipped_steps": [d.step for d in diagnostics if d.clipped],
        "snapshot_times": result.times,
        "node_fluxes": [list(d.node_fluxes) for d in diagnostics],
    }
    if config is not None:
        payload["config"] = config.model_dump(
            mode="json", exclude_none=True, exclude={"output_dir"}
        )
    return payload


def export_diagnostics_json(
    result: RunResult, filename: str | Path, config: RunConfig | None = None
) -> None:
    """Write the metadata payload with sorted keys so repeated runs are byte-identical."""
    with open(filename, "w", encoding="utf-8") as f:
        json.dump(diagnostics_payload(result, config), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.info("Exported diagnostics metadata to %s", filename)
