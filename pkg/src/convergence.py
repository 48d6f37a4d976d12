"""Mesh-refinement study of the Burgers problem for the coupled and uncoupled schemes."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .analysis import (
    ErrorReport,
    burgers_initial,
    burgers_reference,
    l1_error,
    linf_error,
    reference_averages,
)
from .config import SchemeOrder, get_settings
from .network import BoundaryCondition, FluxFunction, Grid, cell_averages
from .presets import burgers_network
from .schemes import SchemeConfig, run, run_line

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTIONS = (100, 200, 400, 800)
FAST_RESOLUTIONS = (100, 200)
# Fast mode trades the tiny fixed MUSCL step for a coarser one.
FAST_MUSCL_DT = 1e-5


@dataclass(frozen=True)
class Variant:
    name: str
    order: SchemeOrder
    coupled: bool = True


VARIANTS = (
    Variant("central", SchemeOrder.FIRST),
    Variant("central MUSCL", SchemeOrder.MUSCL),
    Variant("central MUSCL TVD", SchemeOrder.MUSCL_TVD),
    Variant("uncoupled MUSCL", SchemeOrder.MUSCL, coupled=False),
)


def variant_errors(
    variant: Variant,
    inv_dx: int,
    t_eval: float = 0.5,
    cfl: float = 0.49,
    fixed_dt: float | None = 2e-6,
) -> tuple[float, float]:
    """(L1, Linf) error of one variant at 1/dx = inv_dx against the exact averages."""
    muscl_dt = fixed_dt if variant.order is not SchemeOrder.FIRST else None
    config = SchemeConfig(order=variant.order, cfl=cfl, fixed_dt=muscl_dt)
    network = burgers_network(inv_dx)
    reference = reference_averages(network, t_eval)
    if variant.coupled:
        result = run([burgers_initial, burgers_initial], network, config, t_eval, record=False)
        assert result.final is not None
        numeric = result.final.interiors()
    else:
        grid = Grid(2 * inv_dx, 2.0)
        line = run_line(
            burgers_initial,
            FluxFunction.burgers(),
            network.lambda_max,
            grid,
            -1.0,
            config,
            t_eval,
            BoundaryCondition.PERIODIC,
        )
        numeric = [line.u]
        reference = [cell_averages(lambda x: burgers_reference(x, t_eval), grid, -1.0)]
    dx = network.grid.dx
    l1, linf = l1_error(numeric, reference, dx), linf_error(numeric, reference)
    logger.info("%s at 1/dx=%d: L1=%.4e Linf=%.4e", variant.name, inv_dx, l1, linf)
    return l1, linf


def run_convergence_study(
    resolutions: Sequence[int] | None = None,
    variants: Sequence[Variant] = VARIANTS,
    *,
    fast: bool = False,
    t_eval: float = 0.5,
    cfl: float = 0.49,
    fixed_dt: float | None = 2e-6,
    max_workers: int | None = None,
) -> list[ErrorReport]:
    """Errors and EOCs per variant; every (variant, resolution) pair runs on its own worker."""
    if resolutions is None:
        resolutions = FAST_RESOLUTIONS if fast else DEFAULT_RESOLUTIONS
    muscl_dt = FAST_MUSCL_DT if fast else fixed_dt
    workers = max_workers or get_settings().max_workers
    jobs = [(v, r) for v in variants for r in sorted(resolutions)]
    logger.info("Convergence study: %d runs on %d workers", len(jobs), workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(
            pool.map(lambda job: variant_errors(job[0], job[1], t_eval, cfl, muscl_dt), jobs)
        )
    reports = {v.name: ErrorReport(v.name, t_eval, cfl, muscl_dt) for v in variants}
    for (variant, inv_dx), (l1, linf) in zip(jobs, results, strict=True):
        reports[variant.name].add(inv_dx, l1, linf)
    return list(reports.values())
