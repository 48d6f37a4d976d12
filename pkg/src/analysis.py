"""Error norms, convergence orders, total variation, mass accounting and reference solutions."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigurationError
from .network import CellField, FloatArray, Network, cell_averages

logger = logging.getLogger(__name__)

BURGERS_SHOCK_TIME = 2.0 / math.pi

Fields = CellField | Sequence[FloatArray]


def _arrays(values: Fields) -> list[FloatArray]:
    if isinstance(values, CellField):
        return values.interiors()
    return [np.asarray(v, dtype=np.float64) for v in values]


def l1_error(numeric: Fields, reference: Fields, dx: float) -> float:
    """Sum over all edges of dx * |u_j - ref_j|."""
    return float(
        sum(
            dx * np.sum(np.abs(u - r))
            for u, r in zip(_arrays(numeric), _arrays(reference), strict=True)
        )
    )


def linf_error(numeric: Fields, reference: Fields) -> float:
    """Largest pointwise error over all edges."""
    return float(
        max(
            np.max(np.abs(u - r))
            for u, r in zip(_arrays(numeric), _arrays(reference), strict=True)
        )
    )


def eoc(e_coarse: float, e_fine: float) -> float:
    """log2(e_coarse / e_fine); NaN when either error is not positive."""
    if e_coarse <= 0 or e_fine <= 0:
        return math.nan
    return math.log2(e_coarse / e_fine)


@dataclass(frozen=True)
class ErrorRow:
    inv_dx: int
    l1: float
    linf: float
    eoc_l1: float = math.nan
    eoc_linf: float = math.nan


@dataclass
class ErrorReport:
    """Errors of one scheme variant over a sequence of resolutions."""

    variant: str
    t_eval: float
    cfl: float | None = None
    fixed_dt: float | None = None
    rows: list[ErrorRow] = field(default_factory=list)

    def add(self, inv_dx: int, l1: float, linf: float) -> ErrorRow:
        """Append a resolution; EOCs only against a predecessor at half the resolution."""
        eoc_l1 = eoc_linf = math.nan
        if self.rows and inv_dx == 2 * self.rows[-1].inv_dx:
            previous = self.rows[-1]
            eoc_l1 = eoc(previous.l1, l1)
            eoc_linf = eoc(previous.linf, linf)
        row = ErrorRow(inv_dx, l1, linf, eoc_l1, eoc_linf)
        self.rows.append(row)
        return row


def burgers_initial(x: FloatArray) -> FloatArray:
    """Smooth periodic data 1/2 + sin(pi (x + 1)) / 2 on (-1, 1)."""
    return np.asarray(0.5 + 0.5 * np.sin(np.pi * (np.asarray(x) + 1.0)), dtype=np.float64)


def burgers_reference(
    x: float | FloatArray,
    t: float,
    initial: Callable[[FloatArray], FloatArray] = burgers_initial,
    bracket: tuple[float, float] = (0.0, 1.0),
    shock_time: float = BURGERS_SHOCK_TIME,
) -> FloatArray:
    """Pre-shock Burgers solution from the characteristic relation u = u0(x - u t).

    ``bracket`` must contain the range of ``initial``.
    """
    if t >= shock_time:
        msg = f"No smooth solution at t={t}: characteristics cross at t={shock_time:.6f}"
        raise ConfigurationError(msg)
    points = np.asarray(x, dtype=np.float64)
    if t == 0:
        return np.asarray(initial(points), dtype=np.float64)
    lo, hi = bracket
    flat = points.ravel()
    out = np.empty_like(flat)
    for i, xi in enumerate(flat):

        def residual(u: float, xi: float = float(xi)) -> float:
            return u - float(initial(np.asarray(xi - u * t)))

        out[i] = brentq(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return out.reshape(points.shape)


def reference_averages(network: Network, t: float) -> list[FloatArray]:
    """Cell averages of the Burgers reference solution on every edge."""
    return [
        cell_averages(lambda pts: burgers_reference(pts, t), network.grid, edge.domain[0])
        for edge in network.edges
    ]


def total_variation(
    values: Fields, network: Network | None = None, *, periodic: bool = False
) -> float:
    """Sum of |u_{j+1} - u_j| within each edge.

    On 1-to-1 networks with one flux the junction jump counts too, as does
    the wrap-around jump of periodic networks.
    """
    arrays = _arrays(values)
    tv = float(sum(np.sum(np.abs(np.diff(u))) for u in arrays))
    if network is not None:
        if network.n_edges == 2 and network.uniform_flux:
            tv += abs(float(arrays[1][0] - arrays[0][-1]))
        periodic = periodic or network.periodic
    if periodic and len(arrays) == 2:
        tv += abs(float(arrays[0][0] - arrays[1][-1]))
    elif periodic and len(arrays) == 1:
        tv += abs(float(arrays[0][0] - arrays[0][-1]))
    return tv


def edge_masses(values: Fields, dx: float) -> FloatArray:
    """Per-edge integral of the cell averages."""
    return np.array([dx * np.sum(u) for u in _arrays(values)])


def total_mass(values: Fields, dx: float) -> float:
    """Mass summed over all edges."""
    return float(np.sum(edge_masses(values, dx)))


def node_residual(node_fluxes: FloatArray, network: Network) -> float:
    """Scaled mismatch between incoming and outgoing junction-face fluxes."""
    incoming = network.signs < 0
    gap = float(np.sum(node_fluxes[incoming]) - np.sum(node_fluxes[~incoming]))
    return abs(gap) / max(1.0, float(np.sum(np.abs(node_fluxes))))


@dataclass(frozen=True)
class MassBalance:
    edge_mass: FloatArray
    total: float
    residuals: FloatArray


def mass_and_balance(
    values: Fields, network: Network, node_flux_history: Sequence[FloatArray]
) -> MassBalance:
    """Edge masses, their total and the node flux residual of every step."""
    masses = edge_masses(values, network.grid.dx)
    residuals = np.array([node_residual(np.asarray(f), network) for f in node_flux_history])
    return MassBalance(masses, float(np.sum(masses)), residuals)


def layer_width(values: FloatArray, dx: float, reach: float = 0.1) -> float:
    """Width at half height of the layer next to index 0.

    The layer runs from values[0] to the level found ``reach`` away from the
    junction; the crossing is linearly interpolated between cells.
    """
    u = np.asarray(values, dtype=np.float64)
    far = min(len(u) - 1, max(1, round(reach / dx)))
    height = u[0] - u[far]
    if height == 0:
        return 0.0
    excess = (u[: far + 1] - u[far]) / height
    below = np.nonzero(excess <= 0.5)[0]
    j = int(below[0])
    if j == 0:
        return 0.0
    # interpolate between cell j-1 (above half) and j (at or below)
    frac = (excess[j - 1] - 0.5) / (excess[j - 1] - excess[j])
    return float((j - 1 + frac) * dx)


def front_position(
    values: FloatArray, centers: FloatArray, background: float, tol: float = 1e-3
) -> float:
    """Leftmost cell center where the profile departs from ``background``.

    Returns the right end of ``centers`` when the profile is undisturbed.
    """
    disturbed = np.nonzero(np.abs(np.asarray(values) - background) > tol)[0]
    if disturbed.size == 0:
        return float(centers[-1])
    return float(centers[disturbed[0]])


def count_jumps(values: FloatArray, threshold: float) -> int:
    """Number of groups of consecutive cell jumps larger than ``threshold``."""
    large = np.abs(np.diff(np.asarray(values))) > threshold
    starts = large & ~np.concatenate(([False], large[:-1]))
    return int(np.count_nonzero(starts))


def is_monotone(values: FloatArray, *, increasing: bool = True, tol: float = 1e-12) -> bool:
    """Whether the values never step against the given direction by more than tol."""
    steps = np.diff(np.asarray(values))
    if increasing:
        return bool(np.all(steps >= -tol))
    return bool(np.all(steps <= tol))
