"""Relaxation system machinery: characteristic variables, Lax curves and the IMEX integrator."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from .config import SchemeOrder, get_settings
from .coupling import CouplingData, CouplingTraces, solve_coupling_1to1
from .errors import ConfigurationError, NumericalError
from .network import (
    GHOSTS,
    BoundaryCondition,
    CellField,
    FloatArray,
    Network,
    Profile,
    Real,
    apply_outer_boundary,
)
from .schemes import SchemeConfig, check_cfl, run, time_levels

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CharPair:
    """Characteristic variables w- = (v - lam u)/2 and w+ = (v + lam u)/2."""

    w_minus: float
    w_plus: float


def to_characteristic(u: float, v: float, lam: float) -> CharPair:
    """Split (u, v) into the Riemann invariants w- and w+ of the relaxation system."""
    return CharPair(0.5 * (v - lam * u), 0.5 * (v + lam * u))


def from_characteristic(w: CharPair, lam: float) -> tuple[float, float]:
    """Inverse of to_characteristic."""
    return (w.w_plus - w.w_minus) / lam, w.w_plus + w.w_minus


class LaxFamily(StrEnum):
    BACKWARD_MINUS = "backward-minus"
    FORWARD_PLUS = "forward-plus"


def lax_curve_point(
    base_u: Real, base_v: Real, sigma: Real, lam: float, family: LaxFamily
) -> tuple[Real, Real]:
    """Point at parameter sigma on the straight Lax curve through (base_u, base_v).

    Along the backward family v + lam u is constant, along the forward one v - lam u.
    """
    if family is LaxFamily.BACKWARD_MINUS:
        return base_u - sigma, base_v + sigma * lam
    return base_u + sigma, base_v + sigma * lam


def check_subcharacteristic(network: Network, u_lo: float, u_hi: float) -> list[bool]:
    """Per edge: does max |f'| over [u_lo, u_hi] stay below lambda?"""
    return network.subcharacteristic_range(u_lo, u_hi, get_settings().wave_speed_samples)


@dataclass
class RelaxState:
    """Cell averages of (u, v) on both edges of a 1-to-1 network."""

    u: CellField
    v: CellField
    epsilon: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            msg = f"Relaxation rate must be positive, got {self.epsilon}"
            raise ConfigurationError(msg)
        if len(self.u.data) != len(self.v.data) or any(
            len(a) != len(b) for a, b in zip(self.u.data, self.v.data, strict=True)
        ):
            msg = "u and v fields must have matching shapes"
            raise ConfigurationError(msg)

    @classmethod
    def equilibrium(cls, u: CellField, network: Network, epsilon: float) -> RelaxState:
        """State with v = f(u) cell-wise."""
        v = CellField([edge.flux(d) for edge, d in zip(network.edges, u.data, strict=True)])
        return cls(u.copy(), v, epsilon)

    def traces(self, network: Network) -> CouplingTraces:
        """Node-side traces of u and v on every edge."""
        u = [
            self.u.interior(k)[-1] if e.incoming else self.u.interior(k)[0]
            for k, e in enumerate(network.edges)
        ]
        v = [
            self.v.interior(k)[-1] if e.incoming else self.v.interior(k)[0]
            for k, e in enumerate(network.edges)
        ]
        return CouplingTraces.from_values(u, v)


def imex_step_1to1(
    state: RelaxState, dt: float, coupling: CouplingData, network: Network
) -> RelaxState:
    """Explicit transport of (u, v), then the stiff source solved in closed form.

    The node-adjacent cells see the coupling data as ghost values.
    """
    if network.n_edges != 2:
        msg = "The IMEX relaxation integrator supports 1-to-1 networks only"
        raise ConfigurationError(msg)
    dx = network.grid.dx
    check_cfl(dt, network.lambda_max, dx)
    m = network.grid.m
    u_pad = apply_outer_boundary(state.u, network)
    v_pad = apply_outer_boundary(state.v, network)
    stiffness = 0.0 if math.isinf(state.epsilon) else dt / state.epsilon
    new_u, new_v = [], []
    for k, edge in enumerate(network.edges):
        u, v, lam = u_pad.data[k], v_pad.data[k], edge.lam
        if edge.incoming:
            u[m + GHOSTS :], v[m + GHOSTS :] = coupling.u[k], coupling.v[k]
        else:
            u[:GHOSTS], v[:GHOSTS] = coupling.u[k], coupling.v[k]
        left, right = slice(GHOSTS - 1, m + GHOSTS), slice(GHOSTS, m + GHOSTS + 1)
        flux_u = 0.5 * (v[left] + v[right]) - 0.5 * lam * (u[right] - u[left])
        flux_v = 0.5 * lam**2 * (u[left] + u[right]) - 0.5 * lam * (v[right] - v[left])
        if network.boundary[k] is BoundaryCondition.ZERO_FLUX:
            outer = 0 if edge.incoming else -1
            flux_u[outer] = 0.0
        ratio = dt / dx
        u_next = u[GHOSTS:-GHOSTS] - ratio * (flux_u[1:] - flux_u[:-1])
        v_explicit = v[GHOSTS:-GHOSTS] - ratio * (flux_v[1:] - flux_v[:-1])
        v_next = (v_explicit + stiffness * edge.flux(u_next)) / (1.0 + stiffness)
        new_u.append(u_next)
        new_v.append(v_next)
    return RelaxState(
        CellField.from_interiors(new_u), CellField.from_interiors(new_v), state.epsilon
    )


def run_imex_1to1(
    initial: Sequence[Profile],
    network: Network,
    epsilon: float,
    t_end: float,
    cfl: float = 0.49,
    dt: float | None = None,
) -> RelaxState:
    """IMEX run started from equilibrium v = f(u0)."""
    step_dt = dt if dt is not None else cfl * network.grid.dx / network.lambda_max
    state = RelaxState.equilibrium(CellField.from_profiles(network, initial), network, epsilon)
    first, second = network.edges
    n = 0
    for _, h, _ in time_levels(t_end, step_dt):
        traces = state.traces(network)
        coupling = solve_coupling_1to1(traces, first.lam, second.lam)
        state = imex_step_1to1(state, h, coupling, network)
        n += 1
        if not (state.u.is_finite() and state.v.is_finite()):
            msg = f"Non-finite relaxation state at step {n}"
            raise NumericalError(msg, step=n)
    logger.debug("IMEX run eps=%g finished after %d steps", epsilon, n)
    return state


def relaxation_gap(
    epsilons: Sequence[float],
    initial: Sequence[Profile],
    network: Network,
    t_end: float,
    cfl: float = 0.49,
) -> dict[float, float]:
    """Max-norm distance between the IMEX solution and the first-order limit scheme."""
    limit = run(initial, network, SchemeConfig(SchemeOrder.FIRST, cfl=cfl), t_end, record=False)
    assert limit.final is not None
    reference: list[FloatArray] = limit.final.interiors()
    gaps = {}
    for epsilon in epsilons:
        state = run_imex_1to1(initial, network, epsilon, t_end, cfl=cfl)
        gaps[epsilon] = float(
            max(
                np.max(np.abs(a - b))
                for a, b in zip(state.u.interiors(), reference, strict=True)
            )
        )
        logger.info("Relaxation gap at eps=%g: %.3e", epsilon, gaps[epsilon])
    return gaps
