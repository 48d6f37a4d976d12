"""Experiment presets: networks, initial data and scheme settings for each run config."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .analysis import burgers_initial
from .config import Preset, RunConfig, SchemeOrder, StepProfile, get_settings
from .coupling import ConditionSet, IncomingProportional, OutgoingDistribution
from .errors import ConfigurationError
from .network import BoundaryCondition, FloatArray, FluxFunction, FluxKind, Network, Profile
from .schemes import SchemeConfig

logger = logging.getLogger(__name__)

# Suggested end times for presets whose figures give no snapshot times.
SUGGESTED_T_END = {
    Preset.TRAFFIC_FREE_FLOW: 0.5,
    Preset.TRAFFIC_CONGESTION: 0.5,
    Preset.BUCKLEY_LEVERETT: 0.3,
}

TRAFFIC_FREE_FLOW_STATES = (0.07, 0.15, 0.2)
TRAFFIC_CONGESTION_STATES = (0.6, 0.35, 0.35)


@dataclass(frozen=True)
class Experiment:
    network: Network
    initial: list[Profile]
    scheme: SchemeConfig
    t_end: float
    snapshots: list[float]


def step_profile(at: float, left: float, right: float) -> Profile:
    """Piecewise constant profile: left for x <= at, right beyond."""
    def profile(x: FloatArray) -> FloatArray:
        return np.where(x <= at, left, right).astype(np.float64)

    return profile


def _flux(kind: FluxKind, u_max: float = 1.0) -> FluxFunction:
    if kind is FluxKind.BURGERS:
        return FluxFunction.burgers()
    if kind is FluxKind.LWR:
        return FluxFunction.lwr(u_max)
    if kind is FluxKind.BUCKLEY_LEVERETT:
        return FluxFunction.buckley_leverett()
    msg = "Custom flux callables cannot be declared in a config file"
    raise ConfigurationError(msg)


def _speeds(config: RunConfig) -> float | list[float]:
    assert config.lam is not None
    return config.lam


def _eps(config: RunConfig) -> float:
    return get_settings().eps_reg if config.eps_reg is None else config.eps_reg


def scheme_config(config: RunConfig) -> SchemeConfig:
    """Scheme settings from a validated run config."""
    assert config.cfl is not None
    return SchemeConfig(
        order=config.scheme or SchemeOrder.FIRST,
        cfl=config.cfl,
        coupling=config.coupling,
        right_of_way=config.beta,
        fixed_dt=config.fixed_dt,
        equalize_speeds=config.equalize_speeds,
    )


def burgers_network(m: int, lam: float | Sequence[float] = 1.0) -> Network:
    """1-to-1 periodic Burgers network on (-1, 0) and (0, 1)."""
    burgers = FluxFunction.burgers()
    return Network.build([burgers], [burgers], lam, m, BoundaryCondition.PERIODIC)


def traffic_network(m: int, lam: float | Sequence[float] = 1.0, eps_reg: float = 0.0) -> Network:
    """2-to-1 LWR junction: two roads of capacity 1 merging into one of capacity 1.2."""
    road = FluxFunction.lwr(1.0)
    return Network.build(
        [road, road],
        [FluxFunction.lwr(1.2)],
        lam,
        m,
        (BoundaryCondition.ZERO_FLUX, BoundaryCondition.ZERO_FLUX, BoundaryCondition.NEUMANN),
        conditions=ConditionSet((IncomingProportional(eps_reg),)),
    )


def buckley_leverett_network(
    m: int, lam: float | Sequence[float] = 2.5, eps_reg: float | None = None
) -> Network:
    """2-to-1 two-phase junction; eps_reg defaults to the process setting."""
    if eps_reg is None:
        eps_reg = get_settings().eps_reg
    bl = FluxFunction.buckley_leverett()
    return Network.build(
        [bl, bl],
        [bl],
        lam,
        m,
        BoundaryCondition.NEUMANN,
        conditions=ConditionSet.standard(2, 1, eps_reg),
    )


def _custom(config: RunConfig) -> tuple[Network, list[Profile]]:
    assert config.incoming is not None and config.outgoing is not None
    assert config.initial is not None and config.m is not None
    n_minus, n_plus = len(config.incoming), len(config.outgoing)
    alpha = (
        OutgoingDistribution(tuple(tuple(row) for row in config.alpha))
        if config.alpha is not None
        else OutgoingDistribution.uniform(n_minus, n_plus)
    )
    network = Network.build(
        [_flux(spec.kind, spec.u_max) for spec in config.incoming],
        [_flux(spec.kind, spec.u_max) for spec in config.outgoing],
        _speeds(config),
        config.m,
        config.boundary or BoundaryCondition.NEUMANN,
        conditions=ConditionSet((IncomingProportional(_eps(config)), alpha)),
    )
    initial: list[Profile] = [
        step_profile(spec.at, spec.left, spec.right)
        if isinstance(spec, StepProfile)
        else float(spec)
        for spec in config.initial
    ]
    return network, initial


def build_experiment(config: RunConfig) -> Experiment:
    """Network, initial data and scheme settings for a single run."""
    preset = config.preset
    if preset is Preset.BURGERS_CONVERGENCE:
        msg = "The convergence preset runs through the convergence study, not a single run"
        raise ConfigurationError(msg)
    if config.t_end is None:
        suggestion = SUGGESTED_T_END.get(preset)
        hint = f" (suggested: {suggestion})" if suggestion is not None else ""
        msg = f"Preset '{preset}' needs an end time t_end{hint}"
        raise ConfigurationError(msg)
    assert config.m is not None
    network: Network
    initial: list[Profile]
    if preset is Preset.BURGERS:
        network = burgers_network(config.m, _speeds(config))
        initial = [burgers_initial, burgers_initial]
    elif preset in (Preset.TRAFFIC_FREE_FLOW, Preset.TRAFFIC_CONGESTION):
        network = traffic_network(config.m, _speeds(config), _eps(config))
        states = (
            TRAFFIC_FREE_FLOW_STATES
            if preset is Preset.TRAFFIC_FREE_FLOW
            else TRAFFIC_CONGESTION_STATES
        )
        initial = list(states)
    elif preset is Preset.BUCKLEY_LEVERETT:
        network = buckley_leverett_network(config.m, _speeds(config), _eps(config))
        initial = [step_profile(-0.5, 1.0, 0.0), 0.16, 0.0]
    else:
        network, initial = _custom(config)
    snapshots = sorted({t for t in config.snapshots if 0 <= t <= config.t_end} | {config.t_end})
    logger.info("Built %s experiment with %d edges", preset, network.n_edges)
    return Experiment(network, initial, scheme_config(config), config.t_end, snapshots)
