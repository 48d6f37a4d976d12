"""Central limit schemes on star networks: first order and MUSCL, in conservative form."""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import node_residual, total_mass, total_variation
from .config import CouplingMode, SchemeOrder, get_settings
from .coupling import (
    ConditionSet,
    CouplingData,
    CouplingTraces,
    flowmax_riemann_2to1,
    solve_coupling_1to1,
    solve_coupling_adjacent,
    solve_coupling_network,
)
from .errors import ConfigurationError, NumericalError
from .network import (
    GHOSTS,
    BoundaryCondition,
    CellField,
    FloatArray,
    FluxFunction,
    Grid,
    Network,
    Profile,
    Real,
    apply_outer_boundary,
    cell_averages,
)

logger = logging.getLogger(__name__)

CFL_SLACK = 1e-10


@dataclass(frozen=True)
class SchemeConfig:
    """Scheme order, Courant number and junction treatment of a run."""

    order: SchemeOrder = SchemeOrder.FIRST
    cfl: float = 0.49
    coupling: CouplingMode = CouplingMode.CENTRAL
    right_of_way: float = 0.5
    fixed_dt: float | None = None
    equalize_speeds: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.cfl <= 1:
            msg = f"CFL number must lie in (0, 1], got {self.cfl}"
            raise ConfigurationError(msg)
        if not 0 <= self.right_of_way <= 1:
            msg = f"Right-of-way parameter must lie in [0, 1], got {self.right_of_way}"
            raise ConfigurationError(msg)
        if self.fixed_dt is not None and self.fixed_dt <= 0:
            msg = f"Fixed time step must be positive, got {self.fixed_dt}"
            raise ConfigurationError(msg)

    @property
    def muscl(self) -> bool:
        return self.order is not SchemeOrder.FIRST


def minmod(*values: float) -> float:
    """Smallest magnitude if all arguments share a sign, else 0."""
    if not values:
        msg = "minmod needs at least one argument"
        raise ValueError(msg)
    if all(v > 0 for v in values):
        return min(values)
    if all(v < 0 for v in values):
        return max(values)
    return 0.0


def mc_slope(w_prev: float, w_mid: float, w_next: float, dx: float) -> float:
    """Monotonized central-difference slope."""
    return minmod(
        2.0 * (w_mid - w_prev) / dx,
        (w_next - w_prev) / (2.0 * dx),
        2.0 * (w_next - w_mid) / dx,
    )


def mc_slopes(w: FloatArray, dx: float) -> FloatArray:
    """Vectorised MC slopes; entry i belongs to cell i+1 of ``w``."""
    a = 2.0 * (w[1:-1] - w[:-2]) / dx
    b = (w[2:] - w[:-2]) / (2.0 * dx)
    c = 2.0 * (w[2:] - w[1:-1]) / dx
    positive = (a > 0) & (b > 0) & (c > 0)
    negative = (a < 0) & (b < 0) & (c < 0)
    smallest = np.minimum(np.minimum(a, b), c)
    largest = np.maximum(np.maximum(a, b), c)
    return np.where(positive, smallest, np.where(negative, largest, 0.0))


def interior_flux(
    u_left: Real,
    u_right: Real,
    flux: FluxFunction,
    lam: float,
    s_left_plus: Real | float,
    s_right_minus: Real | float,
    dx: float,
) -> Real:
    """Central relaxed flux; zero slopes give the first-order scheme."""
    return (  # type: ignore[no-any-return]
        0.5 * (flux(u_left) + flux(u_right))
        - 0.5 * lam * (u_right - u_left)
        - 0.5 * dx * (s_right_minus - s_left_plus)
    )


def node_flux(
    coupling: CouplingData,
    network: Network,
    traces: CouplingTraces,
    *,
    verify: bool = True,
    tolerance: float | None = None,
) -> FloatArray:
    """Junction-face flux of every edge from the coupling data.

    On incoming edges this is 1/2 (v_R + f(u_-1)) - lam/2 (u_R - u_-1), on
    outgoing ones 1/2 (f(u_0) + v_L) - lam/2 (u_0 - u_L). For data on the Lax
    curves both reduce to v_R and v_L; ``verify`` checks that and returns
    the coupling fluxes themselves.
    """
    tol = get_settings().node_flux_tolerance if tolerance is None else tolerance
    faces = np.empty(network.n_edges)
    for k, edge in enumerate(network.edges):
        u0, f0 = float(traces.u[k]), edge.flux(float(traces.u[k]))
        uc, vc = float(coupling.u[k]), float(coupling.v[k])
        if edge.incoming:
            faces[k] = 0.5 * (vc + f0) - 0.5 * edge.lam * (uc - u0)
        else:
            faces[k] = 0.5 * (f0 + vc) - 0.5 * edge.lam * (u0 - uc)
    if not verify:
        return faces
    scale = np.maximum(1.0, np.abs(coupling.v) + network.lambdas * np.abs(coupling.u))
    mismatch = np.abs(faces - coupling.v) / scale
    if np.any(mismatch > tol):
        msg = f"Node flux disagrees with coupling flux by {float(np.max(mismatch)):.3e}"
        raise NumericalError(msg)
    return np.array(coupling.v, dtype=np.float64)


def equalized(network: Network) -> Network:
    """The same network with every edge relaxed at the largest speed."""
    lam = network.lambda_max
    return replace(network, edges=tuple(replace(e, lam=lam) for e in network.edges))


@dataclass(frozen=True)
class JunctionState:
    traces: CouplingTraces
    data: CouplingData | None
    fluxes: FloatArray


def solve_junction(field: CellField, network: Network, config: SchemeConfig) -> JunctionState:
    """Coupling data and junction-face fluxes from the current traces."""
    traces = CouplingTraces.from_field(field, network)
    if config.coupling is CouplingMode.FLOWMAX:
        if network.n_minus != 2 or network.n_plus != 1:
            msg = "Flow maximization needs a 2-to-1 network"
            raise ConfigurationError(msg)
        fluxes = flowmax_riemann_2to1(
            traces, config.right_of_way, [e.flux for e in network.edges]
        )
        return JunctionState(traces, None, np.array(fluxes))
    if config.coupling is CouplingMode.ADJACENT:
        data = solve_coupling_adjacent(traces, network)
        return JunctionState(traces, data, node_flux(data, network, traces, verify=False))
    if network.n_edges == 2:
        first, second = network.edges
        data = solve_coupling_1to1(traces, first.lam, second.lam)
    else:
        conditions = network.conditions or ConditionSet.standard(
            network.n_minus, network.n_plus, get_settings().eps_reg
        )
        data = solve_coupling_network(traces, network, conditions)
    return JunctionState(traces, data, node_flux(data, network, traces))


def _edge_faces(
    u: FloatArray,
    flux: FluxFunction,
    lam: float,
    dx: float,
    order: SchemeOrder,
    ghost_w: tuple[int, float, float] | None = None,
    zero_slopes: Sequence[tuple[str, int]] = (),
) -> FloatArray:
    """Face fluxes between consecutive cells of a ghost-padded edge.

    Entry a sits between cells a+1 and a+2 of ``u``, so the first entry is the
    left face of the first interior cell. ``ghost_w`` = (index, w-, w+)
    overrides characteristic values of one ghost cell; ``zero_slopes`` lists
    ("minus" | "plus", index) slopes forced to zero.
    """
    m = len(u) - 2 * GHOSTS
    left, right = u[GHOSTS - 1 : m + GHOSTS], u[GHOSTS : m + GHOSTS + 1]
    if order is SchemeOrder.FIRST:
        return interior_flux(left, right, flux, lam, 0.0, 0.0, dx)
    f = flux(u)
    w_minus = 0.5 * f - 0.5 * lam * u
    w_plus = 0.5 * f + 0.5 * lam * u
    if ghost_w is not None:
        index, wm, wp = ghost_w
        w_minus[index], w_plus[index] = wm, wp
    s_minus = np.zeros_like(u)
    s_plus = np.zeros_like(u)
    s_minus[1:-1] = mc_slopes(w_minus, dx)
    s_plus[1:-1] = mc_slopes(w_plus, dx)
    for family, index in zero_slopes:
        (s_minus if family == "minus" else s_plus)[index] = 0.0
    return interior_flux(
        left,
        right,
        flux,
        lam,
        s_plus[GHOSTS - 1 : m + GHOSTS],
        s_minus[GHOSTS : m + GHOSTS + 1],
        dx,
    )


def _conservative_update(u: FloatArray, faces: FloatArray, dt: float, dx: float) -> FloatArray:
    return u[GHOSTS:-GHOSTS] - dt / dx * (faces[1:] - faces[:-1])  # type: ignore[no-any-return]


def check_cfl(dt: float, lam_max: float, dx: float) -> None:
    """Raise when a step would violate the relaxation CFL condition."""
    if dt * lam_max > dx * (1.0 + CFL_SLACK):
        msg = f"CFL violated: dt*lambda = {dt * lam_max:.6e} exceeds dx = {dx:.6e}"
        raise NumericalError(msg)


@dataclass(frozen=True)
class StepOutcome:
    field: CellField
    node_fluxes: FloatArray


def advance(field: CellField, network: Network, config: SchemeConfig, dt: float) -> StepOutcome:
    """One time step on the whole network, returning the junction fluxes used."""
    if config.equalize_speeds:
        network = equalized(network)
    dx = network.grid.dx
    check_cfl(dt, network.lambda_max, dx)
    m = network.grid.m
    padded = apply_outer_boundary(field, network)
    junction = solve_junction(field, network, config)
    result = CellField.zeros(network)
    for k, edge in enumerate(network.edges):
        u = padded.data[k]
        # junction-side ghosts: nearest interior value unless coupling data overrides
        if edge.incoming:
            u[m + GHOSTS :] = u[m + GHOSTS - 1]
            ghost, near, far = m + GHOSTS, ("minus", m + GHOSTS - 1), ("plus", m + GHOSTS - 1)
        else:
            u[:GHOSTS] = u[GHOSTS]
            ghost, near, far = GHOSTS - 1, ("plus", GHOSTS), ("minus", GHOSTS)
        ghost_w = None
        zero: list[tuple[str, int]] = []
        data = junction.data
        if config.order is SchemeOrder.MUSCL and data is not None:
            uc, vc = float(data.u[k]), float(data.v[k])
            ghost_w = (ghost, 0.5 * vc - 0.5 * edge.lam * uc, 0.5 * vc + 0.5 * edge.lam * uc)
        elif config.muscl:
            zero = [near, far]
        faces = _edge_faces(u, edge.flux, edge.lam, dx, config.order, ghost_w, zero)
        if edge.incoming:
            faces[-1] = junction.fluxes[k]
        else:
            faces[0] = junction.fluxes[k]
        if network.boundary[k] is BoundaryCondition.ZERO_FLUX:
            if edge.incoming:
                faces[0] = 0.0
            else:
                faces[-1] = 0.0
        result.data[k][GHOSTS:-GHOSTS] = _conservative_update(u, faces, dt, dx)
    return StepOutcome(result, junction.fluxes)


def step(field: CellField, network: Network, config: SchemeConfig, dt: float) -> CellField:
    """Advance the network state by one step of size dt."""
    return advance(field, network, config, dt).field


def time_step(network: Network, config: SchemeConfig) -> float:
    """dt = cfl * dx / lambda_max unless a fixed step is configured."""
    if config.fixed_dt is not None:
        return config.fixed_dt
    lam = network.lambda_max
    return config.cfl * network.grid.dx / lam


def time_levels(
    t_end: float, dt: float, stops: Sequence[float] = ()
) -> Iterator[tuple[float, float, bool]]:
    """Yield (t_new, h, clipped) so that every stop and t_end is hit exactly."""
    if t_end <= 0:
        return
    targets = sorted({s for s in stops if 0 < s < t_end} | {t_end})
    t = 0.0
    for target in targets:
        while t < target:
            if t + dt >= target - 1e-12 * dt:
                h, t_new = target - t, target
            else:
                h, t_new = dt, t + dt
            yield t_new, h, h != dt
            t = t_new


@dataclass(frozen=True)
class StepDiagnostics:
    step: int
    time: float
    dt: float
    total_mass: float
    node_residual: float
    tv: float
    node_fluxes: tuple[float, ...]
    clipped: bool = False


@dataclass
class RunResult:
    """Snapshots at the requested times plus per-step diagnostics."""

    network: Network
    times: list[float] = field(default_factory=list)
    snapshots: list[list[FloatArray]] = field(default_factory=list)
    diagnostics: list[StepDiagnostics] = field(default_factory=list)
    initial_mass: float = 0.0
    final: CellField | None = None

    def snapshot_at(self, t: float) -> list[FloatArray]:
        """Stored interiors at an exact snapshot time."""
        return self.snapshots[self.times.index(t)]


def _warn_on_setup(field: CellField, network: Network, config: SchemeConfig, dt: float) -> None:
    courant = dt * network.lambda_max / network.grid.dx
    if config.muscl and courant > 0.5:
        logger.warning(
            "MUSCL run with Courant number %.3f > 0.5; TVD bound does not apply", courant
        )
    values = np.concatenate(field.interiors())
    lo, hi = float(np.min(values)), float(np.max(values))
    samples = get_settings().wave_speed_samples
    checks = network.subcharacteristic_range(lo, hi, samples)
    for edge, ok in zip(network.edges, checks, strict=True):
        if not ok:
            logger.warning(
                "Edge %d violates the subcharacteristic condition on [%g, %g] with lambda=%g",
                edge.index,
                lo,
                hi,
                edge.lam,
            )


def run(
    initial: Sequence[Profile] | CellField,
    network: Network,
    config: SchemeConfig,
    t_end: float,
    snapshots: Sequence[float] = (),
    *,
    record: bool = True,
) -> RunResult:
    """March to t_end, storing snapshots and (optionally) per-step diagnostics."""
    if t_end < 0:
        msg = f"End time must be non-negative, got {t_end}"
        raise ConfigurationError(msg)
    state = initial.copy() if isinstance(initial, CellField) else CellField.from_profiles(
        network, initial
    )
    effective = equalized(network) if config.equalize_speeds else network
    dt = time_step(effective, config)
    dx = network.grid.dx
    _warn_on_setup(state, effective, config, dt)
    stops = sorted({s for s in snapshots if 0 <= s <= t_end} | {0.0, t_end})
    result = RunResult(network, initial_mass=total_mass(state, dx))
    result.times.append(0.0)
    result.snapshots.append([u.copy() for u in state.interiors()])
    logger.info(
        "Running %s/%s on %d-to-%d network: m=%d dt=%.3e t_end=%g",
        config.order,
        config.coupling,
        network.n_minus,
        network.n_plus,
        network.grid.m,
        dt,
        t_end,
    )
    n = 0
    try:
        for t_new, h, clipped in time_levels(t_end, dt, stops):
            n += 1
            outcome = advance(state, network, config, h)
            state = outcome.field
            if not state.is_finite():
                msg = f"Non-finite cell values at step {n} (t={t_new:.6g})"
                raise NumericalError(msg, step=n)
            if record:
                result.diagnostics.append(
                    StepDiagnostics(
                        step=n,
                        time=t_new,
                        dt=h,
                        total_mass=total_mass(state, dx),
                        node_residual=node_residual(outcome.node_fluxes, network),
                        tv=total_variation(state, network),
                        node_fluxes=tuple(float(f) for f in outcome.node_fluxes),
                        clipped=clipped,
                    )
                )
            if t_new in stops and t_new > 0:
                result.times.append(t_new)
                result.snapshots.append([u.copy() for u in state.interiors()])
    except NumericalError as e:
        if e.step is None:
            e.step = n
        result.final = state
        e.partial = result
        logger.error("Run aborted at step %d: %s", n, e)
        raise
    result.final = state
    logger.info("Finished after %d steps", n)
    return result


def line_padded(u: FloatArray, boundary: BoundaryCondition) -> FloatArray:
    """Copy of a single-line field with ghost cells filled for the boundary."""
    padded = np.empty(len(u) + 2 * GHOSTS)
    padded[GHOSTS:-GHOSTS] = u
    if boundary is BoundaryCondition.PERIODIC:
        padded[:GHOSTS] = u[-GHOSTS:]
        padded[-GHOSTS:] = u[:GHOSTS]
    else:
        padded[:GHOSTS] = u[0]
        padded[-GHOSTS:] = u[-1]
    return padded


def step_line(
    u: FloatArray,
    flux: FluxFunction,
    lam: float,
    dx: float,
    dt: float,
    order: SchemeOrder = SchemeOrder.FIRST,
    boundary: BoundaryCondition = BoundaryCondition.PERIODIC,
) -> FloatArray:
    """One step of the uncoupled relaxed scheme on a single segment."""
    check_cfl(dt, lam, dx)
    padded = line_padded(u, boundary)
    line_order = SchemeOrder.MUSCL if order is not SchemeOrder.FIRST else order
    faces = _edge_faces(padded, flux, lam, dx, line_order)
    if boundary is BoundaryCondition.ZERO_FLUX:
        faces[0] = faces[-1] = 0.0
    return _conservative_update(padded, faces, dt, dx)


@dataclass(frozen=True)
class LineResult:
    centers: FloatArray
    u: FloatArray
    steps: int


def run_line(
    profile: Profile,
    flux: FluxFunction,
    lam: float,
    grid: Grid,
    left: float,
    config: SchemeConfig,
    t_end: float,
    boundary: BoundaryCondition = BoundaryCondition.PERIODIC,
) -> LineResult:
    """Uncoupled run on [left, left + grid.length] with grid.m cells."""
    u = cell_averages(profile, grid, left)
    dt = config.fixed_dt if config.fixed_dt is not None else config.cfl * grid.dx / lam
    n = 0
    for _, h, _ in time_levels(t_end, dt):
        u = step_line(u, flux, lam, grid.dx, h, config.order, boundary)
        n += 1
        if not np.all(np.isfinite(u)):
            msg = f"Non-finite cell values at step {n}"
            raise NumericalError(msg, step=n)
    centers = left + (np.arange(grid.m) + 0.5) * grid.dx
    return LineResult(centers, u, n)
