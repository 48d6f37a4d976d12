"""Star-network topology, flux functions, grids and cell fields."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING, TypeVar

import numpy as np
import numpy.typing as npt

from .errors import ConfigurationError

if TYPE_CHECKING:
    from .coupling import ConditionSet

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
Real = TypeVar("Real", float, FloatArray)
Profile = float | Callable[[FloatArray], FloatArray]

GHOSTS = 2
GAUSS_POINTS = 5


class FluxKind(StrEnum):
    BURGERS = "burgers"
    LWR = "lwr"
    BUCKLEY_LEVERETT = "buckley-leverett"
    CUSTOM = "custom"


@dataclass(frozen=True)
class FluxFunction:
    """Scalar flux f(u) with its derivative, vectorised over numpy arrays."""

    kind: FluxKind
    u_max: float = 1.0
    evaluator: Callable[[FloatArray], FloatArray] | None = None
    derivative_evaluator: Callable[[FloatArray], FloatArray] | None = field(
        default=None, compare=False
    )
    critical: float | None = None

    @classmethod
    def burgers(cls) -> FluxFunction:
        """f(u) = u^2 / 2."""
        return cls(FluxKind.BURGERS)

    @classmethod
    def lwr(cls, u_max: float = 1.0) -> FluxFunction:
        """Traffic flux u(1 - u / u_max)."""
        if u_max <= 0:
            msg = f"LWR maximal density must be positive, got {u_max}"
            raise ConfigurationError(msg)
        return cls(FluxKind.LWR, u_max=u_max)

    @classmethod
    def buckley_leverett(cls) -> FluxFunction:
        """Two-phase flux u^2 / (u^2 + (1 - u)^2 / 2)."""
        return cls(FluxKind.BUCKLEY_LEVERETT)

    @classmethod
    def custom(
        cls,
        evaluator: Callable[[FloatArray], FloatArray],
        derivative: Callable[[FloatArray], FloatArray],
        critical: float | None = None,
    ) -> FluxFunction:
        """Wrap user callables; `critical` marks the maximizer of a concave flux."""
        return cls(
            FluxKind.CUSTOM,
            evaluator=evaluator,
            derivative_evaluator=derivative,
            critical=critical,
        )

    def __call__(self, u: Real) -> Real:
        if self.kind is FluxKind.BURGERS:
            return 0.5 * u * u
        if self.kind is FluxKind.LWR:
            return u * (1.0 - u / self.u_max)
        if self.kind is FluxKind.BUCKLEY_LEVERETT:
            u2 = u * u
            return u2 / (u2 + 0.5 * (1.0 - u) * (1.0 - u))
        assert self.evaluator is not None
        return self.evaluator(u)  # type: ignore[arg-type, return-value]

    def derivative(self, u: Real) -> Real:
        """Exact f'(u)."""
        if self.kind is FluxKind.BURGERS:
            return u * 1.0
        if self.kind is FluxKind.LWR:
            return 1.0 - 2.0 * u / self.u_max
        if self.kind is FluxKind.BUCKLEY_LEVERETT:
            denom = u * u + 0.5 * (1.0 - u) * (1.0 - u)
            return u * (1.0 - u) / (denom * denom)
        assert self.derivative_evaluator is not None
        return self.derivative_evaluator(u)  # type: ignore[arg-type, return-value]

    @property
    def critical_density(self) -> float:
        """Maximizer of a concave unimodal flux (demand/supply split point)."""
        if self.kind is FluxKind.LWR:
            return 0.5 * self.u_max
        if self.kind is FluxKind.CUSTOM and self.critical is not None:
            return self.critical
        msg = f"Flux '{self.kind}' is not concave with a unique maximizer"
        raise ConfigurationError(msg)


def eval_flux(flux: FluxFunction, u: float) -> float:
    """Evaluate f(u) for a single state."""
    return float(flux(float(u)))


def max_wave_speed(flux: FluxFunction, u_lo: float, u_hi: float, n_samples: int) -> float:
    """Largest |f'(u)| over uniform samples of [u_lo, u_hi]."""
    if u_lo > u_hi or n_samples < 2:
        msg = f"Invalid sampling range [{u_lo}, {u_hi}] with {n_samples} samples"
        raise ConfigurationError(msg)
    samples = np.linspace(u_lo, u_hi, n_samples)
    return float(np.max(np.abs(flux.derivative(samples))))


def derivative_mismatch(flux: FluxFunction, points: FloatArray, h: float = 1e-6) -> float:
    """Worst scaled gap between f' and a central difference of f."""
    fd = (flux(points + h) - flux(points - h)) / (2.0 * h)
    exact = flux.derivative(points)
    return float(np.max(np.abs(fd - exact) / np.maximum(1.0, np.abs(exact))))


class EdgeOrientation(StrEnum):
    INCOMING = "incoming"
    OUTGOING = "outgoing"


class BoundaryCondition(StrEnum):
    PERIODIC = "periodic"
    ZERO_FLUX = "zero-flux"
    NEUMANN = "neumann"


@dataclass(frozen=True)
class Edge:
    index: int
    orientation: EdgeOrientation
    flux: FluxFunction
    lam: float
    length: float = 1.0

    def __post_init__(self) -> None:
        if self.lam <= 0:
            msg = f"Relaxation speed of edge {self.index} must be positive, got {self.lam}"
            raise ConfigurationError(msg)

    @property
    def sign(self) -> int:
        """-1 on incoming edges, +1 on outgoing ones."""
        return -1 if self.orientation is EdgeOrientation.INCOMING else 1

    @property
    def incoming(self) -> bool:
        return self.orientation is EdgeOrientation.INCOMING

    @property
    def domain(self) -> tuple[float, float]:
        """Edge interval with the node at x = 0."""
        return (-self.length, 0.0) if self.incoming else (0.0, self.length)


@dataclass(frozen=True)
class Grid:
    m: int
    length: float = 1.0

    def __post_init__(self) -> None:
        if self.m < 2:
            msg = f"Each edge needs at least 2 cells, got m={self.m}"
            raise ConfigurationError(msg)

    @property
    def dx(self) -> float:
        return self.length / self.m

    def centers(self, edge: Edge) -> FloatArray:
        """Cell centers of an edge in its own coordinate."""
        left = edge.domain[0]
        return left + (np.arange(self.m, dtype=np.float64) + 0.5) * self.dx


def cell_averages(profile: Profile, grid: Grid, left: float) -> FloatArray:
    """Cell averages of a profile by 5-point Gauss-Legendre quadrature."""
    if not callable(profile):
        return np.full(grid.m, float(profile))
    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    lower = left + np.arange(grid.m, dtype=np.float64) * grid.dx
    points = lower[:, None] + 0.5 * grid.dx * (nodes[None, :] + 1.0)
    values = np.asarray(profile(points), dtype=np.float64)
    return np.asarray(0.5 * (values @ weights), dtype=np.float64)


@dataclass(frozen=True)
class Network:
    """A single junction with incoming edges listed before outgoing ones."""

    edges: tuple[Edge, ...]
    grid: Grid
    boundary: tuple[BoundaryCondition, ...]
    conditions: ConditionSet | None = None

    def __post_init__(self) -> None:
        n_minus = sum(1 for e in self.edges if e.incoming)
        n_plus = len(self.edges) - n_minus
        if n_minus < 1 or n_plus < 1:
            msg = f"A junction needs incoming and outgoing edges, got {n_minus}-to-{n_plus}"
            raise ConfigurationError(msg)
        for position, edge in enumerate(self.edges):
            if edge.index != position + 1 or edge.incoming != (position < n_minus):
                msg = "Edges must be indexed 1..N with all incoming edges first"
                raise ConfigurationError(msg)
        if len(self.boundary) != len(self.edges):
            msg = f"Expected {len(self.edges)} boundary conditions, got {len(self.boundary)}"
            raise ConfigurationError(msg)
        periodic = [bc is BoundaryCondition.PERIODIC for bc in self.boundary]
        if any(periodic) and (len(self.edges) != 2 or not all(periodic)):
            msg = "Periodic boundaries are only valid on 1-to-1 networks (both ends)"
            raise ConfigurationError(msg)

    @classmethod
    def build(
        cls,
        incoming: Sequence[FluxFunction],
        outgoing: Sequence[FluxFunction],
        lam: float | Sequence[float],
        m: int,
        boundary: BoundaryCondition | Sequence[BoundaryCondition] = BoundaryCondition.NEUMANN,
        conditions: ConditionSet | None = None,
        length: float = 1.0,
    ) -> Network:
        """Star network with the incoming edges first; a scalar lam applies to every edge."""
        fluxes = [*incoming, *outgoing]
        speeds = [float(lam)] * len(fluxes) if isinstance(lam, int | float) else list(lam)
        if len(speeds) != len(fluxes):
            msg = f"Expected {len(fluxes)} relaxation speeds, got {len(speeds)}"
            raise ConfigurationError(msg)
        edges = tuple(
            Edge(
                index=k + 1,
                orientation=(
                    EdgeOrientation.INCOMING if k < len(incoming) else EdgeOrientation.OUTGOING
                ),
                flux=flux,
                lam=speed,
                length=length,
            )
            for k, (flux, speed) in enumerate(zip(fluxes, speeds, strict=True))
        )
        bcs = (
            (boundary,) * len(edges)
            if isinstance(boundary, BoundaryCondition)
            else tuple(boundary)
        )
        return cls(edges=edges, grid=Grid(m, length), boundary=bcs, conditions=conditions)

    @property
    def n_minus(self) -> int:
        return sum(1 for e in self.edges if e.incoming)

    @property
    def n_plus(self) -> int:
        return len(self.edges) - self.n_minus

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def lambdas(self) -> FloatArray:
        return np.array([e.lam for e in self.edges], dtype=np.float64)

    @property
    def signs(self) -> FloatArray:
        return np.array([e.sign for e in self.edges], dtype=np.float64)

    @property
    def lambda_max(self) -> float:
        return max(e.lam for e in self.edges)

    @property
    def periodic(self) -> bool:
        return self.boundary[0] is BoundaryCondition.PERIODIC

    @property
    def uniform_flux(self) -> bool:
        first = self.edges[0].flux
        return all(e.flux == first for e in self.edges)

    def subcharacteristic_range(self, u_lo: float, u_hi: float, n_samples: int) -> list[bool]:
        """Per edge, whether lambda bounds |f'| on [u_lo, u_hi]."""
        return [max_wave_speed(e.flux, u_lo, u_hi, n_samples) <= e.lam for e in self.edges]


@dataclass
class CellField:
    """Per-edge cell averages, padded with GHOSTS cells at both ends."""

    data: list[FloatArray]

    @classmethod
    def zeros(cls, network: Network) -> CellField:
        """Ghost-padded zero field for every edge."""
        size = network.grid.m + 2 * GHOSTS
        return cls([np.zeros(size) for _ in network.edges])

    @classmethod
    def from_profiles(cls, network: Network, profiles: Sequence[Profile]) -> CellField:
        """Cell averages of one profile or constant per edge."""
        if len(profiles) != network.n_edges:
            msg = f"Expected {network.n_edges} initial profiles, got {len(profiles)}"
            raise ConfigurationError(msg)
        result = cls.zeros(network)
        for k, (edge, profile) in enumerate(zip(network.edges, profiles, strict=True)):
            result.data[k][GHOSTS:-GHOSTS] = cell_averages(profile, network.grid, edge.domain[0])
        return result

    @classmethod
    def from_interiors(cls, interiors: Sequence[FloatArray]) -> CellField:
        """Pad interior arrays with zero ghost cells."""
        data = []
        for values in interiors:
            padded = np.zeros(len(values) + 2 * GHOSTS)
            padded[GHOSTS:-GHOSTS] = values
            data.append(padded)
        return cls(data)

    def interior(self, k: int) -> FloatArray:
        """View of edge k without ghost cells."""
        return self.data[k][GHOSTS:-GHOSTS]

    def interiors(self) -> list[FloatArray]:
        return [self.interior(k) for k in range(len(self.data))]

    def copy(self) -> CellField:
        return CellField([d.copy() for d in self.data])

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(self.interior(k)))) for k in range(len(self.data)))


def apply_outer_boundary(field: CellField, network: Network) -> CellField:
    """Return a copy with the outer ghost cells of every edge filled.

    Zero-flux ends get Neumann ghosts; the scheme then sets the outer face
    flux to exactly zero.
    """
    result = field.copy()
    g = GHOSTS
    if network.periodic:
        left, right = result.data
        left[:g] = right[-2 * g : -g]
        right[-g:] = left[g : 2 * g]
        return result
    for edge, values in zip(network.edges, result.data, strict=True):
        if edge.incoming:
            values[:g] = values[g]
        else:
            values[-g:] = values[-g - 1]
    return result
