"""Junction Riemann solvers: explicit 1-to-1 data, linear N-edge systems, flow maximization."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SingularCouplingError
from .network import CellField, FloatArray, FluxFunction, Network

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CouplingTraces:
    """Junction-side (u0, v0) per edge, ordered like the network edges."""

    u: FloatArray
    v: FloatArray

    @classmethod
    def from_values(cls, u: Sequence[float], v: Sequence[float]) -> CouplingTraces:
        """Traces from plain sequences."""
        return cls(np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64))

    @classmethod
    def from_field(cls, field: CellField, network: Network) -> CouplingTraces:
        """Limit-scheme traces: junction-adjacent averages with v0 = f(u0)."""
        u = np.array(
            [
                field.interior(k)[-1] if edge.incoming else field.interior(k)[0]
                for k, edge in enumerate(network.edges)
            ]
        )
        v = np.array([edge.flux(float(u[k])) for k, edge in enumerate(network.edges)])
        return cls(u, v)

    def __len__(self) -> int:
        return len(self.u)


@dataclass(frozen=True)
class CouplingData:
    """(u_R, v_R) on incoming edges and (u_L, v_L) on outgoing edges."""

    u: FloatArray
    v: FloatArray


@dataclass(frozen=True)
class ConditionRow:
    """One algebraic condition sum_k beta_k v_c^k = r on the coupling fluxes."""

    beta: tuple[float, ...]
    r: float = 0.0


@dataclass(frozen=True)
class IncomingProportional:
    """Incoming fluxes keep the ratios of their traces (regularized by eps_reg)."""

    eps_reg: float = 1e-12

    def rows(self, traces: CouplingTraces, n_minus: int) -> list[ConditionRow]:
        return build_incoming_proportional(traces, n_minus, self.eps_reg)


@dataclass(frozen=True)
class OutgoingDistribution:
    """Rates alpha[k][m]: share of incoming edge k routed to outgoing edge m."""

    alpha: tuple[tuple[float, ...], ...]

    @classmethod
    def uniform(cls, n_minus: int, n_plus: int) -> OutgoingDistribution:
        """Every incoming edge splits its flux evenly over the outgoing edges."""
        return cls(tuple((1.0 / n_plus,) * n_plus for _ in range(n_minus)))

    def rows(self, traces: CouplingTraces, n_minus: int) -> list[ConditionRow]:
        return build_outgoing_distribution(self.alpha)


@dataclass(frozen=True)
class CustomRows:
    fixed: tuple[ConditionRow, ...]

    def rows(self, traces: CouplingTraces, n_minus: int) -> list[ConditionRow]:
        return list(self.fixed)


ConditionBuilder = IncomingProportional | OutgoingDistribution | CustomRows


@dataclass(frozen=True)
class ConditionSet:
    """The N-2 additional junction conditions, expanded from their builders per step."""

    builders: tuple[ConditionBuilder, ...] = field(default_factory=tuple)

    @classmethod
    def standard(
        cls, n_minus: int, n_plus: int, eps_reg: float = 1e-12
    ) -> ConditionSet:
        """Incoming proportionality plus a uniform outgoing split."""
        return cls(
            (IncomingProportional(eps_reg), OutgoingDistribution.uniform(n_minus, n_plus))
        )

    def expand(self, traces: CouplingTraces, n_minus: int) -> list[ConditionRow]:
        """Rows of all builders for the current traces, in builder order."""
        rows: list[ConditionRow] = []
        for builder in self.builders:
            rows.extend(builder.rows(traces, n_minus))
        return rows


@dataclass(frozen=True)
class CouplingSystem:
    """Matrix A and right-hand side b of the junction sigma-system."""

    matrix: FloatArray
    rhs: FloatArray
    signs: FloatArray
    lambdas: FloatArray


def solve_coupling_1to1(
    traces: CouplingTraces, lambda1: float, lambda2: float, *, equalize: bool = False
) -> CouplingData:
    """Closed-form coupling data for one incoming and one outgoing edge.

    With ``equalize`` both sides use max(lambda1, lambda2), which gives the
    simpler equal-speed data at the price of extra numerical diffusion.
    """
    if len(traces) != 2:
        msg = f"Explicit 1-to-1 coupling needs 2 traces, got {len(traces)}"
        raise ConfigurationError(msg)
    if equalize:
        lambda1 = lambda2 = max(lambda1, lambda2)
    u_r, v_r, u_l, v_l = explicit_1to1(
        float(traces.u[0]), float(traces.v[0]), float(traces.u[1]), float(traces.v[1]),
        lambda1, lambda2,
    )
    return CouplingData(np.array([u_r, u_l]), np.array([v_r, v_l]))


def explicit_1to1(
    u_minus: float,
    v_minus: float,
    u_plus: float,
    v_plus: float,
    lambda1: float,
    lambda2: float,
) -> tuple[float, float, float, float]:
    """Return (u_R, v_R, u_L, v_L) from the two junction traces."""
    if lambda1 == lambda2:
        lam = lambda1
        u_c = 0.5 * (u_minus + u_plus) + (v_minus - v_plus) / (2.0 * lam)
        v_c = 0.5 * (v_minus + v_plus) + 0.5 * lam * (u_minus - u_plus)
        return u_c, v_c, u_c, v_c
    total = lambda1 + lambda2
    numerator = lambda1 * u_minus + lambda2 * u_plus + v_minus - v_plus
    u_r = (lambda2 / lambda1) * numerator / total
    u_l = (lambda1 / lambda2) * numerator / total
    v_c = (
        lambda1 * v_minus + lambda2 * v_plus + lambda1**2 * u_minus - lambda2**2 * u_plus
    ) / total
    return u_r, v_c, u_l, v_c


def build_incoming_proportional(
    traces: CouplingTraces, n_minus: int, eps_reg: float = 1e-12
) -> list[ConditionRow]:
    """Rows keeping v_R^l / sum(v_R) equal to v0^l / sum(v0) for l < N-."""
    if eps_reg < 0:
        msg = f"Regularization must be non-negative, got {eps_reg}"
        raise ConfigurationError(msg)
    v0 = traces.v
    if np.any(v0[:n_minus] < 0):
        logger.warning("Negative incoming trace flux %s; proportional split undefined", v0)
    n = len(traces)
    rows = []
    for ell in range(n_minus - 1):
        beta = [0.0] * n
        for k in range(n_minus):
            beta[k] = -float(v0[ell])
        beta[ell] = float(np.sum(v0[:n_minus]) - v0[ell]) + eps_reg
        rows.append(ConditionRow(tuple(beta), eps_reg * float(v0[ell])))
    return rows


def build_outgoing_distribution(alpha: Sequence[Sequence[float]]) -> list[ConditionRow]:
    """Rows routing incoming flux to all but the last outgoing edge by rate alpha."""
    rates = np.asarray(alpha, dtype=np.float64)
    if rates.ndim != 2 or rates.size == 0:
        msg = "Distribution matrix must have one row per incoming edge"
        raise ConfigurationError(msg)
    if np.any(rates < 0) or np.any(rates > 1):
        msg = "Distribution rates must lie in [0, 1]"
        raise ConfigurationError(msg)
    if not np.allclose(rates.sum(axis=1), 1.0, rtol=0.0, atol=1e-12):
        msg = f"Distribution rates of each incoming edge must sum to 1, got {rates.sum(axis=1)}"
        raise ConfigurationError(msg)
    n_minus, n_plus = rates.shape
    rows = []
    for m in range(n_plus - 1):
        beta = [0.0] * (n_minus + n_plus)
        beta[:n_minus] = rates[:, m].tolist()
        beta[n_minus + m] = -1.0
        rows.append(ConditionRow(tuple(beta), 0.0))
    return rows


def _resolve_rows(
    traces: CouplingTraces, network: Network, conditions: ConditionSet | None
) -> list[ConditionRow]:
    chosen = conditions or network.conditions
    if chosen is None:
        chosen = ConditionSet.standard(network.n_minus, network.n_plus)
    rows = chosen.expand(traces, network.n_minus)
    if len(rows) != network.n_edges - 2:
        msg = f"Junction needs {network.n_edges - 2} condition rows, got {len(rows)}"
        raise ConfigurationError(msg)
    return rows


def assemble_coupling_system(
    traces: CouplingTraces, network: Network, conditions: ConditionSet | None = None
) -> CouplingSystem:
    """Linear system for the node values v from the Lax curves and the coupling rows."""
    rows = _resolve_rows(traces, network, conditions)
    signs = network.signs
    lambdas = network.lambdas
    n = network.n_edges
    matrix = np.empty((n, n))
    rhs = np.empty(n)
    matrix[0] = signs * lambdas
    matrix[1] = lambdas**2
    rhs[0] = -np.sum(signs * traces.v)
    rhs[1] = -np.sum(signs * lambdas**2 * traces.u)
    for ell, row in enumerate(rows, start=2):
        beta = np.asarray(row.beta, dtype=np.float64)
        matrix[ell] = beta * lambdas
        rhs[ell] = row.r - np.sum(beta * traces.v)
    return CouplingSystem(matrix, rhs, signs, lambdas)


def _row_scales(matrix: FloatArray) -> FloatArray:
    """Row infinity norms, with zero rows left unscaled."""
    scales = np.max(np.abs(matrix), axis=1)
    return np.where(scales > 0, scales, 1.0)


def gauss_solve(matrix: FloatArray, rhs: FloatArray) -> FloatArray:
    """Gaussian elimination with scaled row pivoting; raises on a vanishing pivot.

    Rows are equilibrated first so a condition row with tiny coefficients
    (a regularized proportional split over zero traces) keeps its rank.
    """
    scales = _row_scales(matrix)
    a = matrix.astype(np.float64, copy=True) / scales[:, None]
    b = rhs.astype(np.float64, copy=True) / scales
    n = len(b)
    tol = RANK_TOLERANCE * max(float(np.max(np.sum(np.abs(a), axis=1))), 1e-300)
    for k in range(n):
        p = int(np.argmax(np.abs(a[k:, k]))) + k
        if abs(a[p, k]) <= tol:
            rows = dependent_rows(matrix)
            msg = f"Coupling system is singular (pivot column {k}); dependent condition rows {rows}"
            raise SingularCouplingError(msg, rows)
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= factors[:, None] * a[k, k:]
        b[k + 1 :] -= factors * b[k]
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


def dependent_rows(matrix: FloatArray) -> list[int]:
    """1-based numbers of condition rows that add no rank after the Kirchhoff rows."""
    scaled = matrix / _row_scales(matrix)[:, None]
    tol = RANK_TOLERANCE * max(float(np.max(np.sum(np.abs(scaled), axis=1))), 1e-300)
    kept = [scaled[0], scaled[1]]
    offenders = []
    rank = int(np.linalg.matrix_rank(np.array(kept), tol=tol))
    for ell in range(2, scaled.shape[0]):
        trial = int(np.linalg.matrix_rank(np.array([*kept, scaled[ell]]), tol=tol))
        if trial > rank:
            kept.append(scaled[ell])
            rank = trial
        else:
            offenders.append(ell - 1)
    return offenders


def solve_coupling_network(
    traces: CouplingTraces, network: Network, conditions: ConditionSet | None = None
) -> CouplingData:
    """Coupling data for N edges from the linear junction system."""
    system = assemble_coupling_system(traces, network, conditions)
    sigma = gauss_solve(system.matrix, system.rhs)
    return CouplingData(traces.u + system.signs * sigma, traces.v + system.lambdas * sigma)


def solve_coupling_adjacent(traces: CouplingTraces, network: Network) -> CouplingData:
    """Non-conservative comparison data: each side sees the neighbour's average."""
    if network.n_edges != 2:
        msg = "Adjacent-cell coupling is only defined on 1-to-1 networks"
        raise ConfigurationError(msg)
    u_minus, u_plus = float(traces.u[0]), float(traces.u[1])
    f_in, f_out = network.edges[0].flux, network.edges[1].flux
    return CouplingData(
        np.array([u_plus, u_minus]), np.array([f_in(u_plus), f_out(u_minus)])
    )


def coupling_residuals(
    traces: CouplingTraces, data: CouplingData, network: Network
) -> dict[str, float]:
    """Scaled residuals of the Lax-curve, Kirchhoff and lambda^2-mass conditions."""
    signs, lambdas = network.signs, network.lambdas
    invariant = traces.v - signs * lambdas * traces.u
    scale = np.maximum(1.0, np.abs(traces.v) + lambdas * np.abs(traces.u))
    lax = np.abs(data.v - signs * lambdas * data.u - invariant) / scale
    incoming = signs < 0
    psi1 = np.sum(data.v[incoming]) - np.sum(data.v[~incoming])
    mass = lambdas**2 * data.u
    psi2 = np.sum(mass[incoming]) - np.sum(mass[~incoming])
    return {
        "lax": float(np.max(lax)),
        "psi1": abs(float(psi1)) / max(1.0, float(np.sum(np.abs(data.v)))),
        "psi2": abs(float(psi2)) / max(1.0, float(np.sum(np.abs(mass)))),
    }


def demand(flux: FluxFunction, u: float) -> float:
    """Largest flux an edge can send into the junction."""
    critical = flux.critical_density
    return float(flux(u)) if u <= critical else float(flux(critical))


def supply(flux: FluxFunction, u: float) -> float:
    """Largest flux an edge can receive from the junction."""
    critical = flux.critical_density
    return float(flux(critical)) if u <= critical else float(flux(u))


def flowmax_riemann_2to1(
    traces: CouplingTraces, beta: float, fluxes: Sequence[FluxFunction]
) -> tuple[float, float, float]:
    """Flow-maximizing fluxes (v_R^1, v_R^2, v_L^3) with right-of-way beta."""
    if len(traces) != 3 or len(fluxes) != 3:
        msg = "Flow maximization is implemented for 2-to-1 junctions only"
        raise ConfigurationError(msg)
    if not 0.0 <= beta <= 1.0:
        msg = f"Right-of-way parameter must lie in [0, 1], got {beta}"
        raise ConfigurationError(msg)
    d1 = demand(fluxes[0], float(traces.u[0]))
    d2 = demand(fluxes[1], float(traces.u[1]))
    s3 = supply(fluxes[2], float(traces.u[2]))
    if d1 + d2 <= s3:
        return d1, d2, d1 + d2
    v1, v2 = beta * s3, (1.0 - beta) * s3
    if v1 > d1:
        v1, v2 = d1, s3 - d1
    elif v2 > d2:
        v1, v2 = s3 - d2, d2
    return v1, v2, s3
