"""Tests for junction Riemann solvers and condition builders."""

import logging
from collections.abc import Callable

import numpy as np
import pytest

from src.coupling import (
    ConditionRow,
    ConditionSet,
    CouplingTraces,
    CustomRows,
    IncomingProportional,
    OutgoingDistribution,
    assemble_coupling_system,
    build_incoming_proportional,
    build_outgoing_distribution,
    coupling_residuals,
    demand,
    flowmax_riemann_2to1,
    solve_coupling_1to1,
    solve_coupling_adjacent,
    solve_coupling_network,
    supply,
)
from src.errors import ConfigurationError, SingularCouplingError
from src.network import BoundaryCondition, FluxFunction, Network
from src.relaxation import LaxFamily, lax_curve_point


def _line(lam1: float, lam2: float) -> Network:
    flux = FluxFunction.burgers()
    return Network.build([flux], [flux], [lam1, lam2], 10, BoundaryCondition.NEUMANN)


def _junction(n_minus: int, n_plus: int, lam: float | list[float] = 1.0) -> Network:
    flux = FluxFunction.lwr(1.0)
    return Network.build([flux] * n_minus, [flux] * n_plus, lam, 10)


def _four_by_four(traces: CouplingTraces, lam1: float, lam2: float) -> np.ndarray:
    """(u_R, v_R, u_L, v_L) from two Lax-curve rows plus both Kirchhoff rows."""
    matrix = np.array(
        [
            [lam1, 1.0, 0.0, 0.0],
            [0.0, 0.0, -lam2, 1.0],
            [0.0, 1.0, 0.0, -1.0],
            [lam1**2, 0.0, -(lam2**2), 0.0],
        ]
    )
    rhs = np.array(
        [
            traces.v[0] + lam1 * traces.u[0],
            traces.v[1] - lam2 * traces.u[1],
            0.0,
            0.0,
        ]
    )
    return np.linalg.solve(matrix, rhs)


class TestExplicit1to1:
    """Tests for the closed-form 1-to-1 coupling data."""

    def test_continuity(self) -> None:
        traces = CouplingTraces.from_values([0.3, 0.3], [0.7, 0.7])
        data = solve_coupling_1to1(traces, 1.5, 1.5)
        assert np.allclose(data.u, 0.3, rtol=0, atol=1e-15)
        assert np.allclose(data.v, 0.7, rtol=0, atol=1e-15)

    @pytest.mark.parametrize(
        ("lam1", "lam2", "expected"),
        [
            (1.0, 1.0, (0.5, 0.5, 0.5, 0.5)),
            (1.0, 2.0, (2.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0)),
        ],
    )
    def test_examples(
        self, lam1: float, lam2: float, expected: tuple[float, float, float, float]
    ) -> None:
        traces = CouplingTraces.from_values([1.0, 0.0], [0.0, 0.0])
        data = solve_coupling_1to1(traces, lam1, lam2)
        got = (data.u[0], data.v[0], data.u[1], data.v[1])
        assert got == pytest.approx(expected, abs=1e-15)
        assert np.allclose(_four_by_four(traces, lam1, lam2), expected, atol=1e-14)
        assert lam1**2 * data.u[0] == pytest.approx(lam2**2 * data.u[1])

    def test_equalized_speeds_use_max(self) -> None:
        traces = CouplingTraces.from_values([1.0, 0.0], [0.0, 0.0])
        data = solve_coupling_1to1(traces, 1.0, 2.0, equalize=True)
        reference = solve_coupling_1to1(traces, 2.0, 2.0)
        assert np.array_equal(data.u, reference.u)
        assert data.u[0] == data.u[1]

    def test_rejects_wrong_arity(self) -> None:
        traces = CouplingTraces.from_values([1.0, 0.0, 0.0], [0.0, 0.0, 0.0])
        with pytest.raises(ConfigurationError):
            solve_coupling_1to1(traces, 1.0, 1.0)

    def test_agrees_with_linear_system_on_random_draws(self, rng: np.random.Generator) -> None:
        for _ in range(1000):
            lam1, lam2 = rng.uniform(0.5, 3.0, 2)
            traces = CouplingTraces.from_values(rng.uniform(-1, 1, 2), rng.uniform(-1, 1, 2))
            network = _line(float(lam1), float(lam2))
            explicit = solve_coupling_1to1(traces, float(lam1), float(lam2))
            general = solve_coupling_network(traces, network)
            assert np.allclose(explicit.u, general.u, rtol=1e-13, atol=1e-13)
            assert np.allclose(explicit.v, general.v, rtol=1e-13, atol=1e-13)
            residuals = coupling_residuals(traces, explicit, network)
            assert max(residuals.values()) <= 1e-12


class TestCouplingSystem:
    """Tests for assembling the junction system."""

    def test_1to1_matrix(self) -> None:
        traces = CouplingTraces.from_values([0.0, 0.0], [0.0, 0.0])
        system = assemble_coupling_system(traces, _line(1.0, 2.0))
        assert np.array_equal(system.matrix, [[-1.0, 2.0], [1.0, 4.0]])

    def test_rhs_carries_edge_signs(self) -> None:
        traces = CouplingTraces.from_values([0.5, 0.25], [0.1, 0.3])
        system = assemble_coupling_system(traces, _line(1.0, 2.0))
        assert system.rhs[0] == pytest.approx(-(-0.1 + 0.3))
        assert system.rhs[1] == pytest.approx(-(-1.0 * 0.5 + 4.0 * 0.25))

    def test_zero_incoming_traces_regularized(self) -> None:
        network = _junction(2, 1)
        traces = CouplingTraces.from_values([0.0, 0.0, 0.2], [0.0, 0.0, 0.16])
        conditions = ConditionSet((IncomingProportional(1e-12),))
        system = assemble_coupling_system(traces, network, conditions)
        assert system.matrix[2] == pytest.approx([1e-12, 0.0, 0.0])
        assert system.rhs[2] == 0.0
        data = solve_coupling_network(traces, network, conditions)
        assert data.v[0] == pytest.approx(0.0, abs=1e-12)

    def test_row_count_must_match(self) -> None:
        network = _junction(2, 1)
        traces = CouplingTraces.from_values([0.1, 0.1, 0.1], [0.09, 0.09, 0.09])
        with pytest.raises(ConfigurationError, match="condition rows"):
            assemble_coupling_system(traces, network, ConditionSet())

    def test_sigma_steps_follow_lax_families(self) -> None:
        network = _junction(2, 1, [1.0, 1.5, 2.0])
        traces = CouplingTraces.from_values([0.2, 0.4, 0.1], [0.16, 0.24, 0.09])
        system = assemble_coupling_system(traces, network)
        sigma = np.linalg.solve(system.matrix, system.rhs)
        data = solve_coupling_network(traces, network)
        for k, edge in enumerate(network.edges):
            family = LaxFamily.BACKWARD_MINUS if edge.incoming else LaxFamily.FORWARD_PLUS
            u, v = lax_curve_point(traces.u[k], traces.v[k], sigma[k], edge.lam, family)
            assert u == pytest.approx(data.u[k], abs=1e-13)
            assert v == pytest.approx(data.v[k], abs=1e-13)


class TestNetworkSolver:
    """Tests for N-edge coupling data."""

    def test_equal_traces_split_equally(self) -> None:
        network = _junction(2, 1)
        traces = CouplingTraces.from_values([0.3, 0.3, 0.1], [0.21, 0.21, 0.09])
        data = solve_coupling_network(traces, network)
        assert data.v[0] == pytest.approx(data.v[1], rel=1e-10)

    def test_kirchhoff_and_lax_residuals(self, rng: np.random.Generator) -> None:
        for n_minus, n_plus in [(2, 1), (1, 2), (2, 2), (3, 2)]:
            network = _junction(n_minus, n_plus, list(rng.uniform(0.8, 2.0, n_minus + n_plus)))
            u = rng.uniform(0.05, 0.95, n_minus + n_plus)
            traces = CouplingTraces.from_values(u, u * (1 - u))
            data = solve_coupling_network(traces, network)
            residuals = coupling_residuals(traces, data, network)
            assert residuals["psi1"] <= 1e-12
            assert residuals["psi2"] <= 1e-12
            assert residuals["lax"] <= 1e-12

    def test_incoming_ratios_follow_traces(self) -> None:
        network = _junction(2, 1)
        traces = CouplingTraces.from_values([0.25, 0.1, 0.3], [0.2, 0.1, 0.21])
        data = solve_coupling_network(traces, network)
        assert data.v[0] / data.v[1] == pytest.approx(2.0, rel=1e-10)

    @pytest.mark.parametrize(
        ("alpha", "expected_share"),
        [((0.5, 0.5), (0.5, 0.5)), ((1.0, 0.0), (1.0, 0.0))],
    )
    def test_outgoing_distribution(
        self, alpha: tuple[float, float], expected_share: tuple[float, float]
    ) -> None:
        network = _junction(1, 2)
        traces = CouplingTraces.from_values([0.4, 0.2, 0.1], [0.24, 0.16, 0.09])
        conditions = ConditionSet((OutgoingDistribution((alpha,)),))
        data = solve_coupling_network(traces, network, conditions)
        assert data.v[1] == pytest.approx(expected_share[0] * data.v[0], abs=1e-13)
        assert data.v[2] == pytest.approx(expected_share[1] * data.v[0], abs=1e-13)

    @pytest.mark.parametrize("beta", [(0.0, 0.0, 0.0), (0.3, 0.3, 0.0)])
    def test_rank_loss_names_condition_rows(self, beta: tuple[float, float, float]) -> None:
        network = _junction(2, 1)
        traces = CouplingTraces.from_values([0.2, 0.2, 0.2], [0.16, 0.16, 0.16])
        conditions = ConditionSet((CustomRows((ConditionRow(beta, 0.0),)),))
        with pytest.raises(SingularCouplingError) as excinfo:
            solve_coupling_network(traces, network, conditions)
        assert excinfo.value.rows == [1]

    def test_adjacent_data_uses_neighbour_cells(self) -> None:
        network = _line(1.0, 1.0)
        traces = CouplingTraces.from_values([0.8, 0.2], [0.32, 0.02])
        data = solve_coupling_adjacent(traces, network)
        assert list(data.u) == [0.2, 0.8]
        assert list(data.v) == pytest.approx([0.02, 0.32])


class TestConditionBuilders:
    """Tests for incoming-proportional and outgoing-distribution rows."""

    def test_incoming_proportional_rows(self) -> None:
        traces = CouplingTraces.from_values([0.0, 0.0, 0.0], [0.2, 0.1, 0.3])
        (row,) = build_incoming_proportional(traces, 2, eps_reg=0.0)
        assert row.beta == pytest.approx((0.1, -0.2, 0.0))
        assert row.r == 0.0

    def test_single_incoming_edge_emits_no_rows(self) -> None:
        traces = CouplingTraces.from_values([0.1, 0.1], [0.1, 0.1])
        assert build_incoming_proportional(traces, 1) == []

    def test_negative_trace_flux_warns(self, caplog: pytest.LogCaptureFixture) -> None:
        traces = CouplingTraces.from_values([0.0, 0.0, 0.0], [-0.2, 0.1, 0.3])
        with caplog.at_level(logging.WARNING):
            build_incoming_proportional(traces, 2)
        assert "Negative incoming trace flux" in caplog.text

    def test_negative_regularization_rejected(self) -> None:
        traces = CouplingTraces.from_values([0.0, 0.0, 0.0], [0.2, 0.1, 0.3])
        with pytest.raises(ConfigurationError):
            build_incoming_proportional(traces, 2, eps_reg=-1.0)

    def test_outgoing_rows(self) -> None:
        (row,) = build_outgoing_distribution([[0.25, 0.75]])
        assert row.beta == (0.25, -1.0, 0.0)
        assert row.r == 0.0

    def test_single_outgoing_edge_emits_no_rows(self) -> None:
        assert build_outgoing_distribution([[1.0], [1.0]]) == []

    @pytest.mark.parametrize("alpha", [[[0.5, 0.4]], [[1.2, -0.2]]])
    def test_invalid_rates_rejected(self, alpha: list[list[float]]) -> None:
        with pytest.raises(ConfigurationError):
            build_outgoing_distribution(alpha)

    def test_uniform_distribution(self) -> None:
        assert OutgoingDistribution.uniform(2, 4).alpha == ((0.25,) * 4,) * 2


class TestFlowMaximization:
    """Tests for demand, supply and the 2-to-1 flow-maximizing solver."""

    LWR = FluxFunction.lwr(1.0)
    OUT = FluxFunction.lwr(1.2)

    @pytest.mark.parametrize(
        ("fn", "flux", "u", "expected"),
        [
            (demand, FluxFunction.lwr(1.0), 0.07, 0.0651),
            (demand, FluxFunction.lwr(1.0), 0.6, 0.25),
            (supply, FluxFunction.lwr(1.2), 0.35, 0.3),
            (supply, FluxFunction.lwr(1.0), 0.8, 0.16),
        ],
    )
    def test_demand_supply(
        self, fn: Callable[[FluxFunction, float], float], flux: FluxFunction, u: float,
        expected: float,
    ) -> None:
        assert fn(flux, u) == pytest.approx(expected)

    def test_demand_needs_unimodal_flux(self) -> None:
        with pytest.raises(ConfigurationError):
            demand(FluxFunction.burgers(), 0.5)

    @pytest.mark.parametrize(
        ("u0", "beta", "expected"),
        [
            ((0.07, 0.15, 0.2), 0.5, (0.0651, 0.1275, 0.1926)),
            ((0.6, 0.35, 0.35), 0.5, (0.15, 0.15, 0.3)),
            ((0.6, 0.35, 0.35), 0.0, (0.0725, 0.2275, 0.3)),
        ],
    )
    def test_examples(
        self, u0: tuple[float, float, float], beta: float, expected: tuple[float, float, float]
    ) -> None:
        traces = CouplingTraces.from_values(u0, [0.0, 0.0, 0.0])
        result = flowmax_riemann_2to1(traces, beta, [self.LWR, self.LWR, self.OUT])
        assert result == pytest.approx(expected, abs=1e-14)

    def test_bounds_and_kirchhoff(self, rng: np.random.Generator) -> None:
        fluxes = [self.LWR, self.LWR, self.OUT]
        for _ in range(200):
            u = rng.uniform(0.0, 1.0, 3) * np.array([1.0, 1.0, 1.2])
            beta = float(rng.uniform())
            traces = CouplingTraces.from_values(u, [0.0, 0.0, 0.0])
            v1, v2, v3 = flowmax_riemann_2to1(traces, beta, fluxes)
            assert v1 <= demand(self.LWR, u[0]) + 1e-15
            assert v2 <= demand(self.LWR, u[1]) + 1e-15
            assert v3 <= supply(self.OUT, u[2]) + 1e-15
            assert v1 + v2 == pytest.approx(v3, abs=1e-15)

    def test_rejects_invalid_beta(self) -> None:
        traces = CouplingTraces.from_values([0.1, 0.1, 0.1], [0.0, 0.0, 0.0])
        with pytest.raises(ConfigurationError):
            flowmax_riemann_2to1(traces, 1.5, [self.LWR, self.LWR, self.OUT])
