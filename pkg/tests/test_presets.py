"""Tests for experiment presets."""

import numpy as np
import pytest

from src.config import CouplingMode, SchemeOrder, parse_config
from src.coupling import IncomingProportional, OutgoingDistribution
from src.errors import ConfigurationError
from src.network import BoundaryCondition, CellField
from src.presets import (
    TRAFFIC_CONGESTION_STATES,
    build_experiment,
    buckley_leverett_network,
    burgers_network,
    step_profile,
    traffic_network,
)


class TestNetworks:
    """Tests for the preset network builders."""

    def test_burgers_network(self) -> None:
        network = burgers_network(20)
        assert network.n_minus == network.n_plus == 1
        assert network.periodic
        assert network.grid.dx == pytest.approx(0.05)

    def test_traffic_network(self) -> None:
        network = traffic_network(20)
        assert (network.n_minus, network.n_plus) == (2, 1)
        assert network.boundary == (
            BoundaryCondition.ZERO_FLUX,
            BoundaryCondition.ZERO_FLUX,
            BoundaryCondition.NEUMANN,
        )
        assert network.edges[2].flux.critical_density == pytest.approx(0.6)
        assert network.conditions is not None
        assert network.conditions.builders == (IncomingProportional(0.0),)

    def test_buckley_leverett_network(self) -> None:
        network = buckley_leverett_network(30)
        assert list(network.lambdas) == [2.5, 2.5, 2.5]
        assert network.conditions is not None
        assert isinstance(network.conditions.builders[1], OutgoingDistribution)

    def test_step_profile(self) -> None:
        profile = step_profile(0.5, 1.0, 0.0)
        assert list(profile(np.array([0.25, 0.5, 0.75]))) == [1.0, 1.0, 0.0]


class TestBuildExperiment:
    """Tests for turning run configs into experiments."""

    def test_burgers(self) -> None:
        experiment = build_experiment(parse_config(m=20))
        assert experiment.scheme.cfl == 0.9
        assert experiment.t_end == 0.75
        assert experiment.snapshots == [0.2, 0.5, 0.75]

    def test_traffic_congestion(self) -> None:
        config = parse_config(preset="traffic-congestion", m=20, t_end=0.5, beta=0.2)
        experiment = build_experiment(config)
        assert experiment.scheme.cfl == 0.2
        assert experiment.scheme.right_of_way == 0.2
        assert experiment.initial == list(TRAFFIC_CONGESTION_STATES)

    def test_flowmax_scheme(self) -> None:
        config = parse_config(preset="traffic-free-flow", m=20, t_end=1.0, coupling="flowmax")
        assert build_experiment(config).scheme.coupling is CouplingMode.FLOWMAX

    def test_buckley_leverett_initial_data(self) -> None:
        experiment = build_experiment(parse_config(preset="buckley-leverett", m=40, t_end=0.3))
        assert experiment.scheme.order is SchemeOrder.MUSCL
        field = CellField.from_profiles(experiment.network, experiment.initial)
        first, second, third = field.interiors()
        assert first[0] == pytest.approx(1.0)
        assert first[-1] == 0.0
        assert np.all(second == 0.16)
        assert np.all(third == 0.0)

    @pytest.mark.parametrize(
        ("preset", "suggestion"),
        [("traffic-free-flow", "0.5"), ("traffic-congestion", "0.5"), ("buckley-leverett", "0.3")],
    )
    def test_end_time_required(self, preset: str, suggestion: str) -> None:
        with pytest.raises(ConfigurationError, match=f"suggested: {suggestion}"):
            build_experiment(parse_config(preset=preset))

    def test_buckley_leverett_uses_run_regularization(self) -> None:
        config = parse_config(preset="buckley-leverett", m=20, t_end=0.3, eps_reg=1e-9)
        conditions = build_experiment(config).network.conditions
        assert conditions is not None
        assert conditions.builders[0] == IncomingProportional(1e-9)

    def test_buckley_leverett_falls_back_to_settings(
        self, monkeypatch: pytest.MonkeyPatch
    ) -> None:
        monkeypatch.setenv("EPS_REG", "1e-10")
        config = parse_config(preset="buckley-leverett", m=20, t_end=0.3)
        conditions = build_experiment(config).network.conditions
        assert conditions is not None
        assert conditions.builders[0] == IncomingProportional(1e-10)

    def test_convergence_preset_is_not_a_single_run(self) -> None:
        with pytest.raises(ConfigurationError, match="convergence"):
            build_experiment(parse_config(preset="burgers-convergence"))

    def test_custom_network(self) -> None:
        config = parse_config(
            preset="custom",
            incoming=[{"kind": "lwr"}],
            outgoing=[{"kind": "lwr"}, {"kind": "lwr", "u_max": 2.0}],
            initial=[{"at": -0.5, "left": 0.4, "right": 0.2}, 0.1, 0.0],
            alpha=[[0.3, 0.7]],
            t_end=0.1,
            m=10,
            lam=[1.0, 1.0, 1.0],
            boundary=["zero-flux", "neumann", "neumann"],
        )
        experiment = build_experiment(config)
        network = experiment.network
        assert (network.n_minus, network.n_plus) == (1, 2)
        assert network.boundary[0] is BoundaryCondition.ZERO_FLUX
        assert network.conditions is not None
        assert network.conditions.builders[1] == OutgoingDistribution(((0.3, 0.7),))
        field = CellField.from_profiles(network, experiment.initial)
        assert field.interior(0)[0] == pytest.approx(0.4)
        assert field.interior(0)[-1] == pytest.approx(0.2)

    def test_custom_flux_kind_rejected(self) -> None:
        config = parse_config(
            preset="custom",
            incoming=[{"kind": "custom"}],
            outgoing=[{"kind": "burgers"}],
            initial=[0.1, 0.1],
            t_end=0.1,
            m=10,
            lam=1.0,
        )
        with pytest.raises(ConfigurationError, match="callables"):
            build_experiment(config)
