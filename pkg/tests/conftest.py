"""Shared test fixtures for netflux."""

from pathlib import Path
from typing import Any

import numpy as np
import pytest

from src.config import reset_settings
from src.network import BoundaryCondition, CellField, FluxFunction, Network
from src.presets import burgers_network, traffic_network


@pytest.fixture(autouse=True)
def _clean_settings() -> Any:
    """Reset cached settings before each test."""
    reset_settings()
    yield
    reset_settings()


@pytest.fixture()
def burgers_1to1() -> Network:
    """Periodic 1-to-1 Burgers network with 50 cells per edge."""
    return burgers_network(50)


@pytest.fixture()
def traffic_2to1() -> Network:
    """2-to-1 LWR merge with zero-flux inflow ends and 40 cells per edge."""
    return traffic_network(40)


@pytest.fixture()
def neumann_burgers() -> Network:
    """1-to-1 Burgers network with Neumann outer ends."""
    burgers = FluxFunction.burgers()
    return Network.build([burgers], [burgers], 1.0, 20, BoundaryCondition.NEUMANN)


@pytest.fixture()
def rng() -> np.random.Generator:
    """Seeded generator so random property checks are reproducible."""
    return np.random.default_rng(20240611)


@pytest.fixture()
def random_field(rng: np.random.Generator) -> Any:
    """Factory for CellFields with uniform random values in [lo, hi]."""

    def make(network: Network, lo: float = 0.0, hi: float = 1.0) -> CellField:
        return CellField.from_interiors(
            [rng.uniform(lo, hi, network.grid.m) for _ in network.edges]
        )

    return make


@pytest.fixture()
def output_dir(tmp_path: Path) -> Path:
    """Temporary output directory for run files."""
    out = tmp_path / "output"
    out.mkdir()
    return out
