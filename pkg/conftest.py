"""
Shared fixtures
"""
from math import pi

import numpy as np
import pytest

from pathid.core.model import InterferometerSpec, SourceSpec, balanced_spec
from pathid.utils.logger import setup_logger


@pytest.fixture(autouse=True, scope="session")
def quiet_logger():
    setup_logger("WARNING")


@pytest.fixture
def balanced_pi_pi() -> InterferometerSpec:
    return balanced_spec([pi, 0.0, pi])


@pytest.fixture
def measured_yields_spec() -> InterferometerSpec:
    return InterferometerSpec(sources=(
        SourceSpec(label="NL1", yield_rate=2200.0),
        SourceSpec(label="NL2", yield_rate=2000.0),
        SourceSpec(label="NL3", yield_rate=1800.0),
    ))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240517)


def random_spec(rng: np.random.Generator, n_sources: int, coherent: bool = False) -> InterferometerSpec:
    leak = np.zeros(n_sources) if coherent else rng.uniform(0.0, pi / 2, n_sources)
    return InterferometerSpec(sources=tuple(
        SourceSpec(label=f"S{k}", yield_rate=float(rng.uniform(0.0, 3000.0)),
                   phase=float(rng.uniform(-2 * pi, 2 * pi)), leak_angle=float(leak[k]))
        for k in range(n_sources)
    ))
