"""
Shared fixtures: bundled configurations and parameter factories.
"""
from pathlib import Path

import numpy as np
import pytest

from models.config import ConfigLoader, RunConfig
from models.saiqh import SaiqhParams, State

ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = ROOT / "config"

ZERO_RATES = dict(
    Lambda=0.0, omega=0.0, n=0.0, phi=0.0, p=0.0, gamma=0.0, q=0.0, nu=0.0,
    delta1=0.0, delta2=0.0, f1=0.0, f2=0.0, f3=0.0, eta=0.0, k=0.0,
    alpha1=0.0, alpha2=0.0, beta=1.0, lA=1.0, lH=1.0,
)


@pytest.fixture
def loader() -> ConfigLoader:
    return ConfigLoader(str(CONFIG_DIR))


@pytest.fixture
def example_config(loader) -> RunConfig:
    return loader.load("example_3_7")


@pytest.fixture
def example_params(example_config) -> SaiqhParams:
    return example_config.model


@pytest.fixture
def example_initial(example_config) -> State:
    return example_config.initial.to_state()


@pytest.fixture
def synthetic_config(loader) -> RunConfig:
    return loader.load("synthetic_certified")


@pytest.fixture
def synthetic_params(synthetic_config) -> SaiqhParams:
    return synthetic_config.model


@pytest.fixture
def make_params():
    """Parameters with every rate zero, beta = lA = lH = 1, plus overrides."""
    def factory(**overrides) -> SaiqhParams:
        return SaiqhParams(**{**ZERO_RATES, **overrides})
    return factory


@pytest.fixture
def random_params():
    """Draw a valid parameter set from a numpy Generator."""
    def factory(rng: np.random.Generator, **overrides) -> SaiqhParams:
        f2 = rng.uniform(0.0, 1.0)
        values = dict(
            Lambda=rng.uniform(0.1, 10.0),
            omega=rng.uniform(0.0, 1.0),
            n=rng.uniform(0.0, 1.0),
            phi=rng.uniform(0.0, 1.0),
            p=rng.uniform(0.0, 1.0),
            gamma=rng.uniform(0.01, 1.0),
            q=rng.uniform(0.0, 1.0),
            nu=rng.uniform(0.0, 1.0),
            delta1=rng.uniform(0.0, 1.0),
            delta2=rng.uniform(0.0, 1.0),
            f1=rng.uniform(0.0, 1.0),
            f2=f2,
            f3=rng.uniform(0.0, 1.0 - f2),
            eta=rng.uniform(0.0, 1.0),
            k=rng.uniform(0.0, 1.0),
            alpha1=rng.uniform(0.0, 1.0),
            alpha2=rng.uniform(0.0, 1.0),
            beta=rng.uniform(1e-3, 2.0),
            lA=rng.uniform(0.1, 1.0),
            lH=rng.uniform(0.1, 1.0),
        )
        values.update(overrides)
        return SaiqhParams(**values)
    return factory
