"""Shared fixtures: parameter sets with predictable dynamics and short integration settings."""

import logging

import numpy as np
import pytest

from src.models import IntegrationConfig, SystemParams


@pytest.fixture
def default_params():
    return SystemParams()


@pytest.fixture
def rederived_params():
    return SystemParams(convention="rederived")


@pytest.fixture
def kerr_params():
    """Strong single-photon coupling, no hopping: three fixed points on an S-shaped intensity curve."""
    return SystemParams(
        omega1=1.0, omega2=1.0, kappa=0.5, delta=2.0, g1=0.05, g2=0.05,
        gamma1=0.1, gamma2=0.1, jm=0.0, theta=0.0, alpha_in=10.0, convention="rederived",
    )


@pytest.fixture
def damped_params():
    """Decoupled and strongly damped: every component obeys dy/dt = -y when undriven."""
    return SystemParams(
        omega1=0.0, omega2=0.0, kappa=2.0, delta=0.0, g1=0.0, g2=0.0,
        gamma1=2.0, gamma2=2.0, jm=0.0, alpha_in=0.0, convention="rederived",
    )


@pytest.fixture
def unstable_params():
    """Printed convention with |delta| > kappa/2: the optical block grows exponentially."""
    return SystemParams(kappa=0.5, delta=5.0, g1=0.0, g2=0.0, jm=0.0, alpha_in=0.0)


@pytest.fixture
def fast_config():
    return IntegrationConfig(dt=0.01, t_total=60.0, t_transient=30.0, record_stride=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def clean_logging():
    """Drop the handlers installed by setup_logging once a test is done."""
    yield
    root = logging.getLogger()
    for handler in [h for h in root.handlers if getattr(h, "_optomech_handler", False)]:
        root.removeHandler(handler)
        handler.close()
