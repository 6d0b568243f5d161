import numpy as np
import pytest

from evcharge.mdp import MdpConfig
from evcharge.price_model import PriceModelParams, build_grid

FULL_PM = PriceModelParams(
    kappa_Y=0.341, mu_Y=-0.492, sigma_Y=5.350, mu_J=-0.484, sigma_J=40.602,
    jump_prob=0.131, seas_a=13.586, seas_b=-0.7597, seas_c=34.1362, seas_period=48,
)

DESK_PM = PriceModelParams(
    kappa_Y=0.341, mu_Y=0.0, sigma_Y=2.0, mu_J=-0.5, sigma_J=6.0,
    jump_prob=0.1, seas_a=3.0, seas_b=-1.0, seas_c=20.0, seas_period=12,
)

MICRO_PM = PriceModelParams(
    kappa_Y=0.5, mu_Y=0.0, sigma_Y=1.0, mu_J=0.0, sigma_J=0.0,
    jump_prob=0.0, seas_a=0.0, seas_b=0.0, seas_c=10.0, seas_period=4,
)


@pytest.fixture(scope="session")
def full_pm():
    return FULL_PM


@pytest.fixture(scope="session")
def desk_pm():
    return DESK_PM


@pytest.fixture(scope="session")
def desk_grid():
    return build_grid(DESK_PM, span=20)  # 41 points


@pytest.fixture(scope="session")
def micro_pm():
    return MICRO_PM


@pytest.fixture(scope="session")
def micro_grid():
    return build_grid(MICRO_PM, span=2)  # 5 points


def desk_cfg(x_max=12, horizon=6, **kw):
    return MdpConfig(r_max=12, x_max=x_max, c_f=0.5, p_ref=0.05, gamma_h=0.01,
                     horizon=horizon, **kw)


def micro_cfg():
    return MdpConfig(r_max=3, x_max=3, c_f=0.1, p_ref=0.05, gamma_h=0.01, horizon=2)


def random_dist(rng, max_n=20):
    n = int(rng.integers(2, max_n + 1))
    support = np.sort(rng.normal(0.0, 10.0, n))
    support = np.unique(np.round(support, 6))
    probs = rng.random(len(support)) + 0.05
    probs /= probs.sum()
    probs[-1] += 1.0 - probs.sum()  # exact normalization
    return support, probs
