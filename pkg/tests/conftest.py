"""Shared fixtures: small simulated datasets and a seeded generator."""

import numpy as np
import pytest

from glmlab import dgp
from glmlab.distributions import get_family
from glmlab.links import get_link


@pytest.fixture
def rng():
    return np.random.default_rng(2026)


def make_dataset(family, link, shape, effect, n_obs=100, seed=90210):
    """One simulated dataset from the shipped presets."""
    config = dgp.config_for(family, link, shape, effect, n_obs=n_obs)
    return dgp.generate(config, seed)


@pytest.fixture
def beta_logit_data():
    return make_dataset("beta", "logit", "symmetric", "positive")


@pytest.fixture
def gamma_log_data():
    return make_dataset("gamma", "log", "thin_tail", "positive")


@pytest.fixture
def normal_identity_data(rng):
    """Plain linear-regression data for closed-form OLS comparisons."""
    n = 120
    x = rng.normal(size=n)
    z1 = rng.normal(size=n)
    z2 = rng.normal(size=n)
    z3 = rng.normal(size=n)
    y = 0.3 + 0.8 * x + 0.5 * z1 - 0.2 * z2 + rng.normal(scale=0.7, size=n)
    config = dgp.DgpConfig(
        family=get_family("normal"), link=get_link("identity"), phi=0.7,
        coefficients=dgp.default_coefficients("positive"), n_obs=n)
    return dgp.Dataset(y=y, x=x, z1=z1, z2=z2, z3=z3,
                       z4=np.zeros(n), config=config, seed=0)
