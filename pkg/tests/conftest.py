import math

import numpy as np
import pytest

from src.core.covariance import CovMatrix, Scenario, ScenarioParams
from src.core.filters import FilterFamily, FilterSpec


def make_params(scenario = Scenario.TMSTDF, r = 1.0, n = 0.6, kappa = 0.07, omega_s = 1.0, tau_i = 0.2, tau_s = 0.2,
                family = FilterFamily.STEP, n_s = None, kappa_s = None):
    """Preset-style parameters with the idler filter at Omega_K = 1."""
    return ScenarioParams(scenario=scenario, r=r, n_i=n, n_s=n if n_s is None else n_s, kappa_i=kappa,
                          kappa_s=kappa if kappa_s is None else kappa_s,
                          filter_i=FilterSpec(family, 1.0, tau_i), filter_s=FilterSpec(family, omega_s, tau_s))


def tmsv_matrix(r):
    ch, sh = math.cosh(2.0 * r), math.sinh(2.0 * r)
    return CovMatrix.from_blocks(ch, ch, sh, 0.0)


@pytest.fixture
def step_pair():
    return FilterSpec(FilterFamily.STEP, 1.0, 0.2), FilterSpec(FilterFamily.STEP, 1.02, 0.208)


@pytest.fixture
def exponential_pair():
    return FilterSpec(FilterFamily.EXPONENTIAL, 1.0, 0.2), FilterSpec(FilterFamily.EXPONENTIAL, 1.02, 0.208)


@pytest.fixture
def vacuum():
    return CovMatrix(0.5 * np.eye(4))


@pytest.fixture
def data_dir(tmp_path, monkeypatch):
    """Points the application data directory at a temporary folder."""
    monkeypatch.setenv("TMSS_DATA_DIR", str(tmp_path / "data"))
    return tmp_path / "data"
