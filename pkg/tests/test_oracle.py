import math

import numpy as np
import pytest

from src.core.covariance import CovMatrix, Scenario, assemble
from src.core.errors import DomainError, NonConvergentQuadrature
from src.core.filters import FilterFamily
from src.core.oracle import (Element, QuadratureConfig, convolve_element, estimate_element, grid_bell_max,
                             integrate_segments)
from tests.conftest import make_params, tmsv_matrix


def test_integrate_segments_sums_pieces():
    estimate = integrate_segments(math.cos, [0.0, 1.0, 2.0, 2.0, math.pi], QuadratureConfig())
    assert estimate.value == pytest.approx(0.0, abs=1e-12)
    assert estimate.error < 1e-10


def test_unconverged_segment_raises():
    cfg = QuadratureConfig(rel_tol=1e-14, abs_tol=1e-16, max_subdivisions=1)
    with pytest.raises(NonConvergentQuadrature) as info:
        integrate_segments(lambda u: math.exp(-0.1 * u) * math.cos(40.0 * u * u), [0.0, 10.0], cfg)
    assert info.value.error_estimate is not None


def test_quadrature_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(rel_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureConfig(max_subdivisions=0)


@pytest.mark.parametrize("scenario", list(Scenario))
def test_identical_filters_have_no_cross_quadrature_convolution(scenario):
    params = make_params(scenario=scenario, n=0.6, n_s=0.1, kappa_s=0.2)
    assert convolve_element(Element.C12, params, 3.0) == pytest.approx(0.0, abs=1e-12)


def test_tdtmsv_cross_quadrature_convolution_is_zero():
    params = make_params(scenario=Scenario.TDTMSV, omega_s=1.5, tau_s=0.3)
    assert convolve_element(Element.C12, params, 2.0) == 0.0


def test_pre_switch_segment_is_integrated():
    # t inside the step window: part of the filter still sees the vacuum
    params = make_params(n=0.6, omega_s=1.02, tau_s=0.208)
    V = assemble(params, 0.1)
    for element in Element:
        estimate = estimate_element(element, params, 0.1)
        assert V.blocks()[element.value] == pytest.approx(estimate.value, rel=1e-7, abs=1e-11)


def test_exponential_elements_at_long_times():
    params = make_params(scenario=Scenario.TMSTDF, family=FilterFamily.EXPONENTIAL, omega_s=0.7, tau_s=0.4)
    V = assemble(params, 60.0)
    for element in Element:
        assert V.blocks()[element.value] == pytest.approx(convolve_element(element, params, 60.0),
                                                          rel=1e-7, abs=1e-11)


def test_negative_time_is_rejected():
    with pytest.raises(DomainError):
        estimate_element(Element.D_I, make_params(), -0.5)


def test_grid_bell_max_of_vacuum():
    assert grid_bell_max(CovMatrix(0.5 * np.eye(4))) == pytest.approx(2.0, rel=1e-12)


def test_grid_bell_max_finds_violation_of_squeezed_vacuum():
    value = grid_bell_max(tmsv_matrix(0.4), max_workers=2)
    assert 2.0 < value < 2.2


def test_grid_bell_max_without_violation():
    V = assemble(make_params(scenario=Scenario.TDTMSV, r=1.0, n=0.1), 500.0)
    assert grid_bell_max(V) <= 2.0 / (V.d_i * V.d_s) + 1e-12


def test_grid_bell_max_is_independent_of_worker_count():
    V = assemble(make_params(r=0.5, n=0.1), 2.0)
    assert grid_bell_max(V, points_per_axis=5, max_workers=1) == grid_bell_max(V, points_per_axis=5, max_workers=3)


def test_grid_bell_max_validation():
    with pytest.raises(DomainError):
        grid_bell_max(tmsv_matrix(0.4), points_per_axis=2)
