import math

import numpy as np
import pytest

from src.core.covariance import CovMatrix, Scenario, assemble
from src.core.errors import DomainError, NumericalFailure
from src.core.measures import (BellConfig, BellSettings, PhaseSpaceDensity, bell_max, bell_value, bell_value_batch,
                               log_negativity, min_symplectic_eigenvalue_pt, wigner)
from src.core.oracle import grid_bell_max
from tests.conftest import make_params, tmsv_matrix

QUICK_BELL = BellConfig(n_restarts=6, max_workers=2)
PARTY_SWAP = np.array([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)


def thermal_product(d_i, d_s):
    return CovMatrix.from_blocks(d_i, d_s, 0.0, 0.0)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0, 2.0])
def test_squeezed_vacuum_log_negativity(r):
    assert log_negativity(tmsv_matrix(r)) == pytest.approx(2.0 * r, abs=1e-9)


@pytest.mark.parametrize("r", [1e-9, 1e-8, 1e-7])
def test_log_negativity_keeps_precision_for_weak_squeezing(r):
    assert log_negativity(tmsv_matrix(r)) == pytest.approx(2.0 * r, rel=1e-6)


def test_separable_states_have_zero_log_negativity(vacuum):
    assert log_negativity(vacuum) == pytest.approx(0.0, abs=1e-15)
    assert log_negativity(thermal_product(2.2, 1.4)) == 0.0


def test_partial_transpose_eigenvalue_of_product_state():
    assert min_symplectic_eigenvalue_pt(thermal_product(2.2, 1.4)) == pytest.approx(0.7, rel=1e-12)


def test_log_negativity_is_symmetric_under_party_exchange():
    params = make_params(n=0.6, n_s=0.2, kappa_s=0.11, omega_s=1.3, tau_s=0.25)
    V = assemble(params, 1.0)
    swapped = CovMatrix(PARTY_SWAP @ V.entries @ PARTY_SWAP.T)
    assert log_negativity(swapped) == pytest.approx(log_negativity(V), abs=1e-12)


def test_log_negativity_of_mixed_state_is_reduced():
    V = assemble(make_params(r=1.0, n=0.6), 10.0)
    assert 0.0 < log_negativity(V) < 2.0


def test_non_positive_matrix_fails():
    with pytest.raises(NumericalFailure):
        log_negativity(np.diag([1.0, -1.0, 1.0, 1.0]))


def test_wigner_peak(vacuum):
    assert wigner(vacuum, np.zeros(4)) == pytest.approx(4.0 / math.pi ** 2, rel=1e-14)
    V = tmsv_matrix(0.7)
    assert wigner(V, np.zeros(4)) == pytest.approx(1.0 / (math.pi ** 2 * math.sqrt(np.linalg.det(V.entries))),
                                                   rel=1e-12)


def test_wigner_matches_dense_inverse():
    V = assemble(make_params(r=0.9, n=0.3, omega_s=1.2, tau_s=0.3), 2.0)
    inverse = np.linalg.inv(V.entries)
    norm = 1.0 / (math.pi ** 2 * math.sqrt(np.linalg.det(V.entries)))
    rng = np.random.default_rng(5)
    points = rng.normal(size=(20, 4))
    values = wigner(V, points)
    expected = [norm * math.exp(-0.5 * u @ inverse @ u) for u in points]
    np.testing.assert_allclose(values, expected, rtol=1e-12)
    density = PhaseSpaceDensity(V)
    np.testing.assert_allclose(density.fast(points), expected, rtol=1e-12)


def test_wigner_integrates_to_four():
    # trapezoid sums of Gaussians converge geometrically with the step
    V = tmsv_matrix(0.3)
    step = 0.35
    axis = np.arange(-6.0, 6.0 + step / 2, step)
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing='ij'), axis=-1).reshape(-1, 3)
    density = PhaseSpaceDensity(V)
    total = 0.0
    for q_i in axis:
        points = np.concatenate([np.full((len(grid), 1), q_i), grid], axis=1)
        total += float(np.sum(density(points)))
    assert total * step ** 4 == pytest.approx(4.0, rel=1e-6)


def test_wigner_rejects_bad_input(vacuum):
    with pytest.raises(DomainError):
        wigner(vacuum, np.zeros(3))
    with pytest.raises(NumericalFailure):
        PhaseSpaceDensity(np.diag([1.0, 1.0, -1.0, 1.0]))


def test_bell_value_at_origin(vacuum):
    assert bell_value(vacuum, BellSettings()) == pytest.approx(2.0, rel=1e-14)
    V = thermal_product(2.0, 1.5)
    assert bell_value(V, BellSettings()) == pytest.approx(2.0 / 3.0, rel=1e-14)


def test_bell_value_combination(vacuum):
    s = BellSettings(0.1, -0.2, 0.7, 0.3, -0.4, 0.5, 0.2, -0.9)
    scale = math.pi ** 2 / 4.0

    def w(a, b):
        return wigner(vacuum, np.array([*a, *b]))
    idler = ((0.1, -0.2), (0.7, 0.3))
    signal = ((-0.4, 0.5), (0.2, -0.9))
    expected = scale * (w(idler[0], signal[0]) + w(idler[0], signal[1]) + w(idler[1], signal[0])
                        - w(idler[1], signal[1]))
    assert bell_value(vacuum, s) == pytest.approx(expected, rel=1e-13)


def test_bell_value_batch_matches_single(vacuum):
    V = tmsv_matrix(0.4)
    rng = np.random.default_rng(1)
    batch = rng.uniform(-1.0, 1.0, size=(5, 8))
    values = bell_value_batch(V, batch)
    for row, value in zip(batch, values):
        assert value == pytest.approx(bell_value(V, BellSettings.from_array(row)), rel=1e-13)


def test_bell_settings_validation():
    with pytest.raises(DomainError):
        BellSettings(q_i0=math.nan)
    assert BellSettings.from_array(range(8)).as_array().tolist() == [float(i) for i in range(8)]


def test_bell_max_of_vacuum(vacuum):
    result = bell_max(vacuum, QUICK_BELL)
    assert result.b_max == pytest.approx(2.0, abs=1e-6)
    assert result.n_restarts_used == 7


def test_bell_max_of_thermal_product_state():
    V = assemble(make_params(scenario=Scenario.TDTMSV, r=1.0, n=0.1), 500.0)
    result = bell_max(V, QUICK_BELL)
    assert result.b_max == pytest.approx(2.0 / 1.44, rel=1e-5)
    assert result.b_max <= 2.0


def test_bell_max_violation_of_squeezed_vacuum():
    V = tmsv_matrix(0.4)
    result = bell_max(V, QUICK_BELL)
    assert result.b_max > 2.1
    assert abs(bell_value(V, result.argmax)) == pytest.approx(result.b_max, abs=1e-12)
    assert result.b_max >= grid_bell_max(V) - 1e-9


def test_bell_max_is_deterministic():
    V = assemble(make_params(r=0.6, n=0.2), 3.0)
    first, second = bell_max(V, QUICK_BELL), bell_max(V, QUICK_BELL)
    assert first == second


def test_warm_start_never_hurts():
    V = tmsv_matrix(0.4)
    cold = bell_max(V, BellConfig(n_restarts=0, max_workers=1))
    warm = bell_max(V, BellConfig(n_restarts=0, max_workers=1), warm_starts=[bell_max(V, QUICK_BELL).argmax])
    assert warm.b_max >= cold.b_max - 1e-12
    assert warm.n_restarts_used == 2
