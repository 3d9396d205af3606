import math

import numpy as np
import pytest

from src.core.covariance import Scenario, assemble
from src.core.errors import DomainError
from src.core.measures import BellConfig, log_negativity
from src.core.sweeps import (BracketStatus, Measure, SweepAxis, SweepSeries, apply_axis, cutoff_evolution,
                             evaluate_measure, find_extremum_and_cutoffs, normalized_time, param_sweep, scale_kappa,
                             threshold_for, time_series)
from tests.conftest import make_params

QUICK_BELL = BellConfig(n_restarts=4, max_workers=2)


def fig2_params():
    return make_params(r=1.0, n=0.6, kappa=0.07)


def fig3_params():
    return make_params(r=1.0, n=0.6, kappa=0.07, omega_s=1.02, tau_s=0.208)


def fig4_params():
    return make_params(r=0.4, n=0.1, kappa=0.1)


def test_normalized_time():
    assert normalized_time(0.07, 0.0) == 0.0
    assert normalized_time(0.07, 0.5) == pytest.approx(math.log(2.0) / 0.07, rel=1e-14)
    assert normalized_time(0.07, 0.5) == pytest.approx(9.902, rel=1e-3)
    rng = np.random.default_rng(2)
    for T in rng.uniform(0.0, 0.999, size=10):
        t = normalized_time(0.3, T)
        assert 1.0 - math.exp(-0.3 * t) == pytest.approx(T, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("T", [1.0, -0.1, 1.5, math.nan])
def test_normalized_time_domain(T):
    with pytest.raises(DomainError):
        normalized_time(0.07, T)


def test_scale_kappa_uses_the_larger_coupling():
    assert scale_kappa(make_params(kappa=0.07, kappa_s=0.2)) == 0.2


def test_threshold_for():
    assert threshold_for(Measure.EN) == 1e-9
    assert threshold_for("BMAX") == 2.0


def test_sweep_series_requires_increasing_abscissas():
    with pytest.raises(DomainError):
        SweepSeries("x", "T", ((0.0, 1.0), (0.0, 2.0)))
    series = SweepSeries("x", "T", ((0.0, 1.0), (0.5, 2.0)))
    assert series.abscissas == [0.0, 0.5]
    assert series.values == [1.0, 2.0]


def test_entanglement_time_series_decreases():
    T_grid = np.linspace(0.0, 0.99, 64).tolist()
    series = time_series(fig2_params(), Measure.EN, T_grid, max_workers=4)
    values = series.values
    assert len(values) == 64
    assert values[0] == pytest.approx(2.0, abs=1e-9)
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert series.meta["scenario"] == "TMSTDF"


def test_time_series_matches_direct_evaluation():
    params = fig3_params()
    series = time_series(params, "EN", [0.0, 0.3, 0.6])
    for T, value in series.points:
        V = assemble(params, normalized_time(0.07, T))
        assert value == log_negativity(V)


def test_decohered_entanglement_vanishes_at_late_times():
    params = make_params(scenario=Scenario.TDTMSV, r=1.0, n=0.6, kappa=0.07, omega_s=1.02, tau_s=0.208)
    series = time_series(params, Measure.EN, [0.0, 0.99])
    assert series.values[0] > 0.0
    assert series.values[1] == 0.0


def test_time_series_grid_validation():
    with pytest.raises(DomainError):
        time_series(fig2_params(), Measure.EN, [0.5, 0.2])
    with pytest.raises(DomainError):
        time_series(fig2_params(), Measure.EN, [])
    with pytest.raises(DomainError):
        time_series(fig2_params(), Measure.EN, [0.2, 1.0])


def test_apply_axis():
    base = fig3_params()
    assert apply_axis(base, SweepAxis.R, 0.3).r == 0.3
    both = apply_axis(base, SweepAxis.N, 0.2)
    assert (both.n_i, both.n_s) == (0.2, 0.2)
    rates = apply_axis(base, SweepAxis.KAPPA, 0.3)
    assert (rates.kappa_i, rates.kappa_s) == (0.3, 0.3)
    detuned = apply_axis(base, SweepAxis.DELTA_OMEGA, 0.05)
    assert detuned.filter_s.omega == pytest.approx(0.95)
    assert detuned.filter_s.tau == 0.208
    assert apply_axis(base, SweepAxis.TAU_S, 0.3).filter_s.tau == 0.3


def test_unsqueezed_state_is_not_entangled():
    series = param_sweep(fig2_params(), SweepAxis.R, [0.0, 0.5, 1.0], Measure.EN, 0.5)
    assert series.values[0] == 0.0
    assert series.values[2] > series.values[1] > 0.0


def test_detuning_sweep_is_symmetric():
    values = np.linspace(-0.05, 0.05, 11).tolist()
    series = param_sweep(fig2_params(), SweepAxis.DELTA_OMEGA, values, Measure.EN, 0.2)
    measured = series.values
    for k in range(len(values)):
        assert measured[k] == pytest.approx(measured[-1 - k], abs=1e-9)
    assert measured[5] == max(measured)


def test_more_thermal_photons_mean_less_entanglement():
    series = param_sweep(fig2_params(), SweepAxis.N, np.linspace(0.0, 1.0, 6).tolist(), Measure.EN, 0.5)
    assert all(b <= a + 1e-12 for a, b in zip(series.values, series.values[1:]))


def test_faster_coupling_keeps_more_entanglement_at_matched_time():
    series = param_sweep(fig2_params(), SweepAxis.KAPPA, [0.05, 0.1, 0.2], Measure.EN, 0.5)
    assert all(b >= a - 1e-12 for a, b in zip(series.values, series.values[1:]))


def test_larger_squeezing_loses_more_entanglement():
    params = make_params(scenario=Scenario.TDTMSV, n=0.6, kappa=0.07, omega_s=1.02, tau_s=0.208)
    weak = time_series(params.with_changes(r=0.5), Measure.EN, [0.0, 0.02, 0.05, 0.1])
    strong = time_series(params.with_changes(r=1.5), Measure.EN, [0.0, 0.02, 0.05, 0.1])
    for k in range(1, 4):
        assert weak.values[k] > 0.0 and strong.values[k] > 0.0
        assert strong.values[0] - strong.values[k] > weak.values[0] - weak.values[k]


def test_extremum_and_cutoffs_are_bracketed():
    report = find_extremum_and_cutoffs(fig3_params(), Measure.EN, 0.5, r_search=(0.0, 4.0), max_workers=4)
    assert report.max_status is BracketStatus.BRACKETED
    assert report.lcf_status is BracketStatus.BRACKETED
    assert report.ucf_status is BracketStatus.BRACKETED
    assert 0.0 < report.r_lcf < report.r_max < report.r_ucf < 4.0
    assert report.value_at_max > 0.0
    profile = lambda r: log_negativity(assemble(fig3_params().with_changes(r=r), normalized_time(0.07, 0.5)))
    assert report.value_at_max >= profile(report.r_max - 0.01)
    assert report.value_at_max >= profile(report.r_max + 0.01)
    assert profile(report.r_lcf - 1e-6) <= 1e-9 < profile(report.r_lcf + 1e-6)
    assert profile(report.r_ucf + 1e-6) <= 1e-9 < profile(report.r_ucf - 1e-6)


def test_monotone_profile_is_not_bracketed():
    report = find_extremum_and_cutoffs(make_params(n=0.0), Measure.EN, 0.0, r_search=(0.0, 2.0))
    assert report.max_status is BracketStatus.NOT_BRACKETED
    assert report.r_max == 2.0
    assert report.value_at_max == pytest.approx(4.0, abs=1e-9)
    assert report.ucf_status is BracketStatus.NOT_BRACKETED
    assert report.r_ucf == 2.0
    assert report.lcf_status is BracketStatus.BRACKETED
    assert report.r_lcf == pytest.approx(0.0, abs=1e-9)


def test_no_violation_report():
    report = find_extremum_and_cutoffs(fig3_params(), Measure.EN, 0.5, r_search=(0.0, 0.05))
    assert report.max_status is BracketStatus.NO_VIOLATION
    assert math.isnan(report.r_lcf) and math.isnan(report.r_ucf)


def test_search_interval_validation():
    with pytest.raises(DomainError):
        find_extremum_and_cutoffs(fig3_params(), Measure.EN, 0.5, r_search=(1.0, 1.0))
    with pytest.raises(DomainError):
        find_extremum_and_cutoffs(fig3_params(), Measure.EN, 0.5, r_search=(-1.0, 1.0))


def test_cutoff_evolution_reports_each_time():
    reports = cutoff_evolution(fig3_params(), Measure.EN, [0.3, 0.5], r_search=(0.0, 4.0))
    assert [rep.T for rep in reports] == [0.3, 0.5]


def test_bell_measure_returns_optimizer_result():
    value, result = evaluate_measure(make_params(n=0.0, r=0.4), Measure.BMAX, 0.1, QUICK_BELL)
    assert value == result.b_max
    assert value > 2.1
    value, result = evaluate_measure(fig2_params(), Measure.EN, 0.1)
    assert result is None


def test_bell_time_series_decreases():
    series = time_series(make_params(r=0.4, n=0.6), Measure.BMAX, np.linspace(0.0, 0.9, 6).tolist(), QUICK_BELL)
    values = series.values
    assert values[0] > 2.0
    assert all(b <= a + 1e-4 for a, b in zip(values, values[1:]))


@pytest.mark.slow
def test_bell_time_series_decreases_on_full_grid():
    series = time_series(fig4_params(), Measure.BMAX, np.linspace(0.0, 0.99, 64).tolist())
    values = series.values
    assert values[0] > 2.1
    assert values[-1] < 2.0
    assert all(b <= a + 1e-4 for a, b in zip(values, values[1:]))


@pytest.mark.slow
def test_bell_detuning_sweep_is_symmetric():
    values = np.linspace(-0.05, 0.05, 11).tolist()
    series = param_sweep(fig4_params(), SweepAxis.DELTA_OMEGA, values, Measure.BMAX, 0.1)
    measured = series.values
    for k in range(len(values)):
        assert measured[k] == pytest.approx(measured[-1 - k], abs=1e-4)
