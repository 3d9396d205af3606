# src/core/sweeps.py
"""Plot-ready data: time series, one-axis parameter sweeps and squeezing cutoffs."""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize

from src.core.covariance import assemble
from src.core.errors import DomainError
from src.core.filters import FilterSpec
from src.core.measures import BellConfig, bell_max, log_negativity
from src.core.threads import ordered_map

logger = logging.getLogger('tmss')

EN_THRESHOLD = 1e-9
BELL_THRESHOLD = 2.0
SCAN_POINTS = 32
BISECT_XTOL = 1e-10


class Measure(str, Enum):
    EN = "EN"
    BMAX = "BMAX"


class SweepAxis(str, Enum):
    R = "R"
    N = "N"
    KAPPA = "KAPPA"
    DELTA_OMEGA = "DELTA_OMEGA"
    TAU_S = "TAU_S"


class BracketStatus(str, Enum):
    BRACKETED = "Bracketed"
    NOT_BRACKETED = "NotBracketed"
    NO_VIOLATION = "NoViolation"


@dataclass(frozen=True)
class SweepSeries:
    label: str
    abscissa_name: str
    points: tuple
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        xs = [x for x, _ in self.points]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("sweep abscissas must be strictly increasing")

    @property
    def abscissas(self):
        return [x for x, _ in self.points]

    @property
    def values(self):
        return [y for _, y in self.points]


@dataclass(frozen=True)
class CutoffReport:
    """Squeezing r_max of the largest measure value and the threshold crossings around it."""

    T: float
    r_max: float
    value_at_max: float
    r_lcf: float
    r_ucf: float
    threshold: float
    max_status: BracketStatus
    lcf_status: BracketStatus
    ucf_status: BracketStatus
    multimodal: bool = False


def threshold_for(measure):
    return EN_THRESHOLD if Measure(measure) is Measure.EN else BELL_THRESHOLD


def scale_kappa(params):
    """Rate defining the normalized time scale: the larger of the two couplings."""
    return max(params.kappa_i, params.kappa_s)


def normalized_time(kappa, T):
    """Physical time t with 1 - exp(-kappa t) = T."""
    if not (0.0 <= T < 1.0):
        raise DomainError(f"normalized time T must lie in [0, 1), got {T}")
    if not kappa > 0:
        raise DomainError("kappa must be > 0")
    return -math.log1p(-T) / kappa


def evaluate_measure(params, measure, T, bell_cfg = None, warm_starts = ()):
    """Measure value at normalized time T; BMAX also returns the optimizer result."""
    t = normalized_time(scale_kappa(params), T)
    V = assemble(params, t)
    if Measure(measure) is Measure.EN:
        return log_negativity(V), None
    result = bell_max(V, bell_cfg or BellConfig(), warm_starts)
    return result.b_max, result


def _check_grid(values, name):
    values = [float(v) for v in values]
    if not values:
        raise DomainError(f"{name} must not be empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise DomainError(f"{name} must be strictly increasing")
    return values


def _chained(param_list, measure, T_list, bell_cfg, max_workers):
    """Measure over (params, T) pairs; BMAX points warm-start from their predecessor."""
    if Measure(measure) is Measure.EN:
        pairs = list(zip(param_list, T_list))
        return ordered_map(lambda pair: evaluate_measure(pair[0], Measure.EN, pair[1])[0], pairs, max_workers)

    values, previous = [], None
    for params, T in zip(param_list, T_list):
        warm = (previous.argmax,) if previous is not None else ()
        value, previous = evaluate_measure(params, measure, T, bell_cfg, warm)
        if not previous.converged:
            logger.warning(f"Bell optimizer did not converge at T={T:.6g}")
        values.append(value)
    return values


def time_series(params, measure, T_grid, bell_cfg = None, max_workers = None):
    """Measure along a normalized-time grid."""
    measure = Measure(measure)
    T_grid = _check_grid(T_grid, "T_grid")
    logger.info(f"Time series of {measure.value} over {len(T_grid)} points ({params.scenario.value})")
    values = _chained([params] * len(T_grid), measure, T_grid, bell_cfg, max_workers)
    return SweepSeries(label=f"{params.scenario.value} {measure.value}", abscissa_name="T",
                       points=tuple(zip(T_grid, values)), meta=params.as_dict())


def apply_axis(base, axis, value):
    """Copy of base with one sweep axis overridden; N and KAPPA set both parties."""
    axis = SweepAxis(axis)
    if axis is SweepAxis.R:
        return base.with_changes(r=value)
    if axis is SweepAxis.N:
        return base.with_changes(n_i=value, n_s=value)
    if axis is SweepAxis.KAPPA:
        return base.with_changes(kappa_i=value, kappa_s=value)
    if axis is SweepAxis.DELTA_OMEGA:
        signal = FilterSpec(base.filter_s.family, base.filter_i.omega - value, base.filter_s.tau)
        return base.with_changes(filter_s=signal)
    signal = FilterSpec(base.filter_s.family, base.filter_s.omega, value)
    return base.with_changes(filter_s=signal)


def param_sweep(base, axis, values, measure, T, bell_cfg = None, max_workers = None):
    """Measure at fixed normalized time T while one parameter runs over `values`."""
    axis, measure = SweepAxis(axis), Measure(measure)
    values = _check_grid(values, "values")
    logger.info(f"Sweep of {measure.value} over {axis.value} ({len(values)} points) at T={T}")
    param_list = [apply_axis(base, axis, v) for v in values]
    measured = _chained(param_list, measure, [T] * len(values), bell_cfg, max_workers)
    return SweepSeries(label=f"{base.scenario.value} {measure.value} vs {axis.value}", abscissa_name=axis.value,
                       points=tuple(zip(values, measured)), meta=dict(base.as_dict(), T=T))


def _crossing(profile, threshold, below, above):
    """Root of profile - threshold between a point below and a point above it."""
    return optimize.bisect(lambda r: profile(r) - threshold, below, above, xtol=BISECT_XTOL)


def find_extremum_and_cutoffs(base, measure, T, r_search = (0.0, 4.0), bell_cfg = None, max_workers = None):
    """Squeezing with the largest measure at T and the lower/upper threshold crossings.

    A 32-point scan locates the peak, a golden-section search refines it and
    bisection finds the crossings. Bounds whose measure is still above threshold at
    the end of r_search are reported as NotBracketed at that end.
    """
    measure = Measure(measure)
    r_lo, r_hi = float(r_search[0]), float(r_search[1])
    if not (0.0 <= r_lo < r_hi):
        raise DomainError("r_search must satisfy 0 <= r_lo < r_hi")
    threshold = threshold_for(measure)
    t = normalized_time(scale_kappa(base), T)

    def profile(r):
        V = assemble(base.with_changes(r=r), t)
        if measure is Measure.EN:
            return log_negativity(V)
        return bell_max(V, bell_cfg or BellConfig()).b_max

    grid = np.linspace(r_lo, r_hi, SCAN_POINTS)
    scan = ordered_map(profile, grid.tolist(), max_workers if measure is Measure.EN else 1)
    k = int(np.argmax(scan))
    peaks = [i for i in range(1, SCAN_POINTS - 1) if scan[i] > scan[i - 1] and scan[i] > scan[i + 1]]
    multimodal = len(peaks) > 1
    if multimodal:
        logger.warning(f"{measure.value} r-profile at T={T} has {len(peaks)} local maxima; refining the largest")

    if scan[k] <= threshold:
        logger.info(f"No {measure.value} above {threshold} for r in [{r_lo}, {r_hi}] at T={T}")
        return CutoffReport(T=T, r_max=float(grid[k]), value_at_max=float(scan[k]), r_lcf=math.nan, r_ucf=math.nan,
                            threshold=threshold, max_status=BracketStatus.NO_VIOLATION,
                            lcf_status=BracketStatus.NO_VIOLATION, ucf_status=BracketStatus.NO_VIOLATION,
                            multimodal=multimodal)

    r_max, value_at_max, max_status = float(grid[k]), float(scan[k]), BracketStatus.NOT_BRACKETED
    if 0 < k < SCAN_POINTS - 1:
        try:
            result = optimize.minimize_scalar(lambda r: -profile(r), bracket=(grid[k - 1], grid[k], grid[k + 1]),
                                              method='golden')
            if -result.fun >= value_at_max:
                r_max, value_at_max = float(result.x), float(-result.fun)
            max_status = BracketStatus.BRACKETED
        except (ValueError, RuntimeError) as e:
            logger.warning(f"Golden-section refinement failed ({e}); keeping the scan maximum")

    below = [i for i in range(k) if scan[i] <= threshold]
    if below:
        i = below[-1]
        r_lcf, lcf_status = _crossing(profile, threshold, float(grid[i]), r_max), BracketStatus.BRACKETED
    else:
        r_lcf, lcf_status = r_lo, BracketStatus.NOT_BRACKETED

    above = [i for i in range(k + 1, SCAN_POINTS) if scan[i] <= threshold]
    if above:
        i = above[0]
        r_ucf, ucf_status = _crossing(profile, threshold, float(grid[i]), r_max), BracketStatus.BRACKETED
    else:
        r_ucf, ucf_status = r_hi, BracketStatus.NOT_BRACKETED

    for name, status in (("lower", lcf_status), ("upper", ucf_status)):
        if status is BracketStatus.NOT_BRACKETED:
            logger.warning(f"{measure.value} {name} cutoff not bracketed in [{r_lo}, {r_hi}] at T={T}")
    logger.info(f"T={T}: r_max={r_max:.10g} ({value_at_max:.10g}), r_lcf={r_lcf:.10g}, r_ucf={r_ucf:.10g}")
    return CutoffReport(T=T, r_max=r_max, value_at_max=value_at_max, r_lcf=r_lcf, r_ucf=r_ucf, threshold=threshold,
                        max_status=max_status, lcf_status=lcf_status, ucf_status=ucf_status, multimodal=multimodal)


def cutoff_evolution(base, measure, T_grid, r_search = (0.0, 4.0), bell_cfg = None, max_workers = None):
    """find_extremum_and_cutoffs at every T of a normalized-time grid."""
    T_grid = _check_grid(T_grid, "T_grid")
    return [find_extremum_and_cutoffs(base, measure, T, r_search, bell_cfg, max_workers) for T in T_grid]
