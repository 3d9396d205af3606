# src/cli/verify.py
"""Seeded cross-checks of the closed forms against the quadrature and grid oracles."""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from src.core.covariance import CovMatrix, Scenario, ScenarioParams, assemble, min_symplectic_eigenvalue_full
from src.core.errors import NonConvergentQuadrature, UnphysicalState
from src.core.filters import FilterFamily, FilterSpec
from src.core.kernels import KernelArgs, correlation_kernel, i_window, k_f, l_f
from src.core.measures import BellConfig, bell_max, log_negativity
from src.core.oracle import Element, KernelKind, QuadratureConfig, estimate_element, grid_bell_max, kernel_quadrature

logger = logging.getLogger('tmss')

PURE_STATE_SQUEEZING = (0.1, 0.5, 1.0, 2.0)
PURE_STATE_TOLERANCE = 1e-9
KF_TOLERANCE = 1e-12
BELL_TOLERANCE = 1e-6
BELL_SQUEEZING = 0.4


@dataclass(frozen=True)
class VerifyConfig:
    draws: int = 1000
    rel_tol: float = 1e-6
    abs_tol: float = 1e-10
    kernel_rel_tol: float = 1e-8
    bell_checks: bool = True
    grid_points: int = 7


@dataclass
class CheckTally:
    """Running worst-case errors of one named check."""

    check: str
    scenario: str
    count: int = 0
    failures: int = 0
    max_abs_error: float = 0.0
    max_rel_error: float = 0.0
    notes: list = field(default_factory=list)

    def record(self, passed, abs_error = 0.0, rel_error = 0.0, note = None):
        self.count += 1
        if not passed:
            self.failures += 1
            if note and len(self.notes) < 3:
                self.notes.append(note)
        self.max_abs_error = max(self.max_abs_error, abs_error)
        self.max_rel_error = max(self.max_rel_error, rel_error)

    @property
    def passed(self):
        return self.failures == 0

    def row(self):
        return (self.check, self.scenario, self.count, self.failures, self.max_abs_error, self.max_rel_error,
                "pass" if self.passed else "FAIL", "; ".join(self.notes))


REPORT_COLUMNS = ("check", "scenario", "count", "failures", "max_abs_error", "max_rel_error", "status", "notes")


@dataclass(frozen=True)
class VerificationReport:
    tallies: tuple

    @property
    def passed(self):
        return all(t.passed for t in self.tallies)

    @property
    def rows(self):
        return [t.row() for t in self.tallies]


def compare(tally, closed, estimate, rel_tol, abs_tol, label):
    """Records closed vs quadrature; both the difference and the error estimate must fit the bound."""
    diff = abs(closed - estimate.value)
    bound = max(rel_tol * abs(estimate.value), abs_tol)
    scaled = diff / max(abs(estimate.value), abs_tol / rel_tol)
    passed = diff <= bound and estimate.error <= bound
    tally.record(passed, diff, scaled, None if passed else f"{label}: {closed!r} vs {estimate.value!r}")


def draw_params(rng, scenario):
    """One random configuration; roughly one draw in ten uses identical filters."""
    family = FilterFamily.STEP if rng.uniform() < 0.5 else FilterFamily.EXPONENTIAL
    delta = rng.uniform(-5.0, 5.0)
    tau_i, tau_s = rng.uniform(0.05, 1.0, size=2)
    kappa_i, kappa_s = rng.uniform(0.01, 0.5, size=2)
    t = rng.uniform(0.0, 50.0)
    r = rng.uniform(0.0, 1.5)
    n_i, n_s = rng.uniform(0.0, 1.0, size=2)
    identical = rng.uniform() < 0.1
    filter_i = FilterSpec(family, 1.0, float(tau_i))
    filter_s = filter_i if identical else FilterSpec(family, 1.0 - float(delta), float(tau_s))
    params = ScenarioParams(scenario=scenario, r=float(r), n_i=float(n_i), n_s=float(n_s),
                            kappa_i=float(kappa_i), kappa_s=float(kappa_s), filter_i=filter_i, filter_s=filter_s)
    return params, float(t)


def _check_kernels(tally, params, t, cfg, quad_cfg):
    kappas = (0.0, params.kappa_i, params.kappa_s)
    family = params.filter_i.family
    for kappa in kappas:
        args = KernelArgs(params.filter_pair, kappa, t)
        closed = correlation_kernel(args)
        compare(tally, closed.real, kernel_quadrature(KernelKind.J_C, args, quad_cfg),
                cfg.kernel_rel_tol, cfg.abs_tol, f"J_c({kappa:.4g})")
        compare(tally, closed.imag, kernel_quadrature(KernelKind.J_S, args, quad_cfg),
                cfg.kernel_rel_tol, cfg.abs_tol, f"J_s({kappa:.4g})")
        compare(tally, i_window(family, params.filter_i.tau, kappa, t),
                kernel_quadrature(KernelKind.I_WINDOW_I, args, quad_cfg), cfg.kernel_rel_tol, cfg.abs_tol, "I_I")
        compare(tally, i_window(family, params.filter_s.tau, kappa, t),
                kernel_quadrature(KernelKind.I_WINDOW_S, args, quad_cfg), cfg.kernel_rel_tol, cfg.abs_tol, "I_S")
    args = KernelArgs(params.filter_pair, 0.0, t)
    compare(tally, k_f(params.filter_pair), kernel_quadrature(KernelKind.K_F, args, quad_cfg),
            cfg.kernel_rel_tol, cfg.abs_tol, "K_f")
    compare(tally, l_f(params.filter_pair), kernel_quadrature(KernelKind.L_F, args, quad_cfg),
            cfg.kernel_rel_tol, cfg.abs_tol, "L_f")


def _check_kf_gate(tally, params):
    value = k_f(params.filter_pair)
    if params.filter_i == params.filter_s:
        error = abs(value - 1.0)
        tally.record(error <= KF_TOLERANCE, error, error, f"K_f={value!r} for identical filters")
    else:
        tally.record(abs(value) < 1.0, 0.0, 0.0, f"|K_f|={abs(value)!r} for distinct filters")


def _check_draw(tallies, params, t, cfg, quad_cfg):
    scenario = params.scenario.value
    try:
        V = assemble(params, t)
        nu = min_symplectic_eigenvalue_full(V)
        tallies[("physicality", scenario)].record(True, max(0.0, 0.5 - nu), 0.0)
    except UnphysicalState as e:
        tallies[("physicality", scenario)].record(False, 0.5 - e.min_eigenvalue, 0.0, str(e))
        return

    closed = V.blocks()
    elements = tallies[("elements", scenario)]
    for element in Element:
        try:
            estimate = estimate_element(element, params, t, quad_cfg)
        except NonConvergentQuadrature as e:
            elements.record(False, note=f"{element.value}: {e}")
            continue
        compare(elements, closed[element.value], estimate, cfg.rel_tol, cfg.abs_tol, element.value)


def _pure_state_checks(tally):
    for r in PURE_STATE_SQUEEZING:
        step = FilterSpec(FilterFamily.STEP, 1.0, 0.2)
        for scenario, t in ((Scenario.TMSTDF, 1.0), (Scenario.TDTMSV, 0.0)):
            params = ScenarioParams(scenario=scenario, r=r, n_i=0.0, n_s=0.0, kappa_i=0.1, kappa_s=0.1,
                                    filter_i=step, filter_s=step)
            value = log_negativity(assemble(params, t))
            error = abs(value - 2.0 * r)
            tally.record(error <= PURE_STATE_TOLERANCE, error, error / (2.0 * r),
                         f"{scenario.value} r={r}: E_N={value!r}")


def _bell_checks(tallies, cfg, bell_cfg):
    boundary = tallies[("bell_boundary", "-")]
    vacuum = CovMatrix(0.5 * np.eye(4))
    value = bell_max(vacuum, bell_cfg).b_max
    boundary.record(abs(value - 2.0) <= BELL_TOLERANCE, abs(value - 2.0), abs(value - 2.0) / 2.0,
                    f"vacuum b_max={value!r}")

    step = FilterSpec(FilterFamily.STEP, 1.0, 0.2)
    thermal = ScenarioParams(scenario=Scenario.TDTMSV, r=BELL_SQUEEZING, n_i=0.1, n_s=0.1, kappa_i=0.1,
                             kappa_s=0.1, filter_i=step, filter_s=step)
    V = assemble(thermal, 500.0)
    expected = 2.0 / (V.d_i * V.d_s)
    value = bell_max(V, bell_cfg).b_max
    boundary.record(abs(value - expected) <= BELL_TOLERANCE, abs(value - expected), abs(value - expected) / expected,
                    f"thermal product b_max={value!r}, expected {expected!r}")

    pure = ScenarioParams(scenario=Scenario.TMSTDF, r=BELL_SQUEEZING, n_i=0.0, n_s=0.0, kappa_i=0.1, kappa_s=0.1,
                          filter_i=step, filter_s=step)
    V = assemble(pure, 1.0)
    value = bell_max(V, bell_cfg).b_max
    grid_value = grid_bell_max(V, points_per_axis=cfg.grid_points)
    soundness = tallies[("bell_vs_grid", "-")]
    soundness.record(value > 2.0 and value >= grid_value - 1e-9, max(0.0, grid_value - value), 0.0,
                     f"pure TMSV b_max={value!r}, grid={grid_value!r}")


def run_verification(cfg = None, quad_cfg = None, bell_cfg = None, seed = 0):
    """Runs every cross-check and returns a VerificationReport; never raises on a failed check."""
    cfg = cfg or VerifyConfig()
    quad_cfg = quad_cfg or QuadratureConfig()
    bell_cfg = bell_cfg or BellConfig(seed=seed)
    rng = np.random.default_rng(seed)

    names = [("kernels", s.value) for s in Scenario] + [("elements", s.value) for s in Scenario]
    names += [("physicality", s.value) for s in Scenario] + [("kf_gate", "-"), ("pure_state", "-")]
    if cfg.bell_checks:
        names += [("bell_boundary", "-"), ("bell_vs_grid", "-")]
    tallies = {name: CheckTally(*name) for name in names}

    for scenario in Scenario:
        logger.info(f"Verifying {scenario.value} over {cfg.draws} random draws")
        for index in range(cfg.draws):
            params, t = draw_params(rng, scenario)
            try:
                _check_kernels(tallies[("kernels", scenario.value)], params, t, cfg, quad_cfg)
            except NonConvergentQuadrature as e:
                tallies[("kernels", scenario.value)].record(False, note=str(e))
            _check_kf_gate(tallies[("kf_gate", "-")], params)
            _check_draw(tallies, params, t, cfg, quad_cfg)
            if (index + 1) % 100 == 0:
                logger.debug(f"{scenario.value}: {index + 1} of {cfg.draws} draws checked")

    _pure_state_checks(tallies[("pure_state", "-")])
    if cfg.bell_checks:
        _bell_checks(tallies, cfg, bell_cfg)

    report = VerificationReport(tuple(tallies[name] for name in names))
    for tally in report.tallies:
        level = logging.INFO if tally.passed else logging.ERROR
        logger.log(level, f"{tally.check}/{tally.scenario}: {tally.failures} of {tally.count} failed, "
                          f"max rel error {tally.max_rel_error:.3e}")
    return report
