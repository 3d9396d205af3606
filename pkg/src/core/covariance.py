# src/core/covariance.py
"""Time-dependent 4x4 covariance matrix of the filtered two-mode field.

Quadrature order is (X_I, Y_I, X_S, Y_S) and the layout is

    V = [[ D_I/2 * 1,  V_corr^T ],
         [ V_corr,     D_S/2 * 1 ]],   V_corr = 1/2 [[C11, C12], [C12, -C11]].
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from src.core.errors import DomainError, NumericalFailure, UnphysicalState
from src.core.filters import FilterSpec
from src.core.kernels import KernelArgs, correlation_kernel, i_window, k_f

logger = logging.getLogger('tmss')

PHYSICALITY_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-12

SYMPLECTIC_FORM = np.array([[0.0, 1.0, 0.0, 0.0],
                            [-1.0, 0.0, 0.0, 0.0],
                            [0.0, 0.0, 0.0, 1.0],
                            [0.0, 0.0, -1.0, 0.0]])


class Scenario(str, Enum):
    TMSTDF = "TMSTDF"  # thermalization before the squeezer
    TDTMSV = "TDTMSV"  # thermalization after the squeezer


@dataclass(frozen=True)
class ScenarioParams:
    """Physical configuration of one run.

    kappa_i and kappa_s are the input couplings for TMSTDF and the output
    couplings for TDTMSV.
    """

    scenario: Scenario
    r: float
    n_i: float
    n_s: float
    kappa_i: float
    kappa_s: float
    filter_i: FilterSpec
    filter_s: FilterSpec

    def __post_init__(self):
        if not isinstance(self.scenario, Scenario):
            try:
                object.__setattr__(self, "scenario", Scenario(str(self.scenario).upper()))
            except ValueError:
                raise DomainError(f"unknown scenario '{self.scenario}'") from None
        for name in ("r", "n_i", "n_s"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be >= 0")
        for name in ("kappa_i", "kappa_s"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise DomainError(f"{name} must be > 0")
        if self.filter_i.family is not self.filter_s.family:
            raise DomainError("both filters must share the same family")

    @property
    def filter_pair(self):
        return (self.filter_i, self.filter_s)

    def with_changes(self, **changes):
        return replace(self, **changes)

    def swapped(self):
        """Same configuration with the idler and signal parties exchanged."""
        return replace(self, n_i=self.n_s, n_s=self.n_i, kappa_i=self.kappa_s, kappa_s=self.kappa_i,
                       filter_i=self.filter_s, filter_s=self.filter_i)

    def as_dict(self):
        return {"scenario": self.scenario.value, "r": self.r, "n_i": self.n_i, "n_s": self.n_s,
                "kappa_i": self.kappa_i, "kappa_s": self.kappa_s,
                "family": self.filter_i.family.value,
                "omega_i": self.filter_i.omega, "tau_i": self.filter_i.tau,
                "omega_s": self.filter_s.omega, "tau_s": self.filter_s.tau}


@dataclass(frozen=True)
class CovMatrix:
    """Immutable symmetric 4x4 covariance matrix with named block accessors."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.shape != (4, 4):
            raise DomainError(f"covariance matrix must be 4x4, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise NumericalFailure("covariance matrix has non-finite entries")
        if np.max(np.abs(entries - entries.T)) > SYMMETRY_TOLERANCE * max(1.0, np.max(np.abs(entries))):
            raise DomainError("covariance matrix must be symmetric")
        entries = 0.5 * (entries + entries.T)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_blocks(cls, d_i, d_s, c11, c12):
        v = 0.5 * np.array([[d_i, 0.0, c11, c12],
                            [0.0, d_i, c12, -c11],
                            [c11, c12, d_s, 0.0],
                            [c12, -c11, 0.0, d_s]])
        return cls(v)

    @property
    def v_i(self):
        return self.entries[:2, :2]

    @property
    def v_s(self):
        return self.entries[2:, 2:]

    @property
    def v_corr(self):
        return self.entries[2:, :2]

    @property
    def d_i(self):
        return 2.0 * self.entries[0, 0]

    @property
    def d_s(self):
        return 2.0 * self.entries[2, 2]

    @property
    def c11(self):
        return 2.0 * self.entries[2, 0]

    @property
    def c12(self):
        return 2.0 * self.entries[2, 1]

    @property
    def c21(self):
        return 2.0 * self.entries[3, 0]

    @property
    def c22(self):
        return 2.0 * self.entries[3, 1]

    def blocks(self):
        return {"D_I": self.d_i, "D_S": self.d_s, "C11": self.c11, "C12": self.c12}


def min_symplectic_eigenvalue_full(V):
    """Smallest symplectic eigenvalue, the minimum of |eig(i Omega V)|."""
    matrix = V.entries if isinstance(V, CovMatrix) else np.asarray(V, dtype=float)
    try:
        eigenvalues = np.linalg.eigvals(1j * SYMPLECTIC_FORM @ matrix)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"symplectic eigen-solve failed: {e}") from e
    return float(np.min(np.abs(eigenvalues)))


def _check_physical(V, params, t):
    nu = min_symplectic_eigenvalue_full(V)
    if nu < 0.5 - PHYSICALITY_TOLERANCE:
        logger.error(f"Unphysical covariance at t={t}: nu={nu:.12g}, params={params}")
        raise UnphysicalState(f"minimal symplectic eigenvalue {nu:.12g} is below 1/2", nu)
    return V


def _kernel(params, kappa, t, decayed = False):
    return correlation_kernel(KernelArgs(params.filter_pair, kappa, t), decayed)


def _check_time(t):
    if not (t >= 0 and math.isfinite(t)):
        raise DomainError("t must be >= 0")


def assemble_tmstdf(params, t):
    """Covariance when the input vacuum thermalizes before the squeezing crystal."""
    if params.scenario is not Scenario.TMSTDF:
        raise DomainError("assemble_tmstdf needs a TMSTDF scenario")
    _check_time(t)
    ch, sh = math.cosh(2.0 * params.r), math.sinh(2.0 * params.r)
    family = params.filter_i.family
    tau_i, tau_s = params.filter_i.tau, params.filter_s.tau
    n_i, n_s = params.n_i, params.n_s

    def grown(tau, kappa):
        return i_window(family, tau, 0.0, t) - i_window(family, tau, kappa, t, decayed=True)

    d_i = (n_i * grown(tau_i, params.kappa_i) * (1.0 + ch)
           + n_s * grown(tau_i, params.kappa_s) * (ch - 1.0) + ch)
    d_s = (n_s * grown(tau_s, params.kappa_s) * (1.0 + ch)
           + n_i * grown(tau_s, params.kappa_i) * (ch - 1.0) + ch)

    j_0 = _kernel(params, 0.0, t)
    j_i = _kernel(params, params.kappa_i, t, decayed=True)
    j_s = _kernel(params, params.kappa_s, t, decayed=True)
    c11 = sh * (-n_i * j_i.real - n_s * j_s.real + (n_i + n_s) * j_0.real + k_f(params.filter_pair))
    c12 = -sh * (-n_i * j_i.imag + n_s * j_s.imag + (n_i - n_s) * j_0.imag)

    V = CovMatrix.from_blocks(d_i, d_s, c11, c12)
    logger.debug(f"TMSTDF t={t:.6g}: D_I={d_i:.10g} D_S={d_s:.10g} C11={c11:.10g} C12={c12:.10g}")
    return _check_physical(V, params, t)


def assemble_tdtmsv(params, t):
    """Covariance when the squeezed vacuum thermalizes after the crystal."""
    if params.scenario is not Scenario.TDTMSV:
        raise DomainError("assemble_tdtmsv needs a TDTMSV scenario")
    _check_time(t)
    ch, sh = math.cosh(2.0 * params.r), math.sinh(2.0 * params.r)
    family = params.filter_i.family

    def diagonal(tau, n, kappa):
        decohered = i_window(family, tau, 0.0, t) - i_window(family, tau, kappa, t, decayed=True)
        return (2.0 * n + 1.0) * decohered + (1.0 - decohered) * ch

    d_i = diagonal(params.filter_i.tau, params.n_i, params.kappa_i)
    d_s = diagonal(params.filter_s.tau, params.n_s, params.kappa_s)
    kappa_mean = 0.5 * (params.kappa_i + params.kappa_s)
    surviving = _kernel(params, kappa_mean, t, decayed=True).real
    c11 = (k_f(params.filter_pair) - _kernel(params, 0.0, t).real + surviving) * sh

    V = CovMatrix.from_blocks(d_i, d_s, c11, 0.0)
    logger.debug(f"TDTMSV t={t:.6g}: D_I={d_i:.10g} D_S={d_s:.10g} C11={c11:.10g}")
    return _check_physical(V, params, t)


def assemble(params, t):
    """Dispatches on the scenario."""
    if params.scenario is Scenario.TMSTDF:
        return assemble_tmstdf(params, t)
    return assemble_tdtmsv(params, t)
