# src/core/measures.py
"""Entanglement and non-locality measures of a two-mode Gaussian covariance matrix."""
import logging
import math
from dataclasses import dataclass, fields

import numpy as np
from scipy import linalg, optimize

from src.core.covariance import SYMPLECTIC_FORM, CovMatrix
from src.core.errors import DomainError, NumericalFailure
from src.core.threads import ordered_map

logger = logging.getLogger('tmss')

PARTIAL_TRANSPOSE = np.array([1.0, 1.0, 1.0, -1.0])
BELL_SCALE = math.pi ** 2 / 4.0


def as_matrix(V):
    """Plain 4x4 array behind a CovMatrix or array-like."""
    return V.entries if isinstance(V, CovMatrix) else np.asarray(V, dtype=float)


def min_symplectic_eigenvalue_pt(V):
    """Smallest symplectic eigenvalue of the partially transposed covariance matrix.

    min |eig(i Omega V~)| with V~ = P V P, P flipping the sign of the signal momentum.
    """
    matrix = as_matrix(V)
    try:
        linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError as e:
        raise NumericalFailure(f"covariance matrix is not positive definite: {e}") from e
    transposed = PARTIAL_TRANSPOSE[:, None] * matrix * PARTIAL_TRANSPOSE[None, :]
    try:
        eigenvalues = np.linalg.eigvals(1j * SYMPLECTIC_FORM @ transposed)
    except np.linalg.LinAlgError as e:
        raise NumericalFailure(f"symplectic eigen-solve failed: {e}") from e
    return float(np.min(np.abs(eigenvalues)))


def log_negativity(V):
    """E_N = max(0, -ln 2 nu), nu the partially transposed symplectic minimum."""
    nu = min_symplectic_eigenvalue_pt(V)
    if nu == 0.0:
        raise NumericalFailure("zero symplectic eigenvalue")
    return max(0.0, -math.log(2.0 * nu))


class PhaseSpaceDensity:
    """Wigner function of a zero-mean Gaussian state, (pi^2 sqrt(det V))^-1 exp(-u^T V^-1 u / 2).

    The Cholesky factor is computed once so repeated evaluations stay cheap.
    """

    def __init__(self, V):
        matrix = as_matrix(V)
        try:
            self.factor = linalg.cholesky(matrix, lower=True)
        except linalg.LinAlgError as e:
            raise NumericalFailure(f"covariance matrix is not positive definite: {e}") from e
        self.norm = 1.0 / (math.pi ** 2 * float(np.prod(np.diag(self.factor))))
        self.inverse = linalg.cho_solve((self.factor, True), np.eye(4))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != 4:
            raise DomainError("phase-space points must have 4 components")
        whitened = linalg.solve_triangular(self.factor, u.reshape(-1, 4).T, lower=True)
        quadratic = np.sum(whitened * whitened, axis=0).reshape(u.shape[:-1])
        return self.norm * np.exp(-0.5 * quadratic)

    def fast(self, u):
        """Same density via the stored inverse; u has shape (k, 4)."""
        quadratic = np.einsum('ki,ij,kj->k', u, self.inverse, u)
        return self.norm * np.exp(-0.5 * quadratic)


def wigner(V, u):
    """Wigner function at one point or an array of points with trailing dimension 4."""
    value = PhaseSpaceDensity(V)(u)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class BellSettings:
    """Displacements of the two measurement settings per party."""

    q_i0: float = 0.0
    p_i0: float = 0.0
    q_i1: float = 0.0
    p_i1: float = 0.0
    q_s0: float = 0.0
    p_s0: float = 0.0
    q_s1: float = 0.0
    p_s1: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(getattr(self, f.name)) for f in fields(self)):
            raise DomainError("Bell settings must be finite")

    def as_array(self):
        return np.array([getattr(self, f.name) for f in fields(self)])

    @classmethod
    def from_array(cls, values):
        return cls(*(float(v) for v in values))


def _setting_points(settings):
    """Maps (..., 8) settings to the four (..., 4) points u00, u01, u10, u11."""
    idler = (settings[..., 0:2], settings[..., 2:4])
    signal = (settings[..., 4:6], settings[..., 6:8])
    return [np.concatenate([idler[m], signal[n]], axis=-1) for m in (0, 1) for n in (0, 1)]


def bell_value_batch(V, settings_array, density = None):
    """Bell combination pi^2/4 [W(u00) + W(u01) + W(u10) - W(u11)] over (..., 8) settings."""
    density = density or PhaseSpaceDensity(V)
    settings_array = np.asarray(settings_array, dtype=float)
    if settings_array.shape[-1] != 8:
        raise DomainError("Bell settings must have 8 components")
    w00, w01, w10, w11 = (density(u) for u in _setting_points(settings_array))
    return BELL_SCALE * (w00 + w01 + w10 - w11)


def bell_value(V, s):
    values = s.as_array() if isinstance(s, BellSettings) else s
    return float(bell_value_batch(V, values))


@dataclass(frozen=True)
class BellConfig:
    n_restarts: int = 16
    xtol: float = 1e-7
    ftol: float = 1e-10
    max_fev: int = 20000
    seed: int = 0
    max_workers: int = 4


@dataclass(frozen=True)
class BellResult:
    b_max: float
    argmax: BellSettings
    n_restarts_used: int
    converged: bool


def _restart_starts(V, cfg, warm_starts):
    half_width = 3.0 * math.sqrt(float(np.max(np.diag(as_matrix(V)))))
    rng = np.random.default_rng(cfg.seed)
    random_starts = rng.uniform(-half_width, half_width, size=(cfg.n_restarts, 8))
    starts = [np.zeros(8)]
    starts.extend(s.as_array() if isinstance(s, BellSettings) else np.asarray(s, dtype=float)
                  for s in warm_starts)
    starts.extend(random_starts)
    return starts


def _run_restart(density, start, cfg):
    def objective(x):
        points = np.stack(_setting_points(x))
        w00, w01, w10, w11 = density.fast(points)
        return -abs(BELL_SCALE * (w00 + w01 + w10 - w11))

    result = optimize.minimize(objective, start, method='Nelder-Mead',
                               options={'xatol': cfg.xtol, 'fatol': cfg.ftol, 'maxfev': cfg.max_fev,
                                        'maxiter': cfg.max_fev, 'adaptive': True})
    return -float(result.fun), np.asarray(result.x), bool(result.success)


def bell_max(V, cfg = None, warm_starts = ()):
    """Maximal |Bell value| over all eight displacements by multi-start Nelder-Mead.

    Starts are the origin, any warm starts, then cfg.n_restarts uniform draws from
    a box of half-width 3 sqrt(max diag V). Restarts run on a thread pool; the
    best value wins with ties going to the earliest start.
    """
    cfg = cfg or BellConfig()
    density = PhaseSpaceDensity(V)
    starts = _restart_starts(V, cfg, warm_starts)

    outcomes = ordered_map(lambda start: _run_restart(density, start, cfg), starts, cfg.max_workers)

    best = 0
    for index, (value, _, _) in enumerate(outcomes):
        if value > outcomes[best][0]:
            best = index
    value, argmax, converged = outcomes[best]
    failed = sum(1 for outcome in outcomes if not outcome[2])
    if failed:
        logger.warning(f"{failed} of {len(starts)} Bell restarts stopped before meeting tolerances")
    logger.debug(f"Bell maximum {value:.12g} from start {best}")
    return BellResult(b_max=value, argmax=BellSettings.from_array(argmax),
                      n_restarts_used=len(starts), converged=converged)
