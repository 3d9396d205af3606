# src/core/oracle.py
"""Brute-force reference values for the closed forms.

Covariance elements and kernels are recomputed by adaptive quadrature of the raw
convolution integrands built from `eval_filter` alone, and the Bell maximum is
bounded from below by an exhaustive grid search.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from src.core.covariance import Scenario
from src.core.errors import DomainError, NonConvergentQuadrature
from src.core.filters import EXPONENTIAL_TRUNCATION, FilterFamily, eval_filter, support_end
from src.core.kernels import thermal_occupancy
from src.core.measures import BELL_SCALE, PhaseSpaceDensity, as_matrix
from src.core.threads import max_reduce

logger = logging.getLogger('tmss')


class Element(str, Enum):
    D_I = "D_I"
    D_S = "D_S"
    C11 = "C11"
    C12 = "C12"


class KernelKind(str, Enum):
    J_S = "J_S"
    J_C = "J_C"
    I_WINDOW_I = "I_WINDOW_I"
    I_WINDOW_S = "I_WINDOW_S"
    K_F = "K_F"
    L_F = "L_F"


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class QuadratureEstimate:
    value: float
    error: float


def _breakpoints(end, marks, delta):
    """Sorted segment edges on [0, end]: the marks plus every half-period pi/|delta|."""
    edges = {0.0, end}
    edges.update(m for m in marks if 0.0 < m < end)
    if delta != 0.0:
        half_period = math.pi / abs(delta)
        edges.update(np.arange(half_period, end, half_period).tolist())
    return sorted(edges)


def integrate_segments(integrand, edges, cfg):
    """Sum of scipy quad over consecutive segments; raises on any non-converged segment."""
    total, error = 0.0, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0.0:
            continue
        result = integrate.quad(integrand, a, b, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
                                limit=cfg.max_subdivisions, full_output=1)
        if len(result) > 3:
            raise NonConvergentQuadrature(f"segment [{a:.6g}, {b:.6g}]: {result[3]}", error + result[1])
        total += result[0]
        error += result[1]
    return QuadratureEstimate(total, error)


def _product_end(f_a, f_b):
    if f_a.family is FilterFamily.STEP:
        return min(f_a.tau, f_b.tau)
    return max(support_end(f_a), support_end(f_b))


def _product(f_a, f_b, u):
    return complex(eval_filter(f_a, u) * np.conj(eval_filter(f_b, u)))


def _weighted_end(t, step_end, decay, kappa):
    """Upper limit for int_0^t of an envelope decaying at `decay` times exp(2 kappa u)."""
    if step_end is not None:
        return min(t, step_end)
    net = decay - 2.0 * kappa
    return t if net <= 0.0 else min(t, 2.0 * EXPONENTIAL_TRUNCATION / net)


def kernel_quadrature(kind, args, cfg = None):
    """Reference value of one kernel from its raw filter-product integrand."""
    cfg = cfg or QuadratureConfig()
    kind = KernelKind(kind)
    f_i, f_s = args.filter_pair
    kappa, t = args.kappa, args.t
    delta = f_i.omega - f_s.omega
    step = f_i.family is FilterFamily.STEP

    if kind in (KernelKind.I_WINDOW_I, KernelKind.I_WINDOW_S):
        f = f_i if kind is KernelKind.I_WINDOW_I else f_s
        end = _weighted_end(t, f.tau if step else None, 2.0 / f.tau, kappa)

        def integrand(u):
            return abs(complex(eval_filter(f, u))) ** 2 * math.exp(2.0 * kappa * u)

        return integrate_segments(integrand, _breakpoints(end, [], 0.0), cfg)

    if kind in (KernelKind.K_F, KernelKind.L_F):
        end = _product_end(f_i, f_s)
        if kind is KernelKind.K_F:
            def integrand(u):
                return _product(f_i, f_s, u).real
        else:
            def integrand(u):
                return -_product(f_i, f_s, u).imag
        return integrate_segments(integrand, _breakpoints(end, [], delta), cfg)

    end = _weighted_end(t, _product_end(f_i, f_s) if step else None, 1.0 / f_i.tau + 1.0 / f_s.tau, kappa)
    if kind is KernelKind.J_C:
        def integrand(u):
            return _product(f_i, f_s, u).real * math.exp(2.0 * kappa * u)
    else:
        def integrand(u):
            return -_product(f_i, f_s, u).imag * math.exp(2.0 * kappa * u)
    return integrate_segments(integrand, _breakpoints(end, [], delta), cfg)


def _tmstdf_integrand(element, params, t):
    ch, sh = math.cosh(2.0 * params.r), math.sinh(2.0 * params.r)
    f_i, f_s = params.filter_pair

    def occupancies(u):
        s = t - u
        return (thermal_occupancy(params.n_i, params.kappa_i, s),
                thermal_occupancy(params.n_s, params.kappa_s, s))

    if element is Element.D_I or element is Element.D_S:
        f = f_i if element is Element.D_I else f_s
        sign = 1.0 if element is Element.D_I else -1.0

        def integrand(u):
            p_i, p_s = occupancies(u)
            return abs(complex(eval_filter(f, u))) ** 2 * ((p_i + p_s) * ch + sign * (p_i - p_s))
        return integrand

    if element is Element.C11:
        def integrand(u):
            p_i, p_s = occupancies(u)
            return _product(f_i, f_s, u).real * (p_i + p_s) * sh
        return integrand

    def integrand(u):
        p_i, p_s = occupancies(u)
        h_k, h_l = complex(eval_filter(f_i, u)), complex(eval_filter(f_s, u))
        return (h_k.imag * h_l.real - h_l.imag * h_k.real) * (p_i - p_s) * sh
    return integrand


def _tdtmsv_integrand(element, params, t):
    ch, sh = math.cosh(2.0 * params.r), math.sinh(2.0 * params.r)
    f_i, f_s = params.filter_pair

    if element is Element.D_I or element is Element.D_S:
        f, n, kappa = ((f_i, params.n_i, params.kappa_i) if element is Element.D_I
                       else (f_s, params.n_s, params.kappa_s))

        def integrand(u):
            s = t - u
            weight = abs(complex(eval_filter(f, u))) ** 2
            if s < 0.0:
                return weight * ch
            surviving = math.exp(-2.0 * kappa * s)
            return weight * ((2.0 * n + 1.0) * (1.0 - surviving) + surviving * ch)
        return integrand

    if element is Element.C11:
        kappa_sum = params.kappa_i + params.kappa_s

        def integrand(u):
            s = t - u
            surviving = 1.0 if s < 0.0 else math.exp(-kappa_sum * s)
            return _product(f_i, f_s, u).real * surviving * sh
        return integrand

    # the decohering map never mixes X and Y quadratures across the parties
    def integrand(u):
        return 0.0
    return integrand


def estimate_element(element, params, t, cfg = None):
    """Quadrature value and error estimate of one covariance element at time t."""
    cfg = cfg or QuadratureConfig()
    element = Element(element)
    if not (t >= 0 and math.isfinite(t)):
        raise DomainError("t must be >= 0")
    f_i, f_s = params.filter_pair
    if element is Element.D_I:
        end, delta = support_end(f_i), 0.0
    elif element is Element.D_S:
        end, delta = support_end(f_s), 0.0
    else:
        end, delta = _product_end(f_i, f_s), f_i.omega - f_s.omega

    if params.scenario is Scenario.TMSTDF:
        integrand = _tmstdf_integrand(element, params, t)
    else:
        integrand = _tdtmsv_integrand(element, params, t)
    edges = _breakpoints(end, [t, f_i.tau, f_s.tau], delta)
    estimate = integrate_segments(integrand, edges, cfg)
    logger.debug(f"Oracle {params.scenario.value} {element.value} t={t:.6g}: "
                 f"{estimate.value:.12g} +- {estimate.error:.2e}")
    return estimate


def convolve_element(element, params, t, cfg = None):
    """Covariance element at time t by direct quadrature of its convolution integral."""
    return estimate_element(element, params, t, cfg).value


def grid_bell_max(V, half_width = None, points_per_axis = 7, max_workers = None):
    """Largest |Bell value| over an 8-dimensional grid of settings.

    Each party's two settings range over the same 2-D grid of (q, p) displacements
    with half-width sqrt(max diag V) unless given. Settings and their negatives give
    the same value, so only the first half of the idler's first setting is scanned.
    """
    if points_per_axis < 3:
        raise DomainError("points_per_axis must be >= 3")
    matrix = as_matrix(V)
    if half_width is None:
        half_width = math.sqrt(float(np.max(np.diag(matrix))))
    axis = np.linspace(-half_width, half_width, points_per_axis)
    q, p = np.meshgrid(axis, axis, indexing='ij')
    plane = np.stack([q.ravel(), p.ravel()], axis=-1)
    size = len(plane)

    density = PhaseSpaceDensity(matrix)
    points = np.concatenate([np.repeat(plane, size, axis=0), np.tile(plane, (size, 1))], axis=-1)
    table = BELL_SCALE * density(points).reshape(size, size)

    def best_for(a0):
        row = table[a0]
        values = row[None, :, None] + row[None, None, :] + table[:, :, None] - table[:, None, :]
        return float(np.max(np.abs(values)))

    index, value = max_reduce(best_for, range((size + 1) // 2), max_workers)
    logger.debug(f"Grid Bell maximum {value:.12g} ({points_per_axis} points per axis, a0={index})")
    return value
