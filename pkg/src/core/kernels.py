# src/core/kernels.py
"""Closed-form filter integrals feeding the covariance elements.

Every kernel is a window integral of the filter-product envelope A(u), where
h_K(u) conj(h_L(u)) = A(u) exp(-i dOmega u) and dOmega = Omega_K - Omega_L:

    J_c(kappa) + i J_s(kappa) = int_0^t A(u) exp((2 kappa + i dOmega) u) du
    I(kappa)                  = int_0^t |h(u)|^2 exp(2 kappa u) du
    K_f + i L_f               = int_0^inf A(u) exp(i dOmega u) du

Both filter families reduce these to E(z, T) = (exp(zT) - 1) / z, which is
evaluated through a series when |zT| is small.
"""
import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.core.errors import DomainError, NumericalFailure
from src.core.filters import FilterFamily, FilterSpec

logger = logging.getLogger('tmss')

# Below this |zT| the series branch of E(z, T) is used.
SERIES_THRESHOLD = 1e-6
IMAG_TOLERANCE = 1e-12


@dataclass(frozen=True)
class KernelArgs:
    """Filter pair (idler filter first), rate kappa and time t, all in Omega_K units."""

    filter_pair: tuple
    kappa: float
    t: float

    def __post_init__(self):
        check_pair(self.filter_pair)
        if not (self.kappa >= 0 and math.isfinite(self.kappa)):
            raise DomainError("kappa must be >= 0")
        if not (self.t >= 0 and math.isfinite(self.t)):
            raise DomainError("t must be >= 0")


def check_pair(filter_pair):
    """Validates a (filter_I, filter_S) pair and returns it."""
    if len(filter_pair) != 2 or not all(isinstance(f, FilterSpec) for f in filter_pair):
        raise DomainError("filter_pair must hold two FilterSpec values")
    if filter_pair[0].family is not filter_pair[1].family:
        raise DomainError("both filters must share the same family")
    return filter_pair


def window_integral(z, length):
    """E(z, T) = int_0^T exp(z u) du for complex z."""
    if length <= 0.0:
        return 0.0 + 0.0j
    z = complex(z)
    w = z * length
    if abs(w) < SERIES_THRESHOLD:
        return length * (1.0 + w / 2.0 + w * w / 6.0 + w ** 3 / 24.0 + w ** 4 / 120.0)
    return complex(np.expm1(w)) / z


def decayed_window_integral(z, length, rate, t):
    """exp(-rate t) E(z, T), finite for large t even when Re z > 0."""
    if length <= 0.0:
        return 0.0 + 0.0j
    z = complex(z)
    w = z * length
    if abs(w) < SERIES_THRESHOLD or w.real <= 1.0:
        return math.exp(-rate * t) * window_integral(z, length)
    return (cmath.exp(w - rate * t) - math.exp(-rate * t)) / z


def _real(value, name):
    if not abs(value.imag) < IMAG_TOLERANCE * max(1.0, abs(value.real)):
        raise NumericalFailure(f"{name} has an imaginary residue {value.imag:.3e}")
    return value.real


def _envelope(filter_pair):
    """Prefactor, decay rate gamma and support length of A(u)."""
    f_i, f_s = filter_pair
    root = math.sqrt(f_i.tau * f_s.tau)
    if f_i.family is FilterFamily.STEP:
        return 1.0 / root, 0.0, min(f_i.tau, f_s.tau)
    return 2.0 / root, 1.0 / f_i.tau + 1.0 / f_s.tau, math.inf


def correlation_kernel(args, decayed = False):
    """J_c(kappa) + i J_s(kappa) as one complex number; times exp(-2 kappa t) when decayed."""
    f_i, f_s = args.filter_pair
    delta = f_i.omega - f_s.omega
    prefactor, gamma, support = _envelope(args.filter_pair)
    z = complex(2.0 * args.kappa - gamma, delta)
    if decayed:
        return prefactor * decayed_window_integral(z, min(args.t, support), 2.0 * args.kappa, args.t)
    return prefactor * window_integral(z, min(args.t, support))


def j_s(args):
    """Sine kernel J_s(kappa); odd in Omega_K - Omega_L."""
    return correlation_kernel(args).imag


def j_c(args):
    """Cosine kernel J_c(kappa); even in Omega_K - Omega_L."""
    return correlation_kernel(args).real


def i_window(family, tau_party, kappa, t, decayed = False):
    """Window integral I(kappa) = int_0^t |h(u)|^2 exp(2 kappa u) du of one party's filter.

    With decayed set the result is exp(-2 kappa t) I(kappa).

    Step: (exp(2 kappa tau) - 1) / (2 kappa tau_party) with tau = min(t, tau_party).
    Exponential: (2 / tau_party) E(2 kappa - 2 / tau_party, t).
    """
    family = FilterFamily(family)
    if not tau_party > 0:
        raise DomainError("tau must be > 0")
    if kappa < 0 or t < 0:
        raise DomainError("kappa and t must be >= 0")
    if family is FilterFamily.STEP:
        z, length, scale = 2.0 * kappa, min(t, tau_party), 1.0 / tau_party
    else:
        z, length, scale = 2.0 * kappa - 2.0 / tau_party, t, 2.0 / tau_party
    if decayed:
        value = scale * decayed_window_integral(z, length, 2.0 * kappa, t)
    else:
        value = scale * window_integral(z, length)
    return _real(value, "I_window")


def k_f(filter_pair):
    """Overlap constant K_f; 1 for identical filters, |K_f| < 1 otherwise."""
    f_i, f_s = check_pair(filter_pair)
    delta = f_i.omega - f_s.omega
    prefactor, gamma, support = _envelope(filter_pair)
    if f_i.family is FilterFamily.STEP:
        return prefactor * support * float(np.sinc(delta * support / math.pi))
    return prefactor * gamma / (gamma * gamma + delta * delta)


def l_f(filter_pair):
    """Sine companion of K_f: int_0^inf A(u) sin(dOmega u) du."""
    f_i, f_s = check_pair(filter_pair)
    delta = f_i.omega - f_s.omega
    prefactor, gamma, support = _envelope(filter_pair)
    if f_i.family is FilterFamily.STEP:
        half = 0.5 * delta * support
        # 2 sin^2(x/2) / dOmega written through sinc so dOmega = 0 is exact
        return prefactor * support * half * float(np.sinc(half / math.pi)) ** 2
    return prefactor * delta / (gamma * gamma + delta * delta)


def thermal_occupancy(n, kappa, t):
    """p(t) = n Theta(t) (1 - exp(-2 kappa t)) + 1/2; scalars or arrays."""
    if isinstance(t, (float, int)):
        return 0.5 if t < 0.0 else 0.5 - n * math.expm1(-2.0 * kappa * t)
    t = np.asarray(t, dtype=float)
    grown = -np.expm1(-2.0 * kappa * np.where(t > 0.0, t, 0.0))
    value = np.where(t >= 0.0, n * grown, 0.0) + 0.5
    return float(value) if value.ndim == 0 else value
