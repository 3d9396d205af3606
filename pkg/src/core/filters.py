# src/core/filters.py
"""Temporal filter functions selecting a spectral mode of each output field.

Units: frequencies in units of the idler central frequency Omega_K, times and
window parameters in units of 1/Omega_K, so tau = 0.2 means 0.2 / Omega_K.
"""
import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate

from src.core.errors import DomainError, NonConvergentQuadrature

logger = logging.getLogger('tmss')

# Exponential windows are truncated here; the residual mass is below exp(-80).
EXPONENTIAL_TRUNCATION = 40.0


class FilterFamily(str, Enum):
    STEP = "step"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class FilterSpec:
    """One filter channel: family, central frequency and window parameter."""

    family: FilterFamily
    omega: float
    tau: float

    def __post_init__(self):
        family = self.family
        if not isinstance(family, FilterFamily):
            try:
                family = FilterFamily(str(family).lower())
            except ValueError:
                raise DomainError(f"unknown filter family '{self.family}'") from None
            object.__setattr__(self, "family", family)
        if not math.isfinite(self.omega):
            raise DomainError("omega must be finite")
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError("tau must be > 0")


def eval_filter(spec, t):
    """Impulse response h(t) of the filter; accepts scalars or arrays.

    Step: (Theta(t) - Theta(t - tau)) / sqrt(tau) * exp(-i Omega t), with Theta(0) = 1.
    Exponential: exp(-(1/tau + i Omega) t) / sqrt(tau / 2) * Theta(t).
    """
    if isinstance(t, (float, int)):
        return _eval_scalar(spec, float(t))
    t = np.asarray(t, dtype=float)
    phase = np.exp(-1j * spec.omega * t)
    if spec.family is FilterFamily.STEP:
        inside = (t >= 0.0) & (t < spec.tau)
        value = np.where(inside, phase / math.sqrt(spec.tau), 0.0 + 0.0j)
    else:
        decay = np.exp(-np.where(t >= 0.0, t, 0.0) / spec.tau)
        value = np.where(t >= 0.0, decay * phase / math.sqrt(spec.tau / 2.0), 0.0 + 0.0j)
    return value[()] if value.ndim == 0 else value


def _eval_scalar(spec, t):
    # quadrature hot path
    if t < 0.0:
        return 0j
    if spec.family is FilterFamily.STEP:
        if t >= spec.tau:
            return 0j
        return cmath.exp(-1j * spec.omega * t) / math.sqrt(spec.tau)
    return cmath.exp(complex(-t / spec.tau, -spec.omega * t)) / math.sqrt(spec.tau / 2.0)


def support_end(spec):
    """Right end of the (possibly truncated) support of h."""
    if spec.family is FilterFamily.STEP:
        return spec.tau
    return EXPONENTIAL_TRUNCATION * spec.tau


def comb_frequency(spec, n):
    """Central frequency of the n-th neighbouring mode on the comb Omega + n 2 pi / tau."""
    return spec.omega + n * 2.0 * math.pi / spec.tau


def orthonormality_defect(spec_i, spec_j, rel_tol = 1e-10, abs_tol = 1e-13, max_subdivisions = 2000):
    """|int_0^inf h_i(t) conj(h_j(t)) dt - delta_ij| by adaptive quadrature.

    The integral is truncated where the integrand drops below 1e-12 (the end of
    the shorter step window, or the exponential truncation point).
    """
    if spec_i.family is not spec_j.family:
        raise DomainError("orthonormality is only defined within one filter family")

    end = min(support_end(spec_i), support_end(spec_j))
    delta = abs(spec_i.omega - spec_j.omega)
    edges = [0.0, end]
    if delta > 0:
        half_period = math.pi / delta
        edges = list(np.arange(0.0, end, half_period)) + [end]

    def real_part(t):
        return (eval_filter(spec_i, t) * np.conj(eval_filter(spec_j, t))).real

    def imag_part(t):
        return (eval_filter(spec_i, t) * np.conj(eval_filter(spec_j, t))).imag

    overlap = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        for part, weight in ((real_part, 1.0), (imag_part, 1j)):
            result = integrate.quad(part, a, b, epsabs=abs_tol, epsrel=rel_tol,
                                    limit=max_subdivisions, full_output=1)
            if len(result) > 3:
                raise NonConvergentQuadrature(f"orthonormality integral on [{a:.6g}, {b:.6g}]: {result[3]}",
                                              result[1])
            overlap += weight * result[0]

    kronecker = 1.0 if spec_i == spec_j else 0.0
    defect = abs(overlap - kronecker)
    logger.debug(f"Orthonormality defect {defect:.3e} for {spec_i} vs {spec_j}")
    return defect
