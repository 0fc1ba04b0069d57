"""Decaying envelope ``a(t) = (1 + t^2)^(-alpha/2)``."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class DecayProfile:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidArgumentError("alpha must be positive")

    def __call__(self, t):
        return evaluate_a(self, t)


def evaluate_a(profile: DecayProfile, t):
    t = np.asarray(t, dtype=np.float64)
    out = (1.0 + t * t) ** (-0.5 * profile.alpha)
    return float(out) if out.ndim == 0 else out


def _panels(lower, upper):
    # Geometric breakpoints keep each quad call on a range where the
    # integrand varies by a bounded factor.
    edges = [lower]
    x = max(1.0, lower)
    while x * 4.0 < upper:
        x *= 4.0
        if x > lower:
            edges.append(x)
    edges.append(upper)
    return edges


def integral_a_squared(profile: DecayProfile, lower: float, upper: float) -> float:
    """``int_lower^upper a(s)^2 ds`` for ``0 <= lower <= upper``."""
    if lower < 0 or lower > upper:
        raise InvalidArgumentError("need 0 <= lower <= upper")
    if lower == upper:
        return 0.0
    if profile.alpha == 0.5:
        return math.asinh(upper) - math.asinh(lower)
    alpha = profile.alpha
    total = 0.0
    edges = _panels(lower, upper)
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(lambda s: (1.0 + s * s) ** (-alpha), lo, hi,
                                  epsabs=1e-14, epsrel=1e-13, limit=200)
        total += value
    return total
