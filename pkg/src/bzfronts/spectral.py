"""Characteristic roots, pulled/pushed classification, benchmark speeds.

The linearization of the front system at the invaded state is governed by
chi_r(z, c) = z^2 - c*z + 1 - r, with real roots 0 < lam_r(c) <= mu_r(c)
exactly when c >= 2*sqrt(1-r).  A front is certified pulled (minimal speed
equal to 2*sqrt(1-r)) when r + b*r*kappa(r, 2*sqrt(1-r)) <= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ComplexRoots, DivergentMoment, DomainError
from .kernels import Kernel, kappa_moment

__all__ = [
    "Params", "CharRoots", "Verdict", "Classification",
    "char_roots", "classify", "weak_kernel_threshold", "pushed_scalar_speed",
    "critical_speed",
]

DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Kinetics parameters: r in (0, 1), b > 0."""

    r: float
    b: float

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise DomainError(f"r must lie in (0, 1), got {self.r}")
        if self.b <= 0.0:
            raise DomainError(f"b must be positive, got {self.b}")


@dataclass(frozen=True)
class CharRoots:
    lam: float
    mu: float
    c: float
    r: float
    degenerate: bool


class Verdict(Enum):
    PULLED_CERTIFIED = "PulledCertified"
    PUSHED_SUSPECTED = "PushedSuspected"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Classification:
    criterion_value: float
    verdict: Verdict
    c_ref: float
    kappa: float


def critical_speed(r: float) -> float:
    """Linear spreading speed 2*sqrt(1-r)."""
    if not 0.0 <= r < 1.0:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    return 2.0 * math.sqrt(1.0 - r)


def char_roots(r: float, c: float) -> CharRoots:
    """Real roots of chi_r(z, c) = z^2 - c*z + 1 - r with lam <= mu.

    Raises ComplexRoots for c below 2*sqrt(1-r) (no admissible front);
    flags the degenerate double root at the critical speed.
    """
    if not 0.0 <= r < 1.0:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    c_min = critical_speed(r)
    if c < c_min - DEGENERACY_TOL:
        raise ComplexRoots(f"c = {c} < 2*sqrt(1-r) = {c_min:.12g}: complex roots")
    degenerate = abs(c - c_min) <= DEGENERACY_TOL
    if degenerate:
        half = 0.5 * c
        return CharRoots(half, half, c, r, True)
    sq = math.sqrt(c * c - 4.0 * (1.0 - r))
    return CharRoots(0.5 * (c - sq), 0.5 * (c + sq), c, r, False)


def classify(params: Params, kernel: Kernel) -> Classification:
    """Pulled/pushed classification at the reference speed 2*sqrt(1-r).

    PulledCertified when r + b*r*kappa <= 1 (a theorem); PushedSuspected
    otherwise (a heuristic label: no sufficient pushedness condition exists
    at finite parameters); Undetermined when kappa diverges.
    """
    r, b = params.r, params.b
    c_ref = critical_speed(r)
    try:
        kappa = kappa_moment(kernel, r, c_ref, 1)
    except DivergentMoment:
        return Classification(math.nan, Verdict.UNDETERMINED, c_ref, math.nan)
    crit = r + b * r * kappa
    verdict = Verdict.PULLED_CERTIFIED if crit <= 1.0 else Verdict.PUSHED_SUSPECTED
    return Classification(crit, verdict, c_ref, kappa)


def weak_kernel_threshold(r: float, tau: float) -> float:
    """Largest b certified pulled for the weak kernel: (1-r)(1+tau(1-r))/r."""
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must lie in (0, 1), got {r}")
    if tau < 0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    return (1.0 - r) * (1.0 + tau * (1.0 - r)) / r


def pushed_scalar_speed(r: float, l: float) -> float:
    """Minimal front speed of the scalar benchmark with extra excess l.

    sqrt(1-r) * 2 for l in [0, 2], sqrt(1-r) * (l+2)/sqrt(2l) for l >= 2;
    the two branches agree at l = 2.
    """
    if not 0.0 <= r < 1.0:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    if l < 0:
        raise DomainError(f"l must be >= 0, got {l}")
    pre = math.sqrt(1.0 - r)
    if l <= 2.0:
        return 2.0 * pre
    return pre * (l + 2.0) / math.sqrt(2.0 * l)
