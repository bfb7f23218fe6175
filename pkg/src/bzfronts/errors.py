"""Exception hierarchy.

Domain errors signal invalid inputs or preconditions (CLI exit code 1);
numerical errors signal failures of a computation that was legitimately
requested (CLI exit code 2).
"""

from __future__ import annotations


class BzfrontsError(Exception):
    """Base class for all package errors."""


class DomainError(BzfrontsError, ValueError):
    """Invalid parameter or violated precondition."""


class NumericalError(BzfrontsError, RuntimeError):
    """A numerical procedure failed to produce a usable result."""


# -- kernels ---------------------------------------------------------------

class NotNormalized(DomainError):
    """Tabulated kernel mass differs from 1 beyond tolerance."""


class EmptySupport(DomainError):
    """Kernel restriction to the truncation window carries no mass."""


class DivergentMoment(NumericalError):
    """Exponential moment of the kernel does not exist at the requested rate."""


# -- spectral --------------------------------------------------------------

class ComplexRoots(DomainError):
    """Characteristic roots are complex: speed below 2*sqrt(1-r)."""


# -- profile solver --------------------------------------------------------

class NoConvergence(NumericalError):
    """Iteration failed to reach the requested tolerance."""


class MonotonicityBroken(NumericalError):
    """An iterate violated the ordering guaranteed by the scheme."""


class SingularSystem(NumericalError):
    """A linear solve failed (singular or badly scaled system)."""


class ResonantIndex(NumericalError):
    """Correction-coefficient recursion hit a vanishing denominator."""


# -- pde_sim ---------------------------------------------------------------

class Instability(NumericalError):
    """A simulated field left the admissible range; time step too large."""


# -- speed / verify --------------------------------------------------------

class NoCrossing(NumericalError):
    """Tracked field never straddles the requested level."""


class WindowTooShort(DomainError):
    """Speed-estimation window holds fewer samples than required."""


class TailTooShort(DomainError):
    """Profile tail has too few nodes for an asymptotic fit."""


class NormalizationUnstable(NumericalError):
    """Tail fit inconsistent with exponential decay at the expected rate."""
