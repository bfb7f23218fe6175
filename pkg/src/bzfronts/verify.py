"""Lemma-level checks on computed wave profiles.

Each check is a pure function of the profile; strict continuum inequalities
are tested with slack 1e-10 (discrete tails reach near-equality), and tail
fits use the window 1e-8 < phi < 1e-3, below which rounding noise dominates
and above which the nonlinearity contaminates the decay rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NormalizationUnstable, TailTooShort
from .kernels import convolve_grid
from .profile_solver import (
    WaveProfile, fd_residual, flux_identity_error, kpp_lower_front,
)
from .spectral import char_roots, critical_speed

__all__ = [
    "CheckStatus", "Check", "VerificationReport", "run_all",
    "check_monotone_range", "check_lemma2", "check_sandwich",
    "check_asymptotics", "check_kpp_bound", "check_residual",
]

STRICT_SLACK = 1e-10
TAIL_LO, TAIL_HI = 1e-8, 1e-3


class CheckStatus(Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class Check:
    name: str
    status: CheckStatus
    margin: float           # worst signed violation; <= 0 means satisfied
    location: float | None  # grid abscissa of the worst node, when meaningful
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status is not CheckStatus.FAIL


@dataclass
class VerificationReport:
    checks: list[Check]

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = [f"{'check':<18} {'status':<8} {'margin':>12}  detail"]
        for c in self.checks:
            loc = f" @ t={c.location:.3g}" if c.location is not None else ""
            lines.append(f"{c.name:<18} {c.status.value:<8} {c.margin:>12.3e}  {c.detail}{loc}")
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines)


def _worst(values: np.ndarray, nodes: np.ndarray) -> tuple[float, float]:
    i = int(np.argmax(values))
    return float(values[i]), float(nodes[i])


def check_monotone_range(p: WaveProfile) -> Check:
    """Both profiles nondecreasing, interior in (0, 1), limits 0 and 1."""
    t = p.grid.nodes
    worst, loc = -math.inf, None
    for f in (p.phi.values, p.psi.values):
        v, l = _worst(-np.diff(f), 0.5 * (t[:-1] + t[1:]))
        if v > worst:
            worst, loc = v, l
        rng = max(float(np.max(f - 1.0)), float(np.max(-f)))
        worst = max(worst, rng)
    limits_ok = (p.phi.values[0] <= TAIL_HI and p.psi.values[0] <= TAIL_HI
                 and p.phi.values[-1] >= 1.0 - TAIL_HI and p.psi.values[-1] >= 1.0 - TAIL_HI)
    ok = worst <= STRICT_SLACK and limits_ok
    detail = "" if limits_ok else "boundary values miss the limits 0/1"
    return Check("monotone_range", CheckStatus.PASS if ok else CheckStatus.FAIL,
                 worst, loc, detail)


def check_lemma2(p: WaveProfile) -> Check:
    """psi^2 < M phi with M = 1/(1-r) for b <= 1/2, else b^2/((1-r)(2b-1))."""
    r, b = p.params.r, p.params.b
    M = 1.0 / (1.0 - r) if b <= 0.5 else b * b / ((1.0 - r) * (2.0 * b - 1.0))
    gap = p.psi.values ** 2 - M * p.phi.values
    worst, loc = _worst(gap, p.grid.nodes)
    status = CheckStatus.PASS if worst <= STRICT_SLACK else CheckStatus.FAIL
    return Check("lemma2_bound", status, worst, loc, f"M={M:.6g}")


def check_sandwich(p: WaveProfile) -> Check:
    """phi < psi < b/(1-r) phi, applicable for b >= 1."""
    r, b = p.params.r, p.params.b
    if b < 1.0:
        return Check("sandwich", CheckStatus.SKIPPED, 0.0, None,
                     "needs b >= 1")
    phi, psi = p.phi.values, p.psi.values
    lower = phi - psi
    upper = psi - (b / (1.0 - r)) * phi
    worst, loc = _worst(np.maximum(lower, upper), p.grid.nodes)
    status = CheckStatus.PASS if worst <= STRICT_SLACK else CheckStatus.FAIL
    return Check("sandwich", status, worst, loc)


def _tail_window(values: np.ndarray) -> np.ndarray:
    return (values > TAIL_LO) & (values < TAIL_HI)


def _tail_fit(t: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """(slope, intercept) of the log-linear tail fit."""
    mask = _tail_window(values)
    if mask.sum() < 50:
        raise TailTooShort(f"only {int(mask.sum())} nodes in the tail window")
    slope, intercept = np.polyfit(t[mask], np.log(values[mask]), 1)
    return float(slope), float(intercept)


def check_asymptotics(p: WaveProfile, rate_tol: float = 0.05,
                      ratio_tol: float = 0.10, flux_tol: float = 1e-3) -> Check:
    """Tail decay rate, tail amplitude ratio, and the flux balance.

    The log-slope of phi on the deep-left window must match lam_r or mu_r;
    when it matches lam_r, psi/phi must approach b/(1-r); and the speed must
    balance the reaction flux, c = b * int phi (1 - psi).
    """
    r, b = p.params.r, p.params.b
    roots = char_roots(r, p.c)
    t = p.grid.nodes
    slope, _ = _tail_fit(t, p.phi.values)
    d_lam = abs(slope - roots.lam)
    d_mu = abs(slope - roots.mu)
    rate_ok = min(d_lam, d_mu) <= rate_tol
    parts = [f"slope={slope:.4f} (lam={roots.lam:.4f}, mu={roots.mu:.4f})"]
    worst = min(d_lam, d_mu) - rate_tol
    ratio_ok = True
    if d_lam <= d_mu:
        mask = _tail_window(p.phi.values)
        ratio = float(np.mean(p.psi.values[mask] / p.phi.values[mask]))
        target = b / (1.0 - r)
        ratio_ok = abs(ratio / target - 1.0) <= ratio_tol
        parts.append(f"psi/phi={ratio:.4f} (target {target:.4f})")
        worst = max(worst, abs(ratio / target - 1.0) - ratio_tol)
    flux = flux_identity_error(p.phi.values, p.psi.values, p.params, p.c, p.grid)
    flux_ok = flux <= flux_tol
    parts.append(f"flux_err={flux:.2e}")
    worst = max(worst, flux - flux_tol)
    ok = rate_ok and ratio_ok and flux_ok
    return Check("asymptotics", CheckStatus.PASS if ok else CheckStatus.FAIL,
                 worst, None, "; ".join(parts))


def check_kpp_bound(p: WaveProfile, slack: float = 1e-6) -> Check:
    """The matched scalar KPP front stays below psi (applicable for b >= 1).

    The comparison front solves rho'' - c rho' + (1-r) rho (1 - rho) = 0 and
    is translated so both tails carry the same e^{lam_r t} prefactor; tail
    fits off the exponential rate by more than 10% make the normalization
    meaningless and skip the check.
    """
    r, b = p.params.r, p.params.b
    if b < 1.0:
        return Check("kpp_lower_bound", CheckStatus.SKIPPED, 0.0, None,
                     "needs b >= 1")
    if p.c <= critical_speed(r) + 1e-9:
        return Check("kpp_lower_bound", CheckStatus.SKIPPED, 0.0, None,
                     "needs c > 2*sqrt(1-r)")
    lam = char_roots(r, p.c).lam
    t = p.grid.nodes
    try:
        scalar = kpp_lower_front(r, p.c, p.grid)
        rho_vals = scalar.values / (1.0 - r)   # rescale to limits 0 / 1
        slope_psi, _ = _tail_fit(t, p.psi.values)
        slope_rho, _ = _tail_fit(t, rho_vals)
        for name, slope in (("psi", slope_psi), ("rho", slope_rho)):
            if abs(slope / lam - 1.0) > 0.10:
                raise NormalizationUnstable(
                    f"{name} tail rate {slope:.4f} vs lam_r {lam:.4f}")
    except (NormalizationUnstable, TailTooShort) as exc:
        return Check("kpp_lower_bound", CheckStatus.SKIPPED, 0.0, None, str(exc))
    # prefactors at the fixed rate lam_r
    mask_psi = _tail_window(p.psi.values)
    mask_rho = _tail_window(rho_vals)
    ln_a_psi = float(np.mean(np.log(p.psi.values[mask_psi]) - lam * t[mask_psi]))
    ln_a_rho = float(np.mean(np.log(rho_vals[mask_rho]) - lam * t[mask_rho]))
    shift = (ln_a_psi - ln_a_rho) / lam
    from .gridfn import GridFunction
    rho_fn = GridFunction(p.grid, rho_vals, 0.0, 1.0)
    rho_shifted = rho_fn(t + shift)
    gap = rho_shifted - p.psi.values
    worst, loc = _worst(gap, t)
    status = CheckStatus.PASS if worst <= slack else CheckStatus.FAIL
    return Check("kpp_lower_bound", status, worst, loc, f"shift={shift:.3f}")


def check_residual(p: WaveProfile, tol: float = 1e-5) -> Check:
    """Central-difference residual with an independently rebuilt convolution."""
    conv = convolve_grid(p.kernel, p.psi, p.c, level=1)
    res = fd_residual(p.phi.values, p.psi.values, p.params, p.c, p.grid, conv)
    status = CheckStatus.PASS if res <= tol else CheckStatus.FAIL
    return Check("residual", status, res - tol, None, f"residual={res:.3e}")


def run_all(p: WaveProfile) -> VerificationReport:
    checks = [
        check_monotone_range(p),
        check_lemma2(p),
        check_sandwich(p),
        check_asymptotics(p),
        check_kpp_bound(p),
        check_residual(p),
    ]
    return VerificationReport(checks)
