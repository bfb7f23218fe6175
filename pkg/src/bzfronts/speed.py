"""Front tracking, asymptotic-speed estimation, and parameter sweeps.

Spreading speeds are measured from level-crossing positions of simulated
fronts: instantaneous speeds are centered differences of the crossing
abscissae, the reported speed is their mean over a settling window (by
default the last 30% of the usable track), and the settled-digit count
records how many decimals of the instantaneous speeds agree across that
window.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BzfrontsError, NoConvergence, NoCrossing, WindowTooShort
from .gridfn import Grid
from .kernels import Kernel, Shifted, format_kernel_spec
from .pde_sim import SimConfig, run
from .spectral import critical_speed

__all__ = [
    "FrontTrack", "SpeedEstimate", "SweepRow", "TrendRow",
    "track_front", "estimate_speed", "sweep", "shifted_kernel_trend",
    "PUSHED_MARGIN",
]

# empirical pushed verdict: speeds above the linear value by more than this
PUSHED_MARGIN = 0.1
SETTLED_DIGITS_CAP = 12


@dataclass
class FrontTrack:
    """Level-crossing positions over time."""

    times: np.ndarray
    positions: np.ndarray
    level: float
    exit_time: float | None = None   # last valid time when the front left the window

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise WindowTooShort("track times must be strictly increasing")


@dataclass
class SpeedEstimate:
    inst_speeds: np.ndarray
    c_est: float
    settled_digits: int
    window: tuple[float, float]


def _crossing(x: np.ndarray, f: np.ndarray, level: float) -> float | None:
    """Unique linear-interpolation crossing of a monotone field, or None."""
    increasing = f[-1] >= f[0]
    g = f if increasing else -f
    lv = level if increasing else -level
    if g[0] > lv or g[-1] < lv:
        return None
    idx = int(np.searchsorted(g, lv))
    idx = min(max(idx, 1), len(g) - 1)
    g0, g1 = g[idx - 1], g[idx]
    if g1 == g0:
        return float(x[idx])
    return float(x[idx - 1] + (lv - g0) / (g1 - g0) * (x[idx] - x[idx - 1]))


def track_front(snapshots, field: str = "u", level: float = 0.5,
                margin: float = 0.0) -> FrontTrack:
    """Trace the level crossing of `field` through a snapshot sequence.

    Tracking stops (exit_time set) once the crossing leaves the margins of
    the domain; NoCrossing is raised when no snapshot ever straddles the
    level.
    """
    times, poss = [], []
    exit_time = None
    for snap in snapshots:
        f = getattr(snap, field)
        pos = _crossing(snap.x, f, level)
        inside = pos is not None and \
            snap.x[0] + margin < pos < snap.x[-1] - margin
        if inside:
            times.append(snap.t)
            poss.append(pos)
        elif times:
            exit_time = times[-1]
            break
    if not times:
        raise NoCrossing(f"field {field} never straddles level {level}")
    return FrontTrack(np.array(times), np.array(poss), level, exit_time)


def estimate_speed(track: FrontTrack, window: tuple[float, float] | None = None,
                   min_samples: int = 10) -> SpeedEstimate:
    """Asymptotic speed from the settling window of a front track.

    Instantaneous speeds are centered differences of positions; the estimate
    is the absolute mean over the window (default: last 30% of the track).
    settled_digits is the largest decimal count at which every window speed
    rounds identically (capped at 12).
    """
    t, x = track.times, track.positions
    if len(t) < 3:
        raise WindowTooShort(f"track has {len(t)} samples; need at least 3")
    tm = t[1:-1]
    inst = (x[2:] - x[:-2]) / (t[2:] - t[:-2])
    if window is None:
        window = (t[-1] - 0.3 * (t[-1] - t[0]), t[-1])
    lo, hi = window
    if lo < t[0] - 1e-12 or hi > t[-1] + 1e-12:
        raise WindowTooShort(f"window {window} outside track support [{t[0]}, {t[-1]}]")
    sel = inst[(tm >= lo) & (tm <= hi)]
    if len(sel) < min_samples:
        raise WindowTooShort(
            f"window holds {len(sel)} speed samples; need at least {min_samples}")
    speeds = np.abs(sel)
    c_est = float(np.mean(speeds))
    settled = 0
    for d in range(SETTLED_DIGITS_CAP, -1, -1):
        r = np.round(speeds, d)
        if np.all(r == r[0]):
            settled = d
            break
    return SpeedEstimate(sel, c_est, settled, (float(lo), float(hi)))


# ---------------------------------------------------------------------------
# parameter sweeps

@dataclass(frozen=True)
class SweepRow:
    r: float
    b: float
    tau: float
    c_est: float
    settled_digits: int
    verdict: str


def _sweep_cell(config: SimConfig) -> SweepRow:
    try:
        _, track = run(config)
        est = estimate_speed(track)
        threshold = critical_speed(config.r) + PUSHED_MARGIN
        verdict = "pushed-empirical" if est.c_est > threshold else "pulled-range"
        return SweepRow(config.r, config.b, config.tau, est.c_est,
                        est.settled_digits, verdict)
    except BzfrontsError as exc:
        return SweepRow(config.r, config.b, config.tau, math.nan, 0,
                        f"error:{type(exc).__name__}")


def sweep(base: SimConfig, b_values, tau_values, parallel: int = 1) -> list[SweepRow]:
    """One simulation per (b, tau) cell; failures are recorded per row.

    Cells are independent and the output order follows the input lists, so
    results are identical for any degree of parallelism.
    """
    from dataclasses import replace
    b_values = list(b_values)
    tau_values = list(tau_values)
    if not b_values or not tau_values:
        raise WindowTooShort("sweep needs at least one b and one tau value")
    configs = [replace(base, b=b, tau=tau) for tau in tau_values for b in b_values]
    if parallel <= 1:
        return [_sweep_cell(cfg) for cfg in configs]
    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(_sweep_cell, configs))


# ---------------------------------------------------------------------------
# shifted-kernel trend at the profile level

@dataclass(frozen=True)
class TrendRow:
    a: float
    c_proxy: float
    status: str


def shifted_kernel_trend(r: float, b: float, a_values, base_kernel: Kernel,
                         c_grid=None, grid: Grid | None = None,
                         residual_tol: float = 1e-5) -> list[TrendRow]:
    """Smallest grid speed with a certified profile, per spatial shift a.

    For each shift the profile solver is tried along an ascending speed
    grid; the first speed whose front converges with residual below
    residual_tol becomes the row's proxy.  The proxy is expected to be
    nondecreasing in the shift (spatial asymmetry pushes the front).
    """
    import warnings as _w

    from .profile_solver import CriterionViolatedWarning, monotone_iterate
    from .spectral import Params

    if c_grid is None:
        c0 = critical_speed(r)
        c_grid = [c0 + 0.05 + 0.1 * k for k in range(int((2.05 - c0) / 0.1) + 1)]
    if grid is None:
        grid = Grid.from_bounds(-50.0, 30.0, 0.02)
    params = Params(r, b)
    rows = []
    for a in a_values:
        kernel = Shifted(base_kernel, a) if a != 0 else base_kernel
        c_proxy, status = math.nan, "no-convergence"
        for c in c_grid:
            try:
                with _w.catch_warnings():
                    _w.simplefilter("ignore", CriterionViolatedWarning)
                    prof = monotone_iterate(params, c, kernel, grid,
                                            record_ordering=False)
            except BzfrontsError:
                continue
            if prof.residual < residual_tol:
                c_proxy, status = c, "ok"
                break
        rows.append(TrendRow(float(a), c_proxy, status))
    return rows
