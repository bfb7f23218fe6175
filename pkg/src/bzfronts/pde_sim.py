"""Time stepping of the three-field weak-kernel system on a 1D interval.

The weak delay kernel turns the nonlocal system into three local equations

    u_t = u_xx + u (1 - u - r w),
    v_t = v_xx - b u v,
    w_t = w_xx + (v - w)/tau,

with Dirichlet data u = 0, v = w = 1 on the left and u = 1, v = w = 0 on
the right, started from complementary step data.  Diffusion is advanced by
Crank-Nicolson (one tridiagonal solve per field); reaction terms are taken
at the time midpoint predicted by an explicit Euler half step, which keeps
the scheme second order in both directions.  The first few steps are taken
as pairs of backward-Euler half steps so the discontinuous initial data do
not excite the Crank-Nicolson ringing (the discrete fields then stay inside
[0, 1] up to rounding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, Instability

__all__ = [
    "SimConfig", "PdeState", "PRESETS", "preset_config",
    "init_step_data", "step", "run", "scalar_run",
]

FIELDS = ("u", "v", "w")
STABILITY_BRACKET = (-0.1, 1.1)


@dataclass(frozen=True)
class SimConfig:
    """Model parameters and discretization of one simulation."""

    r: float
    b: float
    tau: float = 1.0
    x_min: float = -200.0
    x_max: float = 50.0
    dx: float = 0.05
    dt: float = 0.01
    t_end: float = 150.0
    snapshot_stride: int = 100
    smoothing_steps: int = 4
    bc_left: tuple[float, float, float] = (0.0, 1.0, 1.0)
    bc_right: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if self.dx <= 0 or self.dt <= 0:
            raise DomainError("dx and dt must be positive")
        if self.x_max <= self.x_min:
            raise DomainError(f"empty domain [{self.x_min}, {self.x_max}]")
        if self.t_end < 0:
            raise DomainError(f"t_end must be >= 0, got {self.t_end}")
        if self.snapshot_stride < 1:
            raise DomainError("snapshot_stride must be >= 1")
        if self.tau <= 0 and not math.isinf(self.tau):
            raise DomainError(f"tau must be positive (or inf to disable), got {self.tau}")

    @property
    def x_nodes(self) -> np.ndarray:
        n = int(round((self.x_max - self.x_min) / self.dx)) + 1
        return self.x_min + self.dx * np.arange(n)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


# Paper-scale setup and a desk-scale variant that finishes in well under a
# minute; both share the step sizes.
PRESETS: dict[str, dict] = {
    "paper": dict(x_min=-450.0, x_max=50.0, dx=0.05, dt=0.01, t_end=400.0),
    "desk": dict(x_min=-200.0, x_max=50.0, dx=0.05, dt=0.01, t_end=150.0),
}


def preset_config(name: str, r: float, b: float, tau: float = 1.0, **overrides) -> SimConfig:
    if name not in PRESETS:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    kw = dict(PRESETS[name])
    kw.update(overrides)
    return SimConfig(r=r, b=b, tau=tau, **kw)


@dataclass
class PdeState:
    """Fields on the spatial grid at one time."""

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t: float

    def copy(self) -> "PdeState":
        return PdeState(self.x, self.u.copy(), self.v.copy(), self.w.copy(), self.t)


def init_step_data(config: SimConfig) -> PdeState:
    """Complementary step data: u jumps 0 -> 1 at x = 0, v and w jump 1 -> 0.

    The node at x = 0 carries the x >= 0 value.
    """
    x = config.x_nodes
    u = np.where(x >= 0.0, 1.0, 0.0)
    v = np.where(x >= 0.0, 0.0, 1.0)
    return PdeState(x, u, v, v.copy(), 0.0)


def _cn_matrix(n: int, alpha: float) -> np.ndarray:
    """Banded (I - alpha * D2) with identity rows at both Dirichlet ends."""
    ab = np.zeros((3, n))
    ab[0, 1:] = -alpha
    ab[1, :] = 1.0 + 2.0 * alpha
    ab[2, :-1] = -alpha
    ab[1, 0] = ab[1, -1] = 1.0
    ab[0, 1] = 0.0
    ab[2, -2] = 0.0
    return ab


def _laplacian(f: np.ndarray, dx: float) -> np.ndarray:
    out = np.zeros_like(f)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (dx * dx)
    return out


class _Stepper:
    """Precomputed matrices and reaction closure for one configuration."""

    def __init__(self, config: SimConfig, reaction: Callable, bcs: Sequence[tuple[float, float]]):
        self.config = config
        self.reaction = reaction
        self.bcs = list(bcs)
        n = len(config.x_nodes)
        self.cn = _cn_matrix(n, config.dt / (2.0 * config.dx ** 2))
        self.be = _cn_matrix(n, (config.dt / 2.0) / config.dx ** 2)

    def advance(self, fields: list[np.ndarray], smooth: bool) -> list[np.ndarray]:
        cfg = self.config
        dx, dt = cfg.dx, cfg.dt
        if smooth:
            # two backward-Euler half steps: monotone start for rough data
            for _ in range(2):
                rates = self.reaction(fields)
                new = []
                for f, rate, (bl, br) in zip(fields, rates, self.bcs):
                    rhs = f + (dt / 2.0) * rate
                    rhs[0], rhs[-1] = bl, br
                    new.append(solve_banded((1, 1), self.be, rhs, check_finite=False))
                fields = new
            return fields
        rates = self.reaction(fields)
        mid = [f + (dt / 2.0) * (_laplacian(f, dx) + rate)
               for f, rate in zip(fields, rates)]
        rates = self.reaction(mid)
        new = []
        for f, rate, (bl, br) in zip(fields, rates, self.bcs):
            rhs = f + (dt / 2.0) * _laplacian(f, dx) + dt * rate
            rhs[0], rhs[-1] = bl, br
            new.append(solve_banded((1, 1), self.cn, rhs, check_finite=False))
        return new


def _bz_reaction(config: SimConfig) -> Callable:
    r, b = config.r, config.b
    inv_tau = 0.0 if math.isinf(config.tau) else 1.0 / config.tau

    def reaction(fields):
        u, v, w = fields
        return (u * (1.0 - u - r * w), -b * u * v, inv_tau * (v - w))

    return reaction


def _check_bracket(fields: Sequence[np.ndarray], t: float) -> None:
    lo, hi = STABILITY_BRACKET
    for name, f in zip(FIELDS, fields):
        fmin, fmax = float(f.min()), float(f.max())
        if fmin < lo or fmax > hi:
            raise Instability(
                f"field {name} left [{lo}, {hi}] at t = {t:.6g} "
                f"(range [{fmin:.3g}, {fmax:.3g}]); reduce dt or check parameters")


def step(state: PdeState, config: SimConfig, _stepper: _Stepper | None = None,
         step_index: int | None = None) -> PdeState:
    """Advance one time step (pure: returns a new state).

    The first ``config.smoothing_steps`` steps of a run use the damped
    startup; standalone calls infer the phase from state.t.
    """
    if _stepper is None:
        _stepper = _Stepper(config, _bz_reaction(config),
                            list(zip(config.bc_left, config.bc_right)))
    if step_index is None:
        step_index = int(round(state.t / config.dt))
    smooth = step_index < config.smoothing_steps
    u, v, w = _stepper.advance([state.u, state.v, state.w], smooth)
    new = PdeState(state.x, u, v, w, state.t + config.dt)
    _check_bracket((u, v, w), new.t)
    return new


def run(config: SimConfig, observers: Sequence[Callable[[PdeState], None]] = ()) \
        -> tuple[list[PdeState], "FrontTrack"]:
    """Integrate to t_end; snapshots (and observers) every snapshot_stride steps.

    Returns the snapshot list (initial state included) and the track of the
    u = 0.5 level crossing.  Import stays local to avoid a module cycle.
    """
    from .speed import FrontTrack, track_front

    state = init_step_data(config)
    stepper = _Stepper(config, _bz_reaction(config),
                       list(zip(config.bc_left, config.bc_right)))
    snapshots = [state.copy()]
    for k in range(config.n_steps):
        state = step(state, config, stepper, step_index=k)
        if (k + 1) % config.snapshot_stride == 0:
            snap = state.copy()
            snapshots.append(snap)
            for obs in observers:
                obs(snap)
    track = track_front(snapshots, field="u", level=0.5,
                        margin=_boundary_margin(config))
    return snapshots, track


def _boundary_margin(config: SimConfig) -> float:
    # keep speed samples clear of the Dirichlet walls
    return min(15.0, 0.2 * (config.x_max - config.x_min))


def scalar_run(r: float, l: float, config: SimConfig) -> "FrontTrack":
    """Front track of the scalar benchmark u_t = u_xx + (1-r)(1+l u) u (1-u).

    Step initial data and Dirichlet 0/1 walls; config.b and config.tau are
    ignored.  The minimal speed has the closed form covered by
    spectral.pushed_scalar_speed, which makes this the sharpest quantitative
    regression for the speed pipeline.
    """
    from .speed import track_front

    if l < 0:
        raise DomainError(f"l must be >= 0, got {l}")
    if not 0.0 <= r < 1.0:
        raise DomainError(f"r must lie in [0, 1), got {r}")
    x = config.x_nodes
    u = np.where(x >= 0.0, 1.0, 0.0)

    def reaction(fields):
        (f,) = fields
        return ((1.0 - r) * (1.0 + l * f) * f * (1.0 - f),)

    stepper = _Stepper(config, reaction, [(0.0, 1.0)])
    snapshots = [PdeState(x, u.copy(), np.zeros(0), np.zeros(0), 0.0)]
    fields = [u]
    for k in range(config.n_steps):
        fields = stepper.advance(fields, smooth=k < config.smoothing_steps)
        t = (k + 1) * config.dt
        lo, hi = STABILITY_BRACKET
        if fields[0].min() < lo or fields[0].max() > hi:
            raise Instability(f"scalar field left [{lo}, {hi}] at t = {t:.6g}")
        if (k + 1) % config.snapshot_stride == 0:
            snapshots.append(PdeState(x, fields[0].copy(), np.zeros(0), np.zeros(0), t))
    return track_front(snapshots, field="u", level=0.5,
                       margin=_boundary_margin(config))
