"""Uniform 1D grids and grid functions with constant tails.

Profiles live on a truncated line; outside the grid a GridFunction takes
its tail values (0 on the left, the limit value on the right for monotone
fronts), which makes improper integrals against them well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Grid:
    """Uniform abscissae t_min + dt*k, k = 0..n-1."""

    t_min: float
    dt: float
    n: int

    def __post_init__(self):
        if self.dt <= 0:
            raise DomainError(f"grid step must be positive, got {self.dt}")
        if self.n < 3:
            raise DomainError("grid needs at least 3 nodes")

    @classmethod
    def from_bounds(cls, t_min: float, t_max: float, dt: float) -> "Grid":
        if t_max <= t_min:
            raise DomainError(f"empty grid range [{t_min}, {t_max}]")
        n = int(round((t_max - t_min) / dt)) + 1
        return cls(t_min, dt, n)

    @property
    def t_max(self) -> float:
        return self.t_min + self.dt * (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return self.t_min + self.dt * np.arange(self.n)

    def index_of(self, t: float) -> int:
        """Nearest node index to t (clipped to the grid)."""
        k = int(round((t - self.t_min) / self.dt))
        return min(max(k, 0), self.n - 1)


@dataclass
class GridFunction:
    """Piecewise-linear function on a Grid with constant tail values."""

    grid: Grid
    values: np.ndarray
    left_tail: float = 0.0
    right_tail: float = 1.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n,):
            raise DomainError(
                f"values shape {self.values.shape} does not match grid of {self.grid.n} nodes"
            )

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    def __call__(self, t) -> np.ndarray | float:
        """Evaluate by linear interpolation; tails beyond the grid."""
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.nodes, self.values,
                        left=self.left_tail, right=self.right_tail)
        return float(out) if out.ndim == 0 else out

    def shifted(self, h: float) -> "GridFunction":
        """Resample f(. + h) on the same grid (tails extend the ends)."""
        vals = self(self.nodes + h)
        return GridFunction(self.grid, vals, self.left_tail, self.right_tail)

    def is_nondecreasing(self, slack: float = 1e-10) -> bool:
        return bool(np.all(np.diff(self.values) >= -slack))


def constant(grid: Grid, value: float) -> GridFunction:
    return GridFunction(grid, np.full(grid.n, float(value)), value, value)
