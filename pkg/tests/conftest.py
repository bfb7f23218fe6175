"""Shared fixtures: the expensive artifacts are computed once per session."""

from __future__ import annotations

import numpy as np
import pytest

import bzfronts as bz


@pytest.fixture(scope="session")
def profile_pm() -> bz.WaveProfile:
    """Converged front: r=0.5, b=0.2, c=1.5, local kernel (criterion 0.6)."""
    return bz.monotone_iterate(bz.Params(0.5, 0.2), 1.5, bz.PointMass())


@pytest.fixture(scope="session")
def profile_weak() -> bz.WaveProfile:
    """Converged front: r=0.75, b=0.3, c=1.05, weak kernel (criterion 0.93)."""
    return bz.monotone_iterate(bz.Params(0.75, 0.3), 1.05, bz.Weak(1.0))


@pytest.fixture(scope="session")
def profile_b1() -> bz.WaveProfile:
    """Converged front with b >= 1 so the sandwich checks are active."""
    return bz.monotone_iterate(bz.Params(0.5, 1.0), 1.6, bz.PointMass())


@pytest.fixture(scope="session")
def desk_sweep() -> list[bz.SweepRow]:
    """Speed sweep r=0.75, tau=1 over the benchmark b values (desk preset)."""
    base = bz.preset_config("desk", r=0.75, b=0.3, tau=1.0)
    return bz.sweep(base, [0.3, 1.0, 4.0, 16.0, 64.0], [1.0])


SCALAR_CASES = [(0.0, 0.0), (0.0, 8.0), (0.75, 2.0)]


@pytest.fixture(scope="session")
def scalar_speeds() -> dict[tuple[float, float], float]:
    """Measured speeds of the scalar benchmark at the three reference cases."""
    out = {}
    for r, l in SCALAR_CASES:
        config = bz.SimConfig(r=r, b=1.0, tau=1.0, x_min=-420.0, x_max=50.0,
                              dx=0.05, dt=0.01, t_end=150.0, snapshot_stride=100)
        track = bz.scalar_run(r, l, config)
        out[(r, l)] = bz.estimate_speed(track).c_est
    return out


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)
