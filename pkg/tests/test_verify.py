import copy

import numpy as np
import pytest

import bzfronts as bz
from bzfronts.gridfn import Grid, GridFunction
from bzfronts.verify import (
    CheckStatus, check_asymptotics, check_kpp_bound, check_lemma2,
    check_monotone_range, check_residual, check_sandwich,
)


def perturbed(profile: bz.WaveProfile, phi=None, psi=None) -> bz.WaveProfile:
    p = copy.deepcopy(profile)
    if phi is not None:
        p.phi = GridFunction(p.grid, phi, p.phi.left_tail, p.phi.right_tail)
    if psi is not None:
        p.psi = GridFunction(p.grid, psi, p.psi.left_tail, p.psi.right_tail)
    return p


def test_full_suite_passes_on_converged_profiles(profile_pm, profile_weak, profile_b1):
    for p in (profile_pm, profile_weak, profile_b1):
        report = bz.run_all(p)
        assert report.overall, report.render()


def test_sandwich_applicability(profile_pm, profile_b1):
    assert check_sandwich(profile_pm).status is CheckStatus.SKIPPED  # b = 0.2
    assert check_sandwich(profile_b1).status is CheckStatus.PASS


def test_lemma2_branches(profile_pm, profile_b1):
    # b = 0.2 <= 1/2 and b = 1 > 1/2 exercise both branches of M
    assert "M=2" in check_lemma2(profile_pm).detail
    assert check_lemma2(profile_b1).status is CheckStatus.PASS


def test_monotone_range_detects_flipped_pair(profile_pm):
    vals = profile_pm.phi.values.copy()
    i = profile_pm.grid.index_of(0.0)
    vals[i], vals[i + 1] = vals[i + 1], vals[i]
    bad = perturbed(profile_pm, phi=vals)
    chk = check_monotone_range(bad)
    assert chk.status is CheckStatus.FAIL
    assert abs(chk.location - 0.0) < 0.1


def test_monotone_range_detects_constant_profile(profile_pm):
    const = np.full(profile_pm.grid.n, 0.5)
    bad = perturbed(profile_pm, phi=const, psi=const)
    assert check_monotone_range(bad).status is CheckStatus.FAIL


def test_residual_detects_noise(profile_pm, rng):
    noisy = profile_pm.phi.values + rng.normal(0.0, 1e-3, profile_pm.grid.n)
    bad = perturbed(profile_pm, phi=np.clip(np.maximum.accumulate(noisy), 0, 1))
    assert check_residual(bad).status is CheckStatus.FAIL


def test_residual_zero_on_equilibrium():
    g = Grid.from_bounds(-10, 10, 0.01)
    zero = GridFunction(g, np.zeros(g.n), 0.0, 0.0)
    p = bz.WaveProfile(zero, zero, 1.5, bz.Params(0.5, 0.2), bz.PointMass(),
                       0, 0.0, 1.5, True)
    chk = check_residual(p)
    assert chk.detail.endswith("0.000e+00")


def test_lemma2_right_tail_slack(profile_b1):
    # at the right end psi^2 -> 1 while M phi -> M = 2 > 1
    p = profile_b1
    M = 1.0 / (1 - 0.5) * 1.0 / (2 * 1.0 - 1.0)
    slack = M * p.phi.values[-1] - p.psi.values[-1] ** 2
    assert slack > 0.5


def test_asymptotics_rate_and_flux(profile_pm):
    chk = check_asymptotics(profile_pm)
    assert chk.status is CheckStatus.PASS
    assert "slope" in chk.detail and "flux_err" in chk.detail


def test_kpp_bound_pass_and_skip(profile_b1, profile_pm):
    assert check_kpp_bound(profile_b1).status is CheckStatus.PASS
    assert check_kpp_bound(profile_pm).status is CheckStatus.SKIPPED


def test_kpp_bound_skips_fast_decay(profile_b1):
    # a mu-rate tail makes the prefactor normalization meaningless
    g = profile_b1.grid
    mu = bz.char_roots(0.5, 1.6).mu
    e = np.exp(mu * g.nodes)
    fake = perturbed(profile_b1, phi=e / (1 + e), psi=2 * e / (1 + 2 * e))
    chk = check_kpp_bound(fake)
    assert chk.status is CheckStatus.SKIPPED
    assert "tail rate" in chk.detail


def test_reports_are_reproducible(profile_pm):
    r1 = bz.run_all(profile_pm)
    r2 = bz.run_all(profile_pm)
    assert r1.checks == r2.checks
    assert r1.render() == r2.render()


def test_report_render_overall(profile_pm):
    rep = bz.run_all(profile_pm)
    text = rep.render()
    assert "overall: PASS" in text
    assert rep.overall
