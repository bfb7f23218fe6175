"""Acceptance suite: every criterion checked at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion.  The expensive artifacts (desk sweep, scalar benchmark runs,
converged profiles) come from session fixtures in conftest.py.
"""

import math

import numpy as np
import pytest

import bzfronts as bz
from bzfronts.cli import main as cli_main
from bzfronts.gridfn import Grid
from bzfronts.verify import CheckStatus


def report(number: int, passed: bool, text: str) -> None:
    print(f"\nACCEPTANCE {number:02d} [{'PASS' if passed else 'FAIL'}] {text}")
    assert passed, f"criterion {number}: {text}"


def test_criterion_1_pulled_regime_speed(desk_sweep):
    row = next(r for r in desk_sweep if r.b == 0.3)
    ok = abs(row.c_est - 1.0) <= 0.05
    report(1, ok, f"pulled regime r=0.75 tau=1 b=0.3: c_est = {row.c_est:.4f} "
                  f"(target 1.00 +/- 0.05)")


def test_criterion_2_speed_bracket_and_trend(desk_sweep):
    cs = {r.b: r.c_est for r in desk_sweep}
    bs = sorted(cs)
    in_bracket = all(0.95 <= cs[b] <= 2.05 for b in bs)
    nondecreasing = all(cs[b2] >= cs[b1] - 0.01 for b1, b2 in zip(bs, bs[1:]))
    slow_limit = cs[64.0] < 2.0 and cs[64.0] > cs[1.0] + 0.05
    ok = in_bracket and nondecreasing and slow_limit
    seq = ", ".join(f"b={b:g}: {cs[b]:.3f}" for b in bs)
    report(2, ok, f"bracket [0.95, 2.05], monotone in b, slow approach to 2: {seq}")


def test_criterion_3_scalar_benchmark(scalar_speeds):
    targets = {(0.0, 0.0): 2.0, (0.0, 8.0): 2.5, (0.75, 2.0): 1.0}
    ok = all(abs(scalar_speeds[k] - v) <= 0.05 for k, v in targets.items())
    seq = ", ".join(f"(r={r:g},l={l:g}): {scalar_speeds[(r, l)]:.4f} vs {targets[(r, l)]}"
                    for r, l in targets)
    report(3, ok, f"scalar benchmark speeds: {seq}")


def test_criterion_4_kappa_closed_forms():
    worst = 0.0
    for tau in (0.1, 1.0, 5.0):
        for r in (0.25, 0.5, 0.75):
            for c in (2 * math.sqrt(1 - r) + 0.05, 2.0):
                for K in (bz.Weak(tau), bz.Strong(tau)):
                    err = abs(bz.kappa_moment_quadrature(K, r, c, 1)
                              - bz.kappa_moment(K, r, c, 1))
                    worst = max(worst, err)
    exact = bz.kappa_moment(bz.Weak(1.0), 0.75, 1.0, 1)
    ok = worst <= 1e-6 and exact == 0.8
    report(4, ok, f"kappa quadrature vs closed forms: worst {worst:.2e} "
                  f"(tol 1e-6); kappa_1(weak, r=0.75) = {exact}")


def test_criterion_5_profile_solver_and_verify(profile_pm, profile_weak):
    lines = []
    ok = True
    for p in (profile_pm, profile_weak):
        rep = bz.run_all(p)
        good = p.converged and p.residual < 1e-5 and rep.overall
        ok = ok and good
        lines.append(f"(r={p.params.r:g}, b={p.params.b:g}, c={p.c:g}): "
                     f"residual {p.residual:.1e}, verify "
                     f"{'PASS' if rep.overall else 'FAIL'}")
    report(5, ok, "monotone iteration fixed points: " + "; ".join(lines))


def test_criterion_6_iterate_sandwich(profile_pm, profile_weak):
    ok = True
    lines = []
    for p in (profile_pm, profile_weak):
        worst = p.ordering.worst_violation()
        ok = ok and p.ordering.iterations > 0 and worst <= 1e-12
        lines.append(f"{p.ordering.iterations} iterations, worst violation {worst:.1e}")
    report(6, ok, "sandwich ordering of iterates (tol 1e-12): " + "; ".join(lines))


def test_criterion_7_supersolution_certificate():
    kern = bz.truncate(bz.Weak(1.0), 20.0)
    rep = bz.certify_supersolution(bz.Params(0.75, 1.0), 2.2, kern, 1e-3)
    ok = rep.certified and rep.d1_max < 0 and rep.d2_max < 0 and rep.slope_drop > 0
    report(7, ok, f"corrected super-solution at (0.75, 1, 2.2), eps=1e-3: "
                  f"max D1 = {rep.d1_max:.2e}, max D2 = {rep.d2_max:.2e}, "
                  f"corner slope drop = {rep.slope_drop:.3f}")


def test_criterion_8_lb_operator_properties(rng):
    g = Grid.from_bounds(-30.0, 30.0, 0.01)
    b_lo, b_hi, c = 0.8, 1.3, 1.2
    worst_mono, worst_strict, worst_res, worst_shift = 0.0, -np.inf, 0.0, 0.0
    strict_ok = True
    for _ in range(20):
        steep = rng.uniform(0.3, 1.5)
        center = rng.uniform(-5.0, 5.0)
        vals = 1.0 / (1.0 + np.exp(-steep * (g.nodes - center)))
        vals = np.maximum.accumulate(np.clip(vals, 0, 1))
        phi = bz.GridFunction(g, vals, 0.0, 1.0)
        phi_hi = bz.GridFunction(g, np.minimum(1.0, vals * 1.05), 0.0, 1.0)
        p = bz.solve_Lb(phi, b_lo, c)
        worst_mono = max(worst_mono, float(np.max(p.values - bz.solve_Lb(phi_hi, b_lo, c).values)))
        q = bz.solve_Lb(phi, b_hi, c)
        worst_strict = max(worst_strict, float(np.max(p.values - q.values)))
        # strict separation wherever values sit above solver rounding
        live = (p.values > 1e-10) & (q.values < 1.0 - 1e-10)
        strict_ok = strict_ok and bool(np.all(p.values[live] < q.values[live]))
        th = 1.0 - p.values
        res = (th[2:] - 2 * th[1:-1] + th[:-2]) / g.dt ** 2 \
            - c * (th[2:] - th[:-2]) / (2 * g.dt) - b_lo * vals[1:-1] * th[1:-1]
        worst_res = max(worst_res, float(np.max(np.abs(res))))
        h = 0.61
        shift_gap = np.abs(bz.solve_Lb(phi.shifted(h), b_lo, c).values
                           - bz.solve_Lb(phi, b_lo, c).shifted(h).values)
        mask = (g.nodes > -20) & (g.nodes < 20)
        worst_shift = max(worst_shift, float(np.max(shift_gap[mask])))
    ok = (worst_mono <= 1e-12 and strict_ok and worst_strict <= 1e-12
          and worst_res < 1e-8 and worst_shift <= g.dt ** 2)
    report(8, ok, f"Lb on 20 random profiles: monotonicity gap {worst_mono:.1e}, "
                  f"strict in b {'holds' if strict_ok else 'fails'} "
                  f"(gap {worst_strict:.1e}), residual {worst_res:.1e}, "
                  f"translation gap {worst_shift:.1e} (tol dt^2 = {g.dt**2:.0e})")


def _synthetic_track(speed: float) -> bz.FrontTrack:
    from bzfronts.pde_sim import PdeState
    x = np.arange(-110.0, 40.0, 0.05)
    snaps = []
    for t in np.arange(0.0, 41.0, 1.0):
        u = 1.0 / (1.0 + np.exp(-(x + speed * t + 20.0)))
        snaps.append(PdeState(x, u, np.zeros(0), np.zeros(0), float(t)))
    return bz.track_front(snaps)


def test_criterion_9_estimator_soundness():
    ok = True
    lines = []
    for speed in (0.7, 1.3, 2.0):
        est = bz.estimate_speed(_synthetic_track(speed))
        good = abs(est.c_est - speed) < 0.01 and est.settled_digits >= 2
        ok = ok and good
        lines.append(f"{speed}: {est.c_est:.6f} ({est.settled_digits} digits)")
    report(9, ok, "synthetic translating fronts recovered: " + "; ".join(lines))


def test_criterion_10_sweep_determinism(tmp_path):
    args = ["sweep", "--r", "0.75", "--b", "0.3,4", "--tau", "1",
            "--x-min", "-30", "--x-max", "10", "--t-end", "12", "--stride", "10"]
    out1, out2 = tmp_path / "j1.csv", tmp_path / "j8.csv"
    assert cli_main([*args, "--out", str(out1), "--jobs", "1"]) == 0
    assert cli_main([*args, "--out", str(out2), "--jobs", "8"]) == 0
    ok = out1.read_bytes() == out2.read_bytes()
    report(10, ok, "sweep CSVs byte-identical for --jobs 1 and --jobs 8")
