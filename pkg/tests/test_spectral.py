import math

import numpy as np
import pytest

import bzfronts as bz
from bzfronts.errors import ComplexRoots, DivergentMoment, DomainError


def test_char_roots_double_root_at_r0():
    roots = bz.char_roots(0.0, 2.0)
    assert roots.lam == roots.mu == pytest.approx(1.0)
    assert roots.degenerate


def test_char_roots_quadratic_oracle():
    roots = bz.char_roots(0.75, 1.25)
    assert roots.lam == pytest.approx(0.25, abs=1e-14)
    assert roots.mu == pytest.approx(1.0, abs=1e-14)
    roots = bz.char_roots(0.5, 1.5)
    assert roots.lam == pytest.approx(0.5, abs=1e-14)
    assert roots.mu == pytest.approx(1.0, abs=1e-14)


def test_char_roots_identities_random(rng):
    for _ in range(200):
        r = rng.uniform(0.0, 0.999)
        c = 2 * math.sqrt(1 - r) + rng.uniform(1e-6, 2.0)
        roots = bz.char_roots(r, c)
        assert roots.lam + roots.mu == pytest.approx(c, abs=1e-12)
        assert roots.lam * roots.mu == pytest.approx(1 - r, abs=1e-12)
        assert 0 < roots.lam <= roots.mu


def test_char_roots_complex():
    with pytest.raises(ComplexRoots):
        bz.char_roots(0.5, 1.0)


def test_classify_local_boundary_case():
    cls = bz.classify(bz.Params(0.5, 1.0), bz.PointMass())
    assert cls.criterion_value == pytest.approx(1.0)
    assert cls.verdict is bz.Verdict.PULLED_CERTIFIED


def test_classify_weak_threshold_case():
    cls = bz.classify(bz.Params(0.75, 5.0 / 12.0), bz.Weak(1.0))
    assert cls.criterion_value == pytest.approx(1.0, abs=1e-12)
    assert cls.verdict is bz.Verdict.PULLED_CERTIFIED
    assert cls.kappa == pytest.approx(0.8)


def test_classify_pushed_suspected():
    cls = bz.classify(bz.Params(0.75, 4.0), bz.Weak(1.0))
    assert cls.criterion_value == pytest.approx(0.75 + 0.75 * 4.0 * 0.8)
    assert cls.verdict is bz.Verdict.PUSHED_SUSPECTED


def test_classify_undetermined(monkeypatch):
    def boom(*a, **k):
        raise DivergentMoment("forced")
    monkeypatch.setattr("bzfronts.spectral.kappa_moment", boom)
    cls = bz.classify(bz.Params(0.5, 1.0), bz.Weak(1.0))
    assert cls.verdict is bz.Verdict.UNDETERMINED
    assert math.isnan(cls.criterion_value)


def test_classify_monotone_in_b():
    # increasing b never turns PushedSuspected back into PulledCertified
    for kernel in (bz.PointMass(), bz.Weak(1.0), bz.Strong(2.0)):
        last_pushed = False
        for b in (0.05, 0.2, 0.5, 1.0, 2.0, 8.0, 32.0):
            v = bz.classify(bz.Params(0.6, b), kernel).verdict
            pushed = v is bz.Verdict.PUSHED_SUSPECTED
            assert pushed or not last_pushed
            last_pushed = pushed


def test_weak_kernel_threshold_values():
    assert bz.weak_kernel_threshold(0.75, 1.0) == pytest.approx(5.0 / 12.0)
    assert bz.weak_kernel_threshold(0.75, 0.0) == pytest.approx(1.0 / 3.0)
    assert bz.weak_kernel_threshold(0.5, 0.0) == pytest.approx(1.0)


def test_weak_kernel_threshold_increasing_in_tau():
    taus = np.linspace(0.0, 10.0, 21)
    vals = [bz.weak_kernel_threshold(0.6, t) for t in taus]
    assert np.all(np.diff(vals) > 0)


def test_threshold_matches_classifier_boundary():
    r, tau = 0.35, 2.0
    b_max = bz.weak_kernel_threshold(r, tau)
    assert bz.classify(bz.Params(r, b_max), bz.Weak(tau)).verdict is bz.Verdict.PULLED_CERTIFIED
    assert bz.classify(bz.Params(r, b_max * 1.01), bz.Weak(tau)).verdict is bz.Verdict.PUSHED_SUSPECTED


def test_pushed_scalar_speed_values():
    assert bz.pushed_scalar_speed(0.0, 2.0) == pytest.approx(2.0)
    assert bz.pushed_scalar_speed(0.0, 8.0) == pytest.approx(2.5)
    assert bz.pushed_scalar_speed(0.75, 8.0) == pytest.approx(1.25)


def test_pushed_scalar_speed_continuity_and_bound():
    for r in (0.0, 0.3, 0.75):
        left = bz.pushed_scalar_speed(r, 2.0 - 1e-12)
        right = bz.pushed_scalar_speed(r, 2.0 + 1e-12)
        assert left == pytest.approx(right, abs=1e-9)
        floor = bz.critical_speed(r)
        for l in np.linspace(0.0, 12.0, 25):
            v = bz.pushed_scalar_speed(r, l)
            assert v >= floor - 1e-12
            if l <= 2.0:
                assert v == pytest.approx(floor)
            else:
                assert v > floor


def test_params_validation():
    with pytest.raises(DomainError):
        bz.Params(0.0, 1.0)
    with pytest.raises(DomainError):
        bz.Params(1.0, 1.0)
    with pytest.raises(DomainError):
        bz.Params(0.5, 0.0)
