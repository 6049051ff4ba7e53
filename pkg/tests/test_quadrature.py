import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crgreen.quadrature import (QuadratureOptions, build_sphere_rule, default_options, gauss_jacobi,
                                householder_to, integrate_product, sphere_rule, x_breakpoints)


def sphere_area(m):
    return 2 * math.pi ** (m / 2) / math.gamma(m / 2)


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_sphere_area(m):
    rule = build_sphere_rule(m)
    assert rule.fine.sum() == pytest.approx(sphere_area(m), rel=1e-12)
    assert rule.coarse.sum() == pytest.approx(sphere_area(m), rel=1e-6)
    np.testing.assert_allclose(np.linalg.norm(rule.nu, axis=1), 1.0, atol=1e-14)


def test_second_moment_s2():
    rule = build_sphere_rule(3)
    assert np.sum(rule.fine * rule.nu[:, 0] ** 2) == pytest.approx(4 * math.pi / 3, rel=1e-12)


def test_moment_against_monte_carlo():
    rng = np.random.default_rng(3)
    v = rng.standard_normal((200000, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    mc = 4 * math.pi * np.mean(v[:, 0] ** 2)
    rule = build_sphere_rule(3)
    assert np.sum(rule.fine * rule.nu[:, 0] ** 2) == pytest.approx(mc, rel=1e-2)


def test_circle_times_half_interval():
    rule = build_sphere_rule(2)
    res = integrate_product(lambda rp: np.ones(len(rule)), rule, r_range=(0.0, 0.5))
    assert res.value[0] == pytest.approx(math.pi, rel=1e-10)


def test_radial_full_interval():
    rule = build_sphere_rule(2)
    # int_0^1 r^2 (1 - r)^3 dr = 1/60
    res = integrate_product(lambda rp: np.full(len(rule), rp.r ** 2 * (2 / (rp.s + 1) if rp.s else 1 - rp.r) ** 3),
                            rule, measure="dr", lower_decay=3.0, upper_decay=4.0)
    assert res.value[0] == pytest.approx(2 * math.pi / 60, rel=1e-8)


def test_truncation_covered_by_error_estimate():
    rule = build_sphere_rule(2)
    # a density that does not vanish at r = 1 loses about 2/s_max to the cut
    res = integrate_product(lambda rp: np.full(len(rule), rp.r ** 2), rule, measure="dr", lower_decay=3.0)
    gap = abs(res.value[0] - 2 * math.pi / 3)
    assert gap > 1e-6
    assert res.est_error >= 0.5 * gap


def test_aligned_rule_integrates_polynomials():
    t = np.array([0.3, -1.2, 0.5, 0.1])
    rule = build_sphere_rule(4, t, cluster_scale=0.01)
    np.testing.assert_allclose(rule.nu @ (t / np.linalg.norm(t)), rule.x, atol=1e-13)
    # int_{S^3} nu_1^2 = area / 4
    assert np.sum(rule.fine * rule.nu[:, 0] ** 2) == pytest.approx(sphere_area(4) / 4, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_householder(v):
    a = np.array(v) / np.linalg.norm(v)
    R = householder_to(a)
    np.testing.assert_allclose(R @ np.eye(3)[0], a, atol=1e-12)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-12)


def test_breakpoints_cluster():
    bp = x_breakpoints(0.01)
    assert bp[0] == -1 and bp[-1] == 1 and 0.0 in bp
    assert np.all(np.diff(bp) > 0)
    assert np.min(np.abs(bp[bp != 0])) == pytest.approx(0.005)
    assert list(x_breakpoints(None)) == [-1.0, 0.0, 1.0] or len(x_breakpoints(None)) >= 3


def test_gauss_jacobi_weight():
    x, w = gauss_jacobi(10, 0.5, 0.5)
    assert w.sum() == pytest.approx(math.pi / 2, rel=1e-13)


def test_lower_sphere_rules():
    for k, area in [(0, 2.0), (1, 2 * math.pi), (2, 4 * math.pi)]:
        rule = sphere_rule(k, 8, 16)
        assert rule.fine.sum() == pytest.approx(area, rel=1e-12)


def test_contour_rule_requires_small_codim():
    with pytest.raises(ValueError):
        build_sphere_rule(4, np.ones(4), QuadratureOptions(mode="contour"))


def test_options_validation():
    with pytest.raises(ValueError):
        QuadratureOptions(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureOptions(s_max=5)
    with pytest.raises(ValueError):
        QuadratureOptions(mode="spiral")
    assert default_options(2, 2).rel_tol == 1e-7
    assert default_options(4, 4).rel_tol == 1e-5
