import csv
import io
import math

import numpy as np
import pytest

from crgreen.forms import MultiIndex
from crgreen.quadrature import QuadratureOptions
from crgreen.validation import (OracleId, b_integral, b_integral_real_axis, decay_csv, decay_scan,
                                example_quadric, fd_crosscheck, nonsmooth_eigen_oracle, normalization_candidates,
                                oracle_value, qhat_points, ray_variation, rho, semi_analytic_ex12_4,
                                unit_rho_sample, validate_example, validation_csv)
from crgreen.quadric import levi_spectrum


def test_oracle_id_parse():
    assert OracleId.parse("12.3") == OracleId("ex12_3")
    assert OracleId.parse("ex12_5") == OracleId("ex12_5", 0.1)
    assert OracleId.parse("12.5(b=0.2)").b == 0.2
    assert OracleId.parse("12.1", b=0.3).b == 0.0
    assert OracleId("ex12_5", 0.25).label() == "ex12_5(b=0.25)"
    with pytest.raises(ValueError):
        OracleId.parse("12.7")
    with pytest.raises(ValueError):
        OracleId("ex12_5", 0.9)


def test_example_quadrics():
    Q1 = example_quadric("12.1")
    np.testing.assert_array_equal(Q1.matrices, [[[0, 1], [1, 0]], [[1, 0], [0, -1]]])
    Q2 = example_quadric("12.2")
    np.testing.assert_array_equal(Q2.matrices[2], [[0, -1j], [1j, 0]])
    np.testing.assert_array_equal(example_quadric("12.5(b=0)").matrices, example_quadric("12.3").matrices)


def test_oracle_values():
    assert oracle_value("12.1", 0, (), [1, 0], [0, 0])[()] == pytest.approx(1 / (2 * math.pi ** 3))
    z = np.array([1, 0, 0, 0])
    assert oracle_value("12.3", 0, (), z, [1, 0, 0, 0])[()] == pytest.approx(15 / (2 * math.pi ** 6) * 2 ** -3.5)
    v = oracle_value("12.4", 1, (1,), np.zeros(4), [1, 0, 0, 0])
    assert v[(1,)] == pytest.approx(-15 / math.pi ** 6)
    assert v[(2,)] == 0
    with pytest.raises(ValueError):
        oracle_value("12.4", 1, (1,), z, [1, 1, 0, 0])
    with pytest.raises(ValueError):
        oracle_value("12.5", 0, (), z, [1, 0, 0, 0])


def test_semi_analytic_reduction_matches_displayed_first_component():
    z = np.array([0.4, 0.3j, 0.1, -0.2])
    semi = semi_analytic_ex12_4(z, 0.7)
    ref = oracle_value("12.4", 1, (1,), z, [0.7, 0, 0, 0])
    assert semi[(1,)] == pytest.approx(ref[(1,)], rel=1e-8)
    # the reduction gives half of the closed-form second component; the 4-D kernel agrees with the reduction
    assert semi[(2,)] == pytest.approx(ref[(2,)] / 2, rel=1e-8)


def test_normalization_candidates():
    c = normalization_candidates(2, 3)
    assert c["displayed"] / c["formula"] == pytest.approx(2 * math.pi)
    assert c["displayed"] == pytest.approx(16 * 6 / (2 * (2 * math.pi) ** 4))


def test_nonsmooth_oracle():
    assert nonsmooth_eigen_oracle(0.0, [0.5, 0.5, 0.5, 0.5]) == pytest.approx((1, 1))
    assert nonsmooth_eigen_oracle(0.1, [0, 0, 0, 1]) == pytest.approx((1.21, 1))
    assert nonsmooth_eigen_oracle(0.1, [1, 0, 0, 0]) == pytest.approx((1, 1))
    Q = example_quadric("12.5(b=0.1)")
    rng = np.random.default_rng(0)
    for _ in range(20):
        nu = rng.standard_normal(4)
        nu /= np.linalg.norm(nu)
        lp, lm = nonsmooth_eigen_oracle(0.1, nu)
        np.testing.assert_allclose(np.sort(levi_spectrum(Q, nu).eigenvalues ** 2), sorted([lp, lp, lm, lm]),
                                   atol=1e-9)


def test_b_integral_cases():
    assert abs(b_integral(3, 0, 0, 0, 0.0)) <= 1e-10
    assert abs(b_integral(3, 1, 1, 0, 0.0)) > 1e-3
    for m in (2, 3, 4, 5):
        for ell in range(5):
            for i2 in range(3):
                for E in range(0, ell + i2 + 1, 2):
                    assert abs(b_integral(m, ell, E, i2, 0.0)) <= 1e-8


@pytest.mark.parametrize("args", [(3, 2, 1, 0), (4, 1, 0, 1), (2, 3, 2, 0), (5, 0, 0, 2)])
def test_b_integral_routes_agree(args):
    for rh in (0.05, 0.3, 1.0):
        a = b_integral(*args, rh)
        b = b_integral_real_axis(*args, rh)
        assert abs(a - b) <= 1e-8 * max(1.0, abs(b))


def _line_fit_residual(vals, xs):
    vals = np.asarray(vals)
    A = np.vstack([np.ones_like(xs), xs]).T
    res = vals - A @ np.linalg.lstsq(A, vals, rcond=None)[0]
    return float(np.max(np.abs(res)))


def test_b_integral_smooth_at_zero():
    xs = np.array([0.0, 1e-3, 2e-3])
    for args in [(3, 0, 0, 0), (4, 2, 0, 0), (5, 1, 0, 1)]:
        vals = [b_integral(*args, x) for x in xs]
        assert _line_fit_residual(np.real(vals), xs) <= 1e-6
        assert _line_fit_residual(np.imag(vals), xs) <= 1e-6
    # odd E carries genuine curvature; the second difference still shrinks like h^2
    for args in [(3, 1, 1, 0), (2, 3, 1, 1)]:
        sd = [abs(b_integral(*args, 0.0) - 2 * b_integral(*args, h) + b_integral(*args, 2 * h))
              for h in (1e-3, 5e-4)]
        assert sd[0] / sd[1] == pytest.approx(4.0, rel=1e-2)


def test_rho_and_samples():
    assert rho([3, 4], [1, 0]) == 5
    assert rho([0.1, 0], [0, 4]) == 2
    for z, t in unit_rho_sample(4, 4, 10):
        assert rho(z, t) == pytest.approx(1.0)
        assert np.linalg.norm(z) >= 0.2 - 1e-12
    for z, t in qhat_points(2, 2, 5):
        assert 0.3 - 1e-12 <= np.linalg.norm(z) / math.sqrt(np.linalg.norm(t)) <= 3 + 1e-12


def test_decay_scan_ex12_1():
    Q = example_quadric("12.1")
    rows = decay_scan(Q, 0, (), n_directions=4, scales=[1.0, 2.0, 4.0])
    assert [r.direction_id for r in rows] == [0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]
    assert ray_variation(rows) <= 1e-6
    z, t = unit_rho_sample(2, 2, 4)[0]
    ref = oracle_value("12.1", 0, (), z, t)[()].real
    assert rows[0].scaled == pytest.approx(ref, rel=1e-5)
    text = decay_csv(rows)
    back = list(csv.DictReader(io.StringIO(text)))
    assert float(back[4]["scaled"]) == rows[4].scaled


def test_decay_scan_threads_deterministic():
    Q = example_quadric("12.1")
    a = decay_scan(Q, 0, (), n_directions=3, scales=[0.5, 1.0])
    b = decay_scan(Q, 0, (), n_directions=3, scales=[0.5, 1.0], threads=3)
    assert decay_csv(a) == decay_csv(b)


def test_fd_crosscheck_small():
    Q = example_quadric("12.1")
    pts = qhat_points(2, 2, 2, seed=9)
    assert fd_crosscheck(Q, 0, (), MultiIndex.zero(2, 2), pts) == 0.0
    assert fd_crosscheck(Q, 0, (), MultiIndex.parse("zb2", 2, 2), pts) <= 1e-4


def test_validate_ex12_1_report():
    rep = validate_example("12.1", n_points=3)
    assert rep.passed and len(rep.rows) == 3
    text = validation_csv(rep)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert all(r["status"] == "pass" for r in rows)
    assert complex(float(rows[0]["computed_re"]), float(rows[0]["computed_im"])) == rep.rows[0].computed


def test_validate_ex12_2_records_normalization():
    rep = validate_example("12.2", n_points=2)
    assert rep.normalization["ex12_2"] == "displayed"
    assert rep.passed
    assert {r.status for r in rep.rows} == {"pass", "info"}
