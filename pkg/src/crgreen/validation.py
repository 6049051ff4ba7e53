"""Closed-form oracles, sphere integrals and scan drivers used to validate the kernel."""
from __future__ import annotations

import csv
import io
import math
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .forms import FormCoefficients, MultiIndex
from .kernel import (KernelValue, dimensional_constant, eval_kernel, eval_kernel_deriv,
                     homogeneity_exponent)
from .quadric import QuadricForm
from .quadrature import QuadratureOptions, default_options, gauss_jacobi

EXAMPLE_NAMES = ("ex12_1", "ex12_2", "ex12_3", "ex12_4", "ex12_5")


@dataclass(frozen=True)
class OracleId:
    name: str
    b: float = 0.0

    def __post_init__(self):
        if self.name not in EXAMPLE_NAMES:
            raise ValueError(f"unknown example {self.name!r}")
        if self.name == "ex12_5" and abs(self.b) > 0.5:
            raise ValueError("ex12_5 needs |b| <= 0.5")

    @classmethod
    def parse(cls, text: str, b: float | None = None) -> OracleId:
        """Accept ``ex12_3``, ``12.3`` or ``12.5(b=0.1)``."""
        text = text.strip()
        m = re.fullmatch(r"(?:ex)?12[._]([1-5])(?:\(\s*(?:b\s*=\s*)?([-+0-9.eE]+)\s*\))?", text)
        if not m:
            raise ValueError(f"cannot parse example id {text!r}")
        name = f"ex12_{m.group(1)}"
        bval = float(m.group(2)) if m.group(2) else (b if b is not None else (0.1 if name == "ex12_5" else 0.0))
        return cls(name, bval if name == "ex12_5" else 0.0)

    def label(self) -> str:
        return f"{self.name}(b={self.b:g})" if self.name == "ex12_5" else self.name


# ---------------------------------------------------------------------------
# example quadrics


def _ex12_5_matrices(b: float) -> np.ndarray:
    M = np.zeros((4, 4, 4), dtype=complex)
    M[0][0, 1] = M[0][1, 0] = M[0][2, 3] = M[0][3, 2] = 1
    M[1][0, 3] = M[1][3, 0] = -1
    M[1][1, 2] = M[1][2, 1] = 1
    M[2][0, 1], M[2][1, 0], M[2][2, 3], M[2][3, 2] = -1j, 1j, 1j, -1j
    M[3][0, 3], M[3][3, 0] = -1j * (1 + b), 1j * (1 + b)
    M[3][1, 2], M[3][2, 1] = 1j, -1j
    return M


def example_quadric(oid: OracleId | str) -> QuadricForm:
    """The Hermitian matrices of the closed-form examples (in the displayed ``A_nu`` convention)."""
    if isinstance(oid, str):
        oid = OracleId.parse(oid)
    a1 = np.array([[0, 1], [1, 0]], dtype=complex)
    a2 = np.diag([1.0, -1.0]).astype(complex)
    a3 = np.array([[0, -1j], [1j, 0]])
    if oid.name == "ex12_1":
        return QuadricForm(2, 2, np.array([a1, a2]), name="ex12_1", family="ex12_1")
    if oid.name == "ex12_2":
        return QuadricForm(2, 3, np.array([a1, a2, a3]), name="ex12_2", family="ex12_2")
    if oid.name in ("ex12_3", "ex12_4"):
        return QuadricForm(4, 4, _ex12_5_matrices(0.0), name=oid.name, family=oid.name)
    return QuadricForm(4, 4, _ex12_5_matrices(oid.b), name=oid.label(), family="ex12_5",
                       parameters={"b": oid.b})


# ---------------------------------------------------------------------------
# closed forms


def rho(z, t) -> float:
    """Homogeneous norm ``max(|z|, |t|^{1/2})``."""
    return max(float(np.linalg.norm(z)), math.sqrt(float(np.linalg.norm(t))))


def oracle_value(oid: OracleId | str, q: int, K: Sequence[int], z, t) -> FormCoefficients:
    """Closed-form kernel values of the examples (as displayed)."""
    if isinstance(oid, str):
        oid = OracleId.parse(oid)
    K = tuple(K)
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    z2 = float(np.vdot(z, z).real)
    t2 = float(t @ t)
    D = z2 * z2 + t2
    key = (oid.name, q, K)
    if key == ("ex12_1", 0, ()):
        return FormCoefficients(0, {(): complex(D ** -1.5 / (2 * math.pi ** 3))})
    if key == ("ex12_2", 0, ()):
        return FormCoefficients(0, {(): complex(2 / math.pi ** 3 * D ** -2)})
    if key == ("ex12_3", 0, ()):
        return FormCoefficients(0, {(): complex(15 / (2 * math.pi ** 6) * D ** -3.5)})
    if key == ("ex12_4", 1, (1,)):
        if np.any(t[1:] != 0):
            raise ValueError("the ex12_4 oracle is only available for t = (tau, 0, 0, 0)")
        tau = float(t[0])
        c = 15 / math.pi ** 6 * D ** -3.5
        return FormCoefficients(1, {
            (1,): complex(c * (-2 * t2 + 5 * z2 * z2) / (2 * D)),
            (2,): complex(c * 1j * 7 * z2 * tau / D),
            (3,): 0j,
            (4,): 0j,
        })
    raise ValueError(f"no closed form for {oid.label()} with q={q}, K={K}")


def semi_analytic_ex12_4(z, tau: float) -> FormCoefficients:
    """Example 12.4 through its one-dimensional reduction.

    After the radial integrals are done in closed form the ``dz̄_1`` and
    ``dz̄_2`` coefficients are single integrals over ``x = nu_1`` against
    ``4 pi sqrt(1 - x^2) dx``; they are evaluated here by adaptive quadrature.
    Requires ``tau > 0`` and ``z != 0``.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    z = np.asarray(z, dtype=complex)
    q2 = float(np.vdot(z, z).real) / tau
    if q2 <= 0:
        raise ValueError("z must be nonzero")
    c = dimensional_constant(4, 4) / 2 / tau ** 7

    def r1(a):  # int_0^1 (1+r^2)/((1-r)^4 (s q^2 + i a)^7) dr
        return (-a * a + 6j * a * q2 + 25 * q2 * q2) / (240 * q2 ** 3 * (1j * a + q2) ** 6)

    def r2(a):  # int_0^1 (1-r^2)/((1-r)^4 (s q^2 + i a)^7) dr
        return (1j * a + 6 * q2) / (60 * q2 * q2 * (1j * a + q2) ** 6)

    def cquad(fn):
        wt = lambda x: 4 * math.pi * math.sqrt(1 - x * x)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            kw = dict(epsabs=0, epsrel=1e-12, limit=400, points=[0.0])
            re_ = quad(lambda x: (fn(x) * wt(x)).real, -1, 1, **kw)[0]
            im_ = quad(lambda x: (fn(x) * wt(x)).imag, -1, 1, **kw)[0]
        return re_ + 1j * im_

    c1 = c * cquad(lambda x: r1(-x))
    c2 = c * cquad(lambda x: x * r2(-x))
    return FormCoefficients(1, {(1,): c1, (2,): c2, (3,): 0j, (4,): 0j})


def normalization_candidates(dim_z: int, codim: int) -> dict[str, float]:
    """The two prefactors in play for ``(dim_z, codim) = (2, 3)``.

    ``formula`` is :func:`dimensional_constant`; ``displayed`` replaces
    ``(2 pi)^{m + dim_z}`` by ``(2 pi)^{m + dim_z - 1}``.
    """
    k = dimensional_constant(dim_z, codim)
    return {"formula": k, "displayed": k * 2 * math.pi}


def nonsmooth_eigen_oracle(b: float, nu) -> tuple[float, float]:
    """``(Lambda_+, Lambda_-)``, the squared eigenvalues of the perturbed example."""
    if abs(b) > 0.5:
        raise ValueError("|b| <= 0.5 required")
    n1, n2, n3, n4 = (float(x) for x in nu)
    base = n1 ** 2 + n2 ** 2 + n3 ** 2 + 0.5 * (b * b + 2 * b + 2) * n4 ** 2
    split = abs(n4) * abs(b) * math.sqrt((b + 2) ** 2 * n4 ** 2 / 4 + n1 ** 2 + n3 ** 2)
    return base + split, base - split


# ---------------------------------------------------------------------------
# sphere integrals


def b_integral(m: int, ell: int, E: int, i2: int, r_hat: float, n_nodes: int = 64) -> complex:
    """``int_{-1}^{1} (1 - x^2)^{(m-3)/2} x^{ell-E+i2} (3 r_hat - i x)^{-(m+ell+i2)} dx``.

    Evaluated on the upper unit semicircle ``x = e^{i theta}``, ``theta`` from
    ``pi`` to ``0``; the integrand is analytic in the upper half disk for
    ``r_hat >= 0`` (principal branches), so the value equals the real-axis
    integral and stays finite at ``r_hat = 0``.
    """
    if m < 2:
        raise ValueError("m >= 2 required")
    if not 0 <= E <= ell + i2:
        raise ValueError("need 0 <= E <= ell + i2")
    if r_hat < 0:
        raise ValueError("r_hat must be nonnegative")
    alpha = 0.5 * (m - 3)
    y, w = gauss_jacobi(n_nodes, alpha, alpha)
    theta = 0.5 * np.pi * (1 - y)
    x = np.exp(1j * theta)
    # (1 - x^2)^alpha = (2 sin theta)^alpha e^{i alpha (theta - pi/2)}, sin theta = cos(pi y/2)
    smooth = (2 * np.cos(0.5 * np.pi * y) / (1 - y * y)) ** alpha
    jac = -0.5j * np.pi * x
    vals = smooth * np.exp(1j * alpha * (theta - 0.5 * np.pi)) * x ** (ell - E + i2) \
        * (3 * r_hat - 1j * x) ** (-(m + ell + i2)) * jac
    return complex(np.sum(w * vals))


def b_integral_real_axis(m: int, ell: int, E: int, i2: int, r_hat: float) -> complex:
    """The same integral by adaptive quadrature on ``[-1, 1]`` (needs ``r_hat > 0``)."""
    if r_hat <= 0:
        raise ValueError("the real-axis route needs r_hat > 0")
    alpha = 0.5 * (m - 3)
    f = lambda x: x ** (ell - E + i2) * (3 * r_hat - 1j * x) ** (-(m + ell + i2))
    opts = dict(limit=500, epsabs=0, epsrel=1e-11, weight="alg", wvar=(alpha, alpha))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(lambda x: f(x).real, -1, 1, **opts)[0] + 1j * quad(lambda x: f(x).imag, -1, 1, **opts)[0]


# ---------------------------------------------------------------------------
# scans and cross-checks


@dataclass
class DecayRow:
    direction_id: int
    rho: float
    raw: float
    scaled: float
    est_error: float = 0.0

    def __post_init__(self):
        if self.rho <= 0 or self.scaled < 0:
            raise ValueError("invalid decay row")


def unit_rho_sample(dim_z: int, codim: int, n_directions: int = 50, seed: int = 0,
                    min_z: float = 0.2) -> list[tuple[np.ndarray, np.ndarray]]:
    """Fixed-seed points with ``max(|z|, |t|^{1/2}) = 1`` and ``|z| >= min_z``."""
    rng = np.random.default_rng(seed)
    pts = []
    for k in range(n_directions):
        zd = rng.standard_normal(dim_z) + 1j * rng.standard_normal(dim_z)
        zd /= np.linalg.norm(zd)
        td = rng.standard_normal(codim)
        td /= np.linalg.norm(td)
        if k % 2 == 0:  # |t| = 1, |z| in [min_z, 1]
            zn, tn = min_z + (1 - min_z) * rng.random(), 1.0
        else:  # |z| = 1, |t| in [0, 1]
            zn, tn = 1.0, rng.random()
        pts.append((zn * zd, tn * td))
    return pts


def _map(fn, items, threads: int | None):
    items = list(items)
    if threads is not None and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def decay_scan(Q: QuadricForm, q: int, K: Sequence[int], I: MultiIndex | None = None,
               n_directions: int = 50, scales: Sequence[float] | None = None,
               opts: QuadratureOptions | None = None, seed: int = 0,
               threads: int | None = None) -> list[DecayRow]:
    """Evaluate ``|D^I N|`` along dilation rays through a sample of the unit ``rho`` sphere.

    Rows are ordered by ``(direction index, scale)``.  ``scaled`` is ``rho^e
    |D^I N|`` with ``e = 2(dim_z + m - 1) + <I>``; it is constant along each ray
    up to quadrature error and its maximum is the empirical ``C_I``.
    """
    scales = [2.0 ** k for k in range(-4, 5)] if scales is None else list(scales)
    opts = opts or default_options(Q.dim_z, Q.codim)
    wo = I.weighted_order if I is not None else 0
    e = homogeneity_exponent(Q.dim_z, Q.codim, wo)
    jobs = [(k, lam, z, t) for k, (z, t) in enumerate(unit_rho_sample(Q.dim_z, Q.codim, n_directions, seed))
            for lam in scales]

    def run(job):
        k, lam, z, t = job
        zz, tt = lam * z, lam * lam * t
        val = eval_kernel_deriv(Q, q, K, I, zz, tt, opts)
        raw = val.coefficients.norm()
        r = rho(zz, tt)
        return DecayRow(k, r, raw, r ** e * raw, val.est_error)

    return _map(run, jobs, threads)


def ray_variation(rows: Iterable[DecayRow]) -> float:
    """Largest relative spread ``(max - min)/max`` of ``scaled`` along a ray."""
    by: dict[int, list[float]] = {}
    for row in rows:
        by.setdefault(row.direction_id, []).append(row.scaled)
    return max((max(v) - min(v)) / max(v) for v in by.values())


def _fd_derivative(fn, z, t, slots, hz, ht):
    if not slots:
        return fn(z, t)
    (axis, k), rest = slots[0], slots[1:]
    out = 0
    for sgn in (1, -1):
        if axis == "t":
            tt = t.copy()
            tt[k] += sgn * ht
            out = out + sgn * _fd_derivative(fn, z, tt, rest, hz, ht) / (2 * ht)
        else:
            # d/dz = (d/dx - i d/dy)/2 and d/dzbar = (d/dx + i d/dy)/2
            s = -1j if axis == "z" else 1j
            zx = z.copy()
            zx[k] += sgn * hz
            zy = z.copy()
            zy[k] += sgn * 1j * hz
            out = out + sgn * (_fd_derivative(fn, zx, t, rest, hz, ht)
                               + s * _fd_derivative(fn, zy, t, rest, hz, ht)) / (4 * hz)
    return out


def fd_crosscheck(Q: QuadricForm, q: int, K: Sequence[int], I: MultiIndex,
                  points: Sequence[tuple], opts: QuadratureOptions | None = None,
                  step: float = 1e-4) -> float:
    """Max relative difference between analytic derivatives and central differences.

    The step is ``step * rho`` in ``z`` and ``step * rho^2`` in ``t``.  The
    kernel is evaluated at ``rel_tol = 1e-11`` so that quadrature noise stays
    well below the ``O(step^2)`` truncation error, also for second derivatives.
    """
    if I.order == 0:
        return 0.0
    if I.weighted_order > 2 and I.order > 2:
        raise ValueError("fd_crosscheck supports <I> <= 2")
    opts = opts or QuadratureOptions(rel_tol=1e-11, abs_tol=1e-300)
    worst = 0.0
    for z, t in points:
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        r = rho(z, t)
        exact = eval_kernel_deriv(Q, q, K, I, z, t, opts).coefficients.vector()
        fn = lambda zz, tt: eval_kernel(Q, q, K, zz, tt, opts).coefficients.vector()
        approx = _fd_derivative(fn, z, t, I.slots(), step * r, step * r * r)
        err = np.linalg.norm(exact - approx) / max(np.linalg.norm(exact), 1e-300)
        worst = max(worst, float(err))
    return worst


# ---------------------------------------------------------------------------
# validation suite


def qhat_points(dim_z: int, codim: int, count: int, seed: int = 0, lo: float = 0.3, hi: float = 3.0,
                t_axis: bool = False) -> list[tuple[np.ndarray, np.ndarray]]:
    """Fixed points with ``|qhat| = |z|/|t|^{1/2}`` log-spaced over ``[lo, hi]``."""
    rng = np.random.default_rng(seed)
    out = []
    for k, qh in enumerate(np.geomspace(lo, hi, count)):
        tn = 0.5 + rng.random() * 1.5
        if t_axis:
            td = np.zeros(codim)
            td[0] = 1.0
        else:
            td = rng.standard_normal(codim)
            td /= np.linalg.norm(td)
        zd = rng.standard_normal(dim_z) + 1j * rng.standard_normal(dim_z)
        zd /= np.linalg.norm(zd)
        out.append((qh * math.sqrt(tn) * zd, tn * td))
    return out


@dataclass
class ValidationRow:
    example: str
    point: str
    component: str
    computed: complex
    oracle: complex
    rel_err: float
    est_error: float
    tolerance: float
    note: str = ""
    informational: bool = False

    @property
    def passed(self) -> bool:
        return self.informational or bool(self.rel_err <= self.tolerance)

    @property
    def status(self) -> str:
        return "info" if self.informational else ("pass" if self.passed else "FAIL")


def _fmt_point(z, t) -> str:
    zs = " ".join(f"{c.real:.6g}{c.imag:+.6g}j" for c in np.asarray(z, dtype=complex))
    ts = " ".join(f"{x:.6g}" for x in np.asarray(t, dtype=float))
    return f"z=[{zs}] t=[{ts}]"


@dataclass
class ValidationReport:
    rows: list[ValidationRow] = field(default_factory=list)
    normalization: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def _scalar_rows(label, oid, evaluated, tol, note="", scale=1.0):
    rows = []
    for z, t, v in evaluated:
        got = v.coefficients[()] * scale
        ref = oracle_value(oid, 0, (), z, t)[()]
        rows.append(ValidationRow(label, _fmt_point(z, t), "()", got, ref, abs(got - ref) / abs(ref),
                                  v.est_error * abs(scale), tol, note))
    return rows


def _evaluate(Q, pts, opts, q=0, K=()):
    return [(z, t, eval_kernel(Q, q, K, z, t, opts)) for z, t in pts]


def validate_example(oid: OracleId | str, opts: QuadratureOptions | None = None,
                     n_points: int | None = None, **overrides) -> ValidationReport:
    """Compare the kernel with the closed forms of one example.

    Without ``opts`` the per-dimension defaults are used, updated by
    ``overrides``; ``mode="contour"`` is honoured only for codim 2 and 3.
    """
    if isinstance(oid, str):
        oid = OracleId.parse(oid)
    Q = example_quadric(oid)
    if opts is None:
        if overrides.get("mode") == "contour" and Q.codim > 3:
            overrides = {k: v for k, v in overrides.items() if k != "mode"}
        opts = default_options(Q.dim_z, Q.codim, **overrides)
    rep = ValidationReport()
    if oid.name == "ex12_1":
        pts = qhat_points(2, 2, n_points or 10, seed=1)
        rep.rows += _scalar_rows("ex12_1", oid, _evaluate(Q, pts, opts), 1e-5)
    elif oid.name == "ex12_2":
        pts = qhat_points(2, 3, n_points or 10, seed=2)
        cands = normalization_candidates(2, 3)
        evaluated = _evaluate(Q, pts, opts)
        results = {}
        for name, c in cands.items():
            scale = c / cands["formula"]
            results[name] = _scalar_rows(f"ex12_2[{name}]", oid, evaluated, 1e-5,
                                         note=f"prefactor {name}", scale=scale)
        matching = [n for n, rows in results.items() if all(r.passed for r in rows)]
        rep.normalization["ex12_2"] = ",".join(matching) if matching else "none"
        # keep the matching normalization as the verdict; the other is reported for the record
        for name, rows in results.items():
            if name not in matching:
                for r in rows:
                    r.informational = True
                    r.note += " (non-matching candidate)"
            rep.rows += rows
        if len(matching) != 1:
            rep.rows.append(ValidationRow("ex12_2", "-", "normalization", 0j, 0j, math.inf, 0.0, 0.0,
                                          f"expected exactly one matching prefactor, got {matching}"))
    elif oid.name == "ex12_3":
        pts = qhat_points(4, 4, n_points or 5, seed=3)
        rep.rows += _scalar_rows("ex12_3", oid, _evaluate(Q, pts, opts), 1e-3)
    elif oid.name == "ex12_4":
        pts = qhat_points(4, 4, n_points or 5, seed=4, t_axis=True)
        for z, t in pts:
            v = eval_kernel(Q, 1, (1,), z, t, opts)
            ref = oracle_value(oid, 1, (1,), z, t)
            semi = semi_analytic_ex12_4(z, float(t[0]))
            nrm = v.coefficients.norm()
            for J in [(1,), (2,)]:
                got = v.coefficients[J]
                rep.rows.append(ValidationRow("ex12_4", _fmt_point(z, t), f"dzb{J[0]}", got, ref[J],
                                              abs(got - ref[J]) / abs(ref[J]), v.est_error, 1e-3,
                                              "closed form as displayed"))
                rep.rows.append(ValidationRow("ex12_4[reduced]", _fmt_point(z, t), f"dzb{J[0]}", got,
                                              semi[J], abs(got - semi[J]) / abs(semi[J]), v.est_error,
                                              1e-3, "one-dimensional reduction"))
            for J in [(3,), (4,)]:
                got = v.coefficients[J]
                rep.rows.append(ValidationRow("ex12_4", _fmt_point(z, t), f"dzb{J[0]}", got, 0j,
                                              abs(got) / nrm, v.est_error, 1e-6, "relative to vector norm"))
    else:
        # no closed-form kernel: spectral oracle and continuity in b
        rng = np.random.default_rng(5)
        for k in range(20):
            nu = rng.standard_normal(4)
            nu /= np.linalg.norm(nu)
            from .quadric import levi_spectrum
            mu = levi_spectrum(Q, nu).eigenvalues
            lp, lm = nonsmooth_eigen_oracle(oid.b, nu)
            got = np.sort(mu ** 2)
            ref = np.sort([lp, lp, lm, lm])
            err = float(np.max(np.abs(got - ref)))
            rep.rows.append(ValidationRow(oid.label(), f"nu={np.round(nu, 6).tolist()}", "mu^2",
                                          complex(got[-1]), complex(ref[-1]), err, 0.0, 1e-9,
                                          "squared eigenvalues vs Lambda_+-"))
        z = np.array([0.5, 0.3j, 0.2, -0.4])
        t = np.array([0.6, 0.2, -0.3, 0.5])
        Q0 = example_quadric(OracleId("ex12_5", 0.0))
        Qs = example_quadric(OracleId("ex12_5", 1e-3))
        a = eval_kernel(Qs, 0, (), z, t, opts).coefficients[()]
        b0 = eval_kernel(Q0, 0, (), z, t, opts).coefficients[()]
        rep.rows.append(ValidationRow("ex12_5(b=0.001)", _fmt_point(z, t), "()", a, b0,
                                      abs(a - b0) / abs(b0), 0.0, 1e-2, "continuity in b"))
    return rep


def run_validation(examples: Sequence[str] = ("12.1", "12.2", "12.3", "12.4", "12.5"),
                   opts: QuadratureOptions | None = None, b: float | None = None,
                   **overrides) -> ValidationReport:
    total = ValidationReport()
    for ex in examples:
        rep = validate_example(OracleId.parse(ex, b), opts, **overrides)
        total.rows += rep.rows
        total.normalization.update(rep.normalization)
    return total


# ---------------------------------------------------------------------------
# CSV output


def fmt17(x) -> str:
    return format(float(x), ".17g")


def decay_csv(rows: Sequence[DecayRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["direction_id", "rho", "raw", "scaled"])
    for r in rows:
        w.writerow([r.direction_id, fmt17(r.rho), fmt17(r.raw), fmt17(r.scaled)])
    return buf.getvalue()


def validation_csv(report: ValidationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["example", "point", "component", "computed_re", "computed_im", "oracle_re", "oracle_im",
                "rel_err", "est_error", "tolerance", "status", "note"])
    for r in report.rows:
        w.writerow([r.example, r.point, r.component, fmt17(r.computed.real), fmt17(r.computed.imag),
                    fmt17(r.oracle.real), fmt17(r.oracle.imag), fmt17(r.rel_err), fmt17(r.est_error),
                    fmt17(r.tolerance), r.status, r.note])
    return buf.getvalue()
