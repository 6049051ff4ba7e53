"""Numerical evaluation of the Green kernel ``N_K(z, t)`` and its derivatives.

For a (0,q)-form index ``K`` the coefficient of ``dz̄^J`` is

    K_{n,m} ∫_{S^{m-1}} ∫_0^1 det([r^{-conj(A_nu)}]_{K,J}) B(r,nu)
            D_I[(A(r,nu,z) - i nu.t)^{-(2n+m-1)}] dr/r dnu.

Expanding the minor of ``r^{-conj(A_nu)}`` through the eigenbasis gives the
equivalent sum ``sum_L det(conj(U)_{K,L}) det(U_{J,L}) B_L(r,nu)``; every
``B_L`` is bounded on ``(0, 1)`` so the integrator works with this form.  When
``q = dim_z/2`` the ``L = P`` term does not decay at ``r = 0`` and is replaced
by its difference with ``|det A_nu| (A(0,nu,z) - i nu.t)^{-(2n+m-1)}``.
"""
from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .forms import FormCoefficients, MultiIndex, check_tuple, increasing_tuples
from .quadric import QuadricForm, batch_spectra, levi_matrix, sample_directions
from .scalar import B_from_spectrum, matrix_r_power, minor_det
from .quadrature import (QuadratureOptions, RadialPoint, SphereRule, build_sphere_rule,
                         default_options, integrate_product)

MAX_WEIGHTED_ORDER = 4
Z0_MESSAGE = "iterated quadrature divergent at z=0; evaluate at small |z| and extrapolate"


class DegenerateDirectionError(RuntimeError):
    """A quadrature direction where ``A_nu`` has a (near) zero eigenvalue."""

    def __init__(self, nu, min_abs):
        self.nu = np.asarray(nu)
        super().__init__(f"degenerate direction encountered: nu={np.array2string(self.nu, precision=6)} "
                         f"(min |eigenvalue| {min_abs:.3e})")


@dataclass
class KernelValue:
    coefficients: FormCoefficients
    est_error: float
    nodes_used: int
    warnings: list[str] = field(default_factory=list)


def dimensional_constant(dim_z: int, codim: int) -> float:
    """``4^{dim_z} (dim_z + m - 2)! / (2 (2 pi)^{m + dim_z})``."""
    if dim_z + codim > 60:
        raise OverflowError(f"dimensional constant overflows for dim_z + codim = {dim_z + codim} > 60")
    return 4.0 ** dim_z * math.factorial(dim_z + codim - 2) / (2 * (2 * math.pi) ** (codim + dim_z))


def kernel_power(dim_z: int, codim: int) -> int:
    return dim_z + codim - 1


def homogeneity_exponent(dim_z: int, codim: int, weighted_order: int = 0) -> int:
    """``N(lambda z, lambda^2 t) = lambda^{-e} N(z, t)`` with ``e`` returned here."""
    return 2 * kernel_power(dim_z, codim) + weighted_order


# ---------------------------------------------------------------------------
# derivative bookkeeping

Term = tuple[int, tuple[int, ...], tuple[tuple[int, int], ...]]


def derivative_terms(n_slots: int) -> dict[Term, int]:
    """Expand ``d_{s_1} ... d_{s_k} phi(W)`` for ``W`` quadratic in the slot variables.

    A term ``(j, firsts, pairs) -> c`` stands for ``c phi^{(j)}(W) prod
    dW/d_{firsts} prod d^2W/d_{pair}``; third derivatives of ``W`` vanish.
    """
    terms: dict[Term, int] = {(0, (), ()): 1}
    for s in range(n_slots):
        new: dict[Term, int] = defaultdict(int)
        for (j, firsts, pairs), c in terms.items():
            new[(j + 1, firsts + (s,), pairs)] += c
            for idx, f in enumerate(firsts):
                rest = firsts[:idx] + firsts[idx + 1:]
                new[(j, rest, pairs + ((f, s),))] += c
        terms = {k: v for k, v in new.items() if v}
    return terms


def _phi_coeff(p: int, j: int) -> float:
    c = 1.0
    for i in range(j):
        c *= -(p + i)
    return c


# ---------------------------------------------------------------------------
# per-node data


class KernelIntegrand:
    """Everything about the integrand that does not depend on ``r``.

    Evaluating at a :class:`RadialPoint` returns an array ``(nodes, len(Js))``
    of ``det(...) B D_I[W^{-p}]`` values to be integrated against ``dr/r``.
    """

    def __init__(self, Q: QuadricForm, q: int, K: Sequence[int], z, t, I: MultiIndex | None,
                 rule: SphereRule, complex_mode: bool = False, subtract: bool | None = None):
        d, n, m = Q.dim_z, Q.n, Q.codim
        self.Q, self.q, self.K = Q, q, tuple(K)
        self.Js = increasing_tuples(d, q)
        self.p = kernel_power(d, m)
        self.I = I if I is not None else MultiIndex.zero(d, m)
        self.slots = self.I.slots()
        self.terms = derivative_terms(len(self.slots))
        self.subtract = (q == n) if subtract is None else subtract
        z = np.asarray(z, dtype=complex)
        t = np.asarray(t, dtype=float)
        nu = rule.nu
        self.nu = nu
        if complex_mode:
            mats = levi_matrix(Q, nu.astype(complex))
            lam, V = np.linalg.eig(mats)
            order = np.argsort(-lam.real, axis=1, kind="stable")
            lam = np.take_along_axis(lam, order, axis=1)
            V = np.take_along_axis(V, order[:, None, :], axis=2)
            Vinv = np.linalg.inv(V)
            sign = np.where(lam.real > 0, 1.0, -1.0)
            a = lam * sign
            npos = (lam.real > 0).sum(axis=1)
            min_abs = np.abs(lam).min(axis=1)
        else:
            mu, V = batch_spectra(Q, nu.real)
            Vinv = np.conj(np.swapaxes(V, 1, 2))
            a = np.abs(mu)
            npos = (mu > 0).sum(axis=1)
            min_abs = a.min(axis=1)
        bad = np.nonzero((npos != n) | (min_abs < 1e-12))[0]
        if len(bad):
            i = bad[np.argmin(min_abs[bad])]
            raise DegenerateDirectionError(nu[i], float(min_abs[i]))
        self.a = a
        self.min_abs = float(np.min(np.abs(a)))
        self.V, self.Vinv = V, Vinv
        self.Zr = np.einsum("nij,j->ni", Vinv, z)
        self.Zl = np.einsum("j,nji->ni", np.conj(z), V)
        self.tdot = nu @ t
        self.det_abs = np.prod(a, axis=1)
        # basis-change coefficients C[node, J, L] = det(Vinv[L, K]) det(V[J, L])
        Ls = self.Js
        kidx = [k - 1 for k in self.K]
        if q == 0:
            self.C = np.ones((len(nu), 1, 1), dtype=complex)
        else:
            left = np.stack([np.linalg.det(Vinv[:, [l - 1 for l in L]][:, :, kidx]) for L in Ls], axis=1)
            right = np.stack([np.stack([np.linalg.det(V[:, [j - 1 for j in J]][:, :, [l - 1 for l in L]])
                                        for L in Ls], axis=1) for J in self.Js], axis=1)
            self.C = right * left[:, None, :]
        P = tuple(range(1, n + 1))
        inP = np.zeros(d, dtype=bool)
        inP[:n] = True
        self.E = np.stack([(a * (inP != self._mask(L, d))).sum(axis=1) for L in Ls], axis=1)
        self.iP = Ls.index(P) if (self.subtract and P in Ls) else None
        if self.subtract and self.iP is None:
            raise ValueError("subtraction requested but P is not an index tuple of this degree")
        self.complex_mode = complex_mode

    @staticmethod
    def _mask(L, d):
        mk = np.zeros(d, dtype=bool)
        mk[[l - 1 for l in L]] = True
        return mk

    @property
    def lower_decay(self) -> float:
        """Exponential decay rate in ``-log r`` of the integrand near ``r = 0``."""
        Es = self.E.real.copy()
        if self.iP is not None:
            Es[:, self.iP] = np.inf
        dec = float(np.min(Es)) if Es.size else self.min_abs
        if not np.isfinite(dec) or dec <= 0:
            dec = self.min_abs
        return max(min(dec, self.min_abs * self.Q.dim_z), 1e-3)

    # -- D_I of W^{-p} given Lambda -----------------------------------------
    def _deriv(self, W, Lam, need_H: bool):
        if not self.slots:
            return W ** (-self.p)
        V, Vinv = self.V, self.Vinv
        firsts = {}
        gz = gzb = H = None
        for axis, k in self.slots:
            if axis == "z" and gz is None:
                gz = np.einsum("ni,nik->nk", self.Zl * Lam, Vinv)
            if axis == "zb" and gzb is None:
                gzb = np.einsum("nki,ni->nk", V, Lam * self.Zr)
        if need_H:
            H = np.einsum("nai,ni,nib->nab", V, Lam, Vinv)
        for s, (axis, k) in enumerate(self.slots):
            if axis == "z":
                firsts[s] = gz[:, k]
            elif axis == "zb":
                firsts[s] = gzb[:, k]
            else:
                firsts[s] = -1j * self.nu[:, k]
        out = np.zeros(W.shape, dtype=complex)
        for (j, fs, pairs), c in self.terms.items():
            term = c * _phi_coeff(self.p, j) * W ** (-self.p - j)
            for f in fs:
                term = term * firsts[f]
            for f, s in pairs:
                (ax1, k1), (ax2, k2) = self.slots[f], self.slots[s]
                if {ax1, ax2} != {"z", "zb"}:
                    term = 0.0
                    break
                kz, kzb = (k1, k2) if ax1 == "z" else (k2, k1)
                term = term * H[:, kzb, kz]
            out = out + term
        return out

    def _needs_hessian(self) -> bool:
        axes = [a for a, _ in self.slots]
        return "z" in axes and "zb" in axes

    def __call__(self, rp: RadialPoint) -> np.ndarray:
        lr = rp.log_r
        ax = self.a * lr
        x = np.exp(ax)
        em = -np.expm1(ax)
        Lam = self.a * (1 + x) / em
        ZZ = self.Zl * self.Zr
        W = np.sum(Lam * ZZ, axis=1) - 1j * self.tdot
        need_H = self._needs_hessian()
        G = self._deriv(W, Lam, need_H)
        base = np.prod(self.a / em, axis=1)
        BL = base[:, None] * np.exp(lr * self.E)
        if self.iP is None:
            coef = np.einsum("njl,nl->nj", self.C, BL)
            return coef * G[:, None]
        # q = n: the L = P term carries the subtraction
        BL_noP = BL.copy()
        BL_noP[:, self.iP] = 0.0
        coef = np.einsum("njl,nl->nj", self.C, BL_noP) * G[:, None]
        return coef + self.p_terms(rp)[0]

    def p_terms(self, rp: RadialPoint) -> tuple[np.ndarray, np.ndarray]:
        """The ``L = P`` contribution with and without the subtraction, shape ``(nodes, len(Js))``.

        The first array is ``C_P [B_P D_I W^{-p} - |det A_nu| D_I W_0^{-p}]``,
        the second ``C_P B_P D_I W^{-p}``; both are integrated against ``dr/r``.
        """
        if self.iP is None:
            raise ValueError("no L = P term for this form degree")
        lr = rp.log_r
        ax = self.a * lr
        x = np.exp(ax)
        em = -np.expm1(ax)
        Lam = self.a * (1 + x) / em
        ZZ = self.Zl * self.Zr
        W = np.sum(Lam * ZZ, axis=1) - 1j * self.tdot
        need_H = self._needs_hessian()
        G = self._deriv(W, Lam, need_H)
        base = np.prod(self.a / em, axis=1)
        W0 = np.sum(self.a * ZZ, axis=1) - 1j * self.tdot
        if not self.slots:
            delta = np.sum(2 * self.a * x / em * ZZ, axis=1)
            bracket = self.det_abs * (G * np.expm1(-np.sum(np.log1p(-x), axis=1))
                                      + W0 ** (-self.p) * np.expm1(-self.p * np.log1p(delta / W0)))
        else:
            G0 = self._deriv(W0, np.broadcast_to(self.a, Lam.shape), need_H)
            bracket = base * G - self.det_abs * G0
        CP = self.C[:, :, self.iP]
        return CP * bracket[:, None], CP * (base * G)[:, None]


def subtraction_bracket(Q: QuadricForm, K: Sequence[int], nu, r: float, z, t,
                        I: MultiIndex | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise ``L = P`` term at ``q = dim_z/2``: (subtracted, unsubtracted), per ``J``.

    Values are coefficients of ``dr/r``; the unsubtracted term tends to a
    nonzero constant as ``r -> 0`` (so its ``dr`` density grows like ``1/r``)
    while the subtracted one vanishes like a positive power of ``r``.
    """
    nu = np.asarray(nu, dtype=float)
    single = SphereRule(nu=nu[None, :], x=np.zeros(1), fine=np.ones(1), coarse=np.ones(1),
                        axis=np.eye(Q.codim)[0])
    ki = KernelIntegrand(Q, Q.n, K, z, t, I, single, subtract=True)
    sub, raw = ki.p_terms(RadialPoint(r, math.log(r)))
    return sub[0], raw[0]


def integrand(ctx, K: Sequence[int], J: Sequence[int], I: MultiIndex | None = None) -> complex:
    """Pointwise ``det([r^{-conj(A_nu)}]_{K,J}) B(r,nu) D_I[(A - i nu.t)^{-p}] / r``.

    ``ctx`` is an :class:`~crgreen.scalar.IntegrandContext`.  Uses the
    matrix-minor form directly (not the eigenbasis sum used by the integrator).
    """
    Q = ctx.Q
    K = check_tuple(K, Q.dim_z)
    J = check_tuple(J, Q.dim_z)
    if len(K) != len(J):
        raise ValueError("K and J must have the same degree")
    det = minor_det(np.conj(matrix_r_power(Q, ctx.nu, ctx.r, ctx.log_r)), K, J) if K else 1.0
    B = float(B_from_spectrum(ctx.spectrum.eigenvalues, ctx.log_r))
    single = SphereRule(nu=ctx.nu[None, :], x=np.zeros(1), fine=np.ones(1), coarse=np.ones(1),
                        axis=np.eye(Q.codim)[0])
    ki = KernelIntegrand(Q, 0, (), ctx.z, ctx.t, I, single, subtract=False)
    lam = ki.a * (1 + np.exp(ki.a * ctx.log_r)) / -np.expm1(ki.a * ctx.log_r)
    W = np.sum(lam * ki.Zl * ki.Zr, axis=1) - 1j * ki.tdot
    D = ki._deriv(W, lam, ki._needs_hessian())[0]
    return complex(det * B * D / ctx.r)


# ---------------------------------------------------------------------------
# drivers


def _validate_request(Q: QuadricForm, q: int, K, z, t):
    if not 0 <= q <= Q.dim_z:
        raise ValueError(f"form degree q={q} outside 0..{Q.dim_z}")
    K = check_tuple(K, Q.dim_z)
    if len(K) != q:
        raise ValueError(f"K={K} does not have length q={q}")
    z = np.asarray(z, dtype=complex).reshape(-1)
    t = np.asarray(t, dtype=float).reshape(-1)
    if z.shape != (Q.dim_z,) or t.shape != (Q.codim,):
        raise ValueError(f"expected z of length {Q.dim_z} and t of length {Q.codim}")
    nz, nt = np.linalg.norm(z), np.linalg.norm(t)
    if nz == 0 and nt == 0:
        raise ValueError("the kernel is singular at the origin (rho = 0)")
    if nz == 0:
        raise ValueError(Z0_MESSAGE)
    return K, z, t


def _min_abs_eigenvalue(Q: QuadricForm) -> float:
    mu, _ = batch_spectra(Q, sample_directions(Q.codim, 8, seed=1))
    return float(np.abs(mu).min())


def eval_kernel_deriv(Q: QuadricForm, q: int, K: Sequence[int], I: MultiIndex | None, z, t,
                      opts: QuadratureOptions | None = None) -> KernelValue:
    """``D^I N_K(z, t)`` as a (0,q)-form; ``I = None`` means no derivative."""
    K, z, t = _validate_request(Q, q, K, z, t)
    if I is not None:
        if len(I.dz) != Q.dim_z or len(I.dt) != Q.codim:
            raise ValueError("multiindex dimensions do not match the quadric")
        if I.weighted_order > MAX_WEIGHTED_ORDER:
            raise ValueError(f"weighted derivative order {I.weighted_order} > {MAX_WEIGHTED_ORDER} "
                             "is not supported")
    opts = opts or default_options(Q.dim_z, Q.codim)
    # abs_tol is read in units of the kernel's size at this point, so that the
    # adaptive refinement is the same along every dilation ray
    rho = max(float(np.linalg.norm(z)), math.sqrt(float(np.linalg.norm(t))))
    wo = I.weighted_order if I is not None else 0
    opts = replace(opts, abs_tol=opts.abs_tol * rho ** (-homogeneity_exponent(Q.dim_z, Q.codim, wo)))
    nt = float(np.linalg.norm(t))
    scale = None
    if nt > 0:
        qhat2 = float(np.vdot(z, z).real) / nt
        scale = qhat2 * _min_abs_eigenvalue(Q)
    rule = build_sphere_rule(Q.codim, t, opts, cluster_scale=scale)
    ki = KernelIntegrand(Q, q, K, z, t, I, rule, complex_mode=(opts.mode == "contour"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = integrate_product(ki, rule, opts, measure="dr/r",
                                lower_decay=ki.lower_decay, upper_decay=float(Q.codim))
    const = dimensional_constant(Q.dim_z, Q.codim)
    coeffs = FormCoefficients(q, {J: complex(const * v) for J, v in zip(ki.Js, res.value)})
    return KernelValue(coeffs, const * res.est_error, res.nodes_used, list(res.warnings))


def eval_kernel(Q: QuadricForm, q: int, K: Sequence[int], z, t,
                opts: QuadratureOptions | None = None) -> KernelValue:
    """``N_K(z, t)`` as a (0,q)-form."""
    return eval_kernel_deriv(Q, q, K, None, z, t, opts)
