"""Scalar and matrix ingredients of the kernel integrand.

Everything here is a function of the spectrum of ``A_nu`` at a radial
parameter ``0 < r < 1``.  Functions that are evaluated close to ``r = 1``
accept ``log_r`` so callers working in ``s = (1 + r)/(1 - r)`` can pass the
accurate ``log1p(-2/(s + 1))`` instead of ``log(r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg

from .forms import FormCoefficients, check_tuple, increasing_tuples
from .quadric import Direction, LeviSpectrum, QuadricForm, _as_nu, levi_matrix, levi_spectrum

SERIES_MAX_ORDER = 20
SERIES_CROSSOVER_S = 1e6


def _log_r(r, log_r):
    if log_r is not None:
        return np.asarray(log_r, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= 1)):
        raise ValueError("r must lie in (0, 1)")
    return np.log(r)


def f_factor(r, u, log_r=None):
    """``u r^u / (1 - r^u)``, with ``1 - r^u`` formed as ``-expm1(u log r)``."""
    u = np.asarray(u, dtype=float)
    if np.any(u == 0):
        raise ValueError("f(r, u) is only used for u != 0")
    x = u * _log_r(r, log_r)
    return u * np.exp(x) / -np.expm1(x)


def g_factor(r, u, log_r=None):
    """``u / (1 - r^u) = f(r, u) + u = f(r, -u)``."""
    u = np.asarray(u, dtype=float)
    if np.any(u == 0):
        raise ValueError("g(r, u) is only used for u != 0")
    x = u * _log_r(r, log_r)
    return u / -np.expm1(x)


def s_substitution(r):
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= 1)):
        raise ValueError("r must lie in (0, 1)")
    return (1 + r) / (1 - r)


def r_of_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 1):
        raise ValueError("s must be >= 1")
    return (s - 1) / (s + 1)


def log_r_of_s(s):
    """``log r(s)`` without cancellation for large ``s``."""
    return np.log1p(-2.0 / (np.asarray(s, dtype=float) + 1.0))


def dr_over_r(s):
    """Jacobian ``(dr/r)/ds = 2/(s^2 - 1)``."""
    s = np.asarray(s, dtype=float)
    return 2.0 / ((s - 1.0) * (s + 1.0))


# ---------------------------------------------------------------------------
# large-s expansion of f


def _poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_add(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * max(len(a), len(b))
    for i, x in enumerate(a):
        out[i] += x
    for i, y in enumerate(b):
        out[i] += y
    return out


def _series_mul(a, b, nmax):
    # series in w with polynomial-in-u coefficients
    out = [[Fraction(0)] for _ in range(nmax + 1)]
    for i in range(min(len(a), nmax + 1)):
        for j in range(min(len(b), nmax + 1 - i)):
            out[i + j] = _poly_add(out[i + j], _poly_mul(a[i], b[j]))
    return out


@dataclass(frozen=True)
class SeriesTable:
    """Polynomials ``p_{2k}(u)`` with ``2 F(s,u) + u = s + sum_k p_{2k}(u) s^{1-2k}``.

    ``coefficients[k - 1]`` holds ``p_{2k}`` as Fractions over even powers:
    entry ``i`` is the coefficient of ``u^{2i}``.
    """

    order: int
    coefficients: tuple[tuple[Fraction, ...], ...]

    def p(self, k: int, u):
        """Evaluate ``p_{2k}(u)``."""
        c = self.coefficients[k - 1]
        u2 = np.asarray(u, dtype=float) ** 2
        return sum(float(ci) * u2 ** i for i, ci in enumerate(c))

    def F(self, s, u):
        """Truncated expansion of ``F(s, u) = f(r(s), u)``."""
        s = np.asarray(s, dtype=float)
        total = s / 2 - np.asarray(u, dtype=float) / 2
        for k in range(1, len(self.coefficients) + 1):
            total = total + self.p(k, u) / (2 * s ** (2 * k - 1))
        return total

    def format_poly(self, k: int) -> str:
        """``p_{2k}`` with its rational content pulled out, e.g. ``-(u^4 - 5*u^2 + 4)/45``."""
        c = self.coefficients[k - 1]
        lead = next(x for x in reversed(c) if x != 0)
        den = math.lcm(*(x.denominator for x in c))
        num = math.gcd(*(x.numerator for x in c if x != 0))
        content = Fraction(num, den) * (1 if lead > 0 else -1)
        ints = [int(x / content) for x in c]
        terms = []
        for i in reversed(range(len(ints))):
            a = ints[i]
            if a == 0:
                continue
            mono = "" if i == 0 else ("u^2" if i == 1 else f"u^{2 * i}")
            mag = abs(a)
            body = mono if (mono and mag == 1) else (f"{mag}*{mono}" if mono else f"{mag}")
            terms.append(("-" if a < 0 else "+", body))
        inner = terms[0][1] + "".join(f" {sgn} {b}" for sgn, b in terms[1:])
        sign = "-" if content < 0 else ""
        mag = abs(content)
        if mag == 1:
            return f"{sign}({inner})"
        if mag.numerator == 1:
            return f"{sign}({inner})/{mag.denominator}"
        return f"{sign}{mag.numerator}*({inner})/{mag.denominator}"


def F_series(order: int) -> SeriesTable:
    """Exact ``p_{2k}`` for ``2k <= order`` by expanding ``w (g(r(1/w), u) - u/2)`` at ``w = 0``.

    With ``L(w) = log((1-w)/(1+w))/w`` one has
    ``w (g - u/2) = -1/D(w, u) - u w/2``, ``D = sum_{j>=1} (u w)^{j-1} L^j / j!``.
    """
    if order > SERIES_MAX_ORDER:
        raise ValueError(f"series order capped at {SERIES_MAX_ORDER}")
    nmax = max(order, 0)
    L = [[Fraction(-2, k + 1)] if k % 2 == 0 else [Fraction(0)] for k in range(nmax + 1)]
    D = [[Fraction(0)] for _ in range(nmax + 1)]
    Lpow = [[Fraction(1)]] + [[Fraction(0)] for _ in range(nmax)]
    for j in range(1, nmax + 2):
        Lpow = _series_mul(Lpow, L, nmax)
        # (u w)^{j-1} / j!
        shift = j - 1
        coef = Fraction(1, math.factorial(j))
        for i in range(nmax + 1 - shift):
            mono = [Fraction(0)] * shift + [coef]
            D[i + shift] = _poly_add(D[i + shift], _poly_mul(Lpow[i], mono))
    d0 = D[0][0]
    inv = [[Fraction(1) / d0]]
    for k in range(1, nmax + 1):
        acc = [Fraction(0)]
        for i in range(1, k + 1):
            acc = _poly_add(acc, _poly_mul(D[i], inv[k - i]))
        inv.append([-c / d0 for c in acc])
    ftilde = [[-c for c in inv[k]] for k in range(nmax + 1)]
    if nmax >= 1:
        ftilde[1] = _poly_add(ftilde[1], [Fraction(0), Fraction(-1, 2)])
    for k in range(1, nmax + 1, 2):
        if any(c != 0 for c in ftilde[k]):
            raise ArithmeticError(f"nonzero odd coefficient of w^{k}")
    polys = []
    for k in range(1, nmax // 2 + 1):
        coeffs = [2 * c for c in ftilde[2 * k]]
        if any(c != 0 for c in coeffs[1::2]):
            raise ArithmeticError("odd power of u in p_{2k}")
        even = list(coeffs[0::2])
        while len(even) > 1 and even[-1] == 0:
            even.pop()
        polys.append(tuple(even))
    return SeriesTable(order, tuple(polys))


_DEFAULT_TABLE: SeriesTable | None = None


def f_of_s(s, u):
    """``F(s, u) = f(r(s), u)``; the series is used beyond ``s = 1e6``."""
    global _DEFAULT_TABLE
    s = np.asarray(s, dtype=float)
    direct = f_factor(None, u, log_r=log_r_of_s(s))
    if np.all(s <= SERIES_CROSSOVER_S):
        return direct
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = F_series(8)
    return np.where(s > SERIES_CROSSOVER_S, _DEFAULT_TABLE.F(s, u), direct)


# ---------------------------------------------------------------------------
# per-direction quantities


@dataclass(frozen=True)
class IntegrandContext:
    """A point ``(nu, r, z, t)`` of the integration domain with its cached spectrum."""

    Q: QuadricForm
    nu: np.ndarray
    r: float
    z: np.ndarray
    t: np.ndarray
    log_r: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "nu", _as_nu(self.nu))
        object.__setattr__(self, "z", np.asarray(self.z, dtype=complex))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        if not 0 < self.r < 1:
            raise ValueError("r must lie in (0, 1)")
        if self.log_r is None:
            object.__setattr__(self, "log_r", math.log(self.r))

    @cached_property
    def spectrum(self) -> LeviSpectrum:
        return levi_spectrum(self.Q, self.nu)

    @property
    def Z(self) -> np.ndarray:
        """Coordinates ``U(nu)^* z`` in the eigenbasis."""
        return self.spectrum.unitary.conj().T @ self.z

    @property
    def qhat(self) -> np.ndarray | None:
        nt = np.linalg.norm(self.t)
        return self.z / math.sqrt(nt) if nt > 0 else None

    def lambda_values(self) -> np.ndarray:
        return lambda_of(self.spectrum.eigenvalues, self.log_r)


def _spectral(spec: LeviSpectrum, values) -> np.ndarray:
    U = spec.unitary
    return (U * values) @ U.conj().T


def lambda_of(mu, log_r):
    """``Lambda(u) = |u| (1 + r^|u|)/(1 - r^|u|)``."""
    a = np.abs(mu)
    x = a * log_r
    return a * (2.0 + np.expm1(x)) / -np.expm1(x)


def B_product(ctx: IntegrandContext, L: Sequence[int] = ()) -> float:
    """``B_L(r, nu)``: ``r^|mu| |mu|/(1 - r^|mu|)`` over ``(L^c ∩ P) ∪ (L ∩ P^c)``,
    ``|mu|/(1 - r^|mu|)`` over the rest."""
    L = check_tuple(L, ctx.Q.dim_z)
    return float(B_from_spectrum(ctx.spectrum.eigenvalues, ctx.log_r, L))


def B_from_spectrum(mu, log_r, L: Sequence[int] = ()):
    """Vectorized ``B_L`` over a leading batch axis of ``mu``."""
    mu = np.asarray(mu, dtype=float)
    d = mu.shape[-1]
    inL = np.zeros(d, dtype=bool)
    inL[[l - 1 for l in L]] = True
    pos = mu > 0
    a = np.abs(mu)
    x = a * np.asarray(log_r)[..., None] if np.ndim(log_r) else a * log_r
    rpow = np.where(pos != inL, np.exp(x), 1.0)
    return np.prod(a * rpow / -np.expm1(x), axis=-1)


def matrix_r_power(Q: QuadricForm, nu, r, log_r=None) -> np.ndarray:
    """``r^{-A_nu} = U diag(r^{-mu}) U^*``."""
    lr = float(_log_r(r, log_r))
    spec = levi_spectrum(Q, nu)
    return _spectral(spec, np.exp(-lr * spec.eigenvalues))


def matrix_r_power_expm(Q: QuadricForm, nu, r) -> np.ndarray:
    """``r^{-A_nu}`` as ``expm(-log(r) A_nu)`` (scaling and squaring)."""
    return scipy.linalg.expm(-math.log(r) * levi_matrix(Q, nu))


def abs_matrix(Q: QuadricForm, nu) -> np.ndarray:
    """``sqrt(A_nu^2) = U diag(|mu|) U^*``."""
    spec = levi_spectrum(Q, nu)
    return _spectral(spec, np.abs(spec.eigenvalues))


def lambda_matrix(Q: QuadricForm, nu, r, log_r=None) -> np.ndarray:
    lr = float(_log_r(r, log_r))
    spec = levi_spectrum(Q, nu)
    return _spectral(spec, lambda_of(spec.eigenvalues, lr))


def A_value(ctx: IntegrandContext) -> float:
    """``A(r, nu, z) = sum_j Lambda(mu_j) |Z_j|^2``."""
    return float(np.sum(ctx.lambda_values() * np.abs(ctx.Z) ** 2))


def A_grad(ctx: IntegrandContext) -> np.ndarray:
    """Holomorphic gradient ``dA/dz_k = sum_j Lambda_j conj(U_kj) conj(Z_j)``."""
    U = ctx.spectrum.unitary
    return np.conj(U @ (ctx.lambda_values() * ctx.Z))


def A_hess(ctx: IntegrandContext) -> np.ndarray:
    """``d^2 A / dz_k1 dz̄_k2`` as a matrix indexed ``[k1, k2]``."""
    U = ctx.spectrum.unitary
    H = (U * ctx.lambda_values()) @ U.conj().T
    return H.T


def minor_det(mat: np.ndarray, K: Sequence[int], L: Sequence[int]) -> complex:
    """Determinant of the minor on rows ``K`` and columns ``L`` (1-based); 1 when empty."""
    mat = np.asarray(mat)
    K = check_tuple(K, mat.shape[-2])
    L = check_tuple(L, mat.shape[-1])
    if len(K) != len(L):
        raise ValueError("row and column tuples must have equal length")
    if not K:
        return 1.0 + 0j
    sub = mat[np.ix_([k - 1 for k in K], [l - 1 for l in L])]
    return complex(np.linalg.det(sub))


def basis_change_rA(Q: QuadricForm, nu, r, K: Sequence[int], log_r=None) -> FormCoefficients:
    """``c_J = det([r^{-conj(A_nu)}]_{K,J})`` for every ``J`` of the same degree as ``K``."""
    K = check_tuple(K, Q.dim_z)
    M = np.conj(matrix_r_power(Q, nu, r, log_r))
    return FormCoefficients(len(K), {J: minor_det(M, K, J) for J in increasing_tuples(Q.dim_z, len(K))})


def basis_change_eigen_sum(Q: QuadricForm, nu, r, K: Sequence[int]) -> FormCoefficients:
    """``sum_L det(conj(U)_{K,L}) dZ̄^L prod_{j in L} r^{-mu_j}`` expanded in ``dz̄^J``.

    Uses ``dZ̄^L = sum_J det(U_{J,L}) dz̄^J``; this is the eigenvector form of
    :func:`basis_change_rA`.
    """
    K = check_tuple(K, Q.dim_z)
    spec = levi_spectrum(Q, nu)
    U, mu = spec.unitary, spec.eigenvalues
    tuples = increasing_tuples(Q.dim_z, len(K))
    out = {}
    for J in tuples:
        acc = 0j
        for L in tuples:
            acc += (minor_det(U.conj(), K, L) * minor_det(U, J, L)
                    * r ** -sum(mu[l - 1] for l in L))
        out[J] = acc
    return FormCoefficients(len(K), out)


def bl_identity_sides(Q: QuadricForm, nu, r, K: Sequence[int]) -> tuple[FormCoefficients, FormCoefficients]:
    """Both sides of the ``B_L`` repackaging, expanded in ``dz̄^J``.

    Left: ``sum_L det(conj(U)_{K,L}) dZ̄^L B_L(r, nu)`` from the eigenbasis.
    Right: ``det([r^{-conj(A_nu)}]_{K,J}) B(r, nu)`` with the matrix power
    taken by scaling and squaring, so the two routes share no eigenvectors.
    """
    K = check_tuple(K, Q.dim_z)
    spec = levi_spectrum(Q, nu)
    U, mu = spec.unitary, spec.eigenvalues
    lr = math.log(r)
    tuples = increasing_tuples(Q.dim_z, len(K))
    left = {}
    for J in tuples:
        left[J] = sum(minor_det(U.conj(), K, L) * minor_det(U, J, L) * B_from_spectrum(mu, lr, L)
                      for L in tuples)
    M = np.conj(matrix_r_power_expm(Q, nu, r))
    B0 = float(B_from_spectrum(mu, lr))
    right = {J: minor_det(M, K, J) * B0 for J in tuples}
    return FormCoefficients(len(K), left), FormCoefficients(len(K), right)
