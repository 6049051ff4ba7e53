"""Product quadrature over ``S^{m-1} x (0, 1)``.

The sphere is parameterized as ``nu = R (x, sqrt(1 - x^2) omega)`` with
``omega`` on ``S^{m-2}`` and ``R`` a Householder reflection taking the first
axis to ``t/|t|``; the surface measure becomes ``(1 - x^2)^{(m-3)/2} dx
d omega``.  Every sphere rule carries two weight vectors on a shared node set
(a fine rule and an embedded coarse rule) so one pass of the integrand yields
both the value and an error estimate for the angular integral.

The radial variable is split at ``r = 1/2``.  Below, ``u = -log r`` turns the
algebraic decay at ``r = 0`` into exponential decay; above, ``s = (1 + r)/(1 -
r)`` followed by ``v = log s`` does the same at ``r = 1``.  Both pieces are
integrated adaptively with :func:`scipy.integrate.quad_vec`.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import roots_jacobi

# 15-point Kronrod extension of the 7-point Gauss rule (nonnegative half).
_K15_X = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_K15_W = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_G7_W = np.array([0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327])


def _gk15():
    x = np.concatenate([-_K15_X[:-1], _K15_X[::-1]])
    wk = np.concatenate([_K15_W[:-1], _K15_W[::-1]])
    wg_half = np.zeros(8)
    wg_half[1::2] = _G7_W
    wg = np.concatenate([wg_half[:-1], wg_half[::-1]])
    return x, wk, wg


GK15_NODES, GK15_KRONROD, GK15_GAUSS = _gk15()


@dataclass
class QuadratureOptions:
    """Controls for :func:`integrate_product` and the kernel evaluators.

    The kernel evaluators read ``abs_tol`` relative to ``rho(z, t)^{-e}``, the
    natural size of the kernel at the evaluation point (``e`` the homogeneity
    exponent); :func:`integrate_product` itself uses it as given.
    ``sphere_nodes`` holds the node counts ``(x end panels, polar angles,
    azimuth)``; interior ``x`` panels always use the 15-point Kronrod rule.
    """

    rel_tol: float = 1e-7
    abs_tol: float = 1e-14
    s_max: float = 1e6
    max_subdivisions: int = 400
    sphere_nodes: tuple[int, int, int] = (15, 8, 16)
    nu1_refine: bool = True
    mode: str = "real_axis"

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.s_max < 10:
            raise ValueError("s_max must be at least 10")
        if self.mode not in ("real_axis", "contour"):
            raise ValueError(f"unknown quadrature mode {self.mode!r}")
        nx, npol, naz = self.sphere_nodes
        if nx < 2 or npol < 2 or naz < 4 or naz % 2:
            raise ValueError("sphere_nodes needs x, polar >= 2 and an even azimuth count >= 4")


def default_options(dim_z: int, codim: int, **overrides) -> QuadratureOptions:
    """Tolerances scaled to the dimension of the product rule."""
    rel = 1e-7 if dim_z + codim <= 5 else 1e-5
    overrides.setdefault("rel_tol", rel)
    return QuadratureOptions(**overrides)


# ---------------------------------------------------------------------------
# one-dimensional pieces


def gauss_jacobi(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for ``int_{-1}^{1} (1 - y)^alpha (1 + y)^beta h(y) dy``."""
    x, w = roots_jacobi(n, alpha, beta)
    return np.asarray(x), np.asarray(w)


@dataclass
class Rule:
    """Nodes with a fine and an embedded coarse weight vector."""

    nodes: np.ndarray
    fine: np.ndarray
    coarse: np.ndarray

    def __len__(self):
        return len(self.fine)


def _union(xf, wf, xc, wc) -> Rule:
    nodes = np.concatenate([xf, xc], axis=0)
    fine = np.concatenate([wf, np.zeros(len(xc))])
    coarse = np.concatenate([np.zeros(len(xf)), wc])
    return Rule(nodes, fine, coarse)


def _concat(rules: list[Rule]) -> Rule:
    return Rule(np.concatenate([r.nodes for r in rules], axis=0),
                np.concatenate([r.fine for r in rules]),
                np.concatenate([r.coarse for r in rules]))


def x_breakpoints(scale: float | None) -> np.ndarray:
    """Panel ends in ``[-1, 1]``, geometrically clustered toward ``x = 0`` at ``scale``."""
    if scale is None:
        pos = [0.5]
    else:
        d = min(max(scale, 1e-3), 0.25)
        pos = [d / 2]
        while pos[-1] * 2 < 0.75:
            pos.append(pos[-1] * 2)
    pos = np.array(pos + [1.0])
    return np.concatenate([-pos[::-1], [0.0], pos])


def x_rule(alpha: float, breakpoints: np.ndarray, n_end: int) -> Rule:
    """Rule for ``int_{-1}^{1} (1 - x^2)^alpha h(x) dx`` on the given panels.

    Interior panels use Gauss-Kronrod 15/7; the two end panels absorb the
    endpoint factor into Gauss-Jacobi rules with ``n_end`` and ``n_end // 2`` nodes.
    """
    pieces = []
    nb = len(breakpoints) - 1
    for i in range(nb):
        a, b = breakpoints[i], breakpoints[i + 1]
        c, h = 0.5 * (a + b), 0.5 * (b - a)
        if i == nb - 1 or i == 0:
            right = i == nb - 1
            parts = []
            for n in (n_end, max(2, n_end // 2)):
                y, w = gauss_jacobi(n, alpha, 0.0) if right else gauss_jacobi(n, 0.0, alpha)
                x = c + h * y
                other = (1 + x) if right else (1 - x)
                parts.append((x, w * h ** (1 + alpha) * other ** alpha))
            pieces.append(_union(parts[0][0], parts[0][1], parts[1][0], parts[1][1]))
        else:
            x = c + h * GK15_NODES
            weight = (1 - x * x) ** alpha * h
            pieces.append(Rule(x, GK15_KRONROD * weight, GK15_GAUSS * weight))
    if nb == 1:
        raise ValueError("at least two x panels are required")
    return _concat(pieces)


def semicircle_x_rule(alpha: float, n: int) -> Rule:
    """``int_{-1}^{1} (1 - x^2)^alpha h(x) dx`` moved onto the upper unit semicircle.

    ``x = e^{i theta}`` with ``theta = pi (1 - y)/2``; the endpoint behaviour
    ``(1 - y^2)^alpha`` is absorbed by Gauss-Jacobi in ``y``.  Valid for ``h``
    analytic in the closed upper half disk minus the endpoints.
    """
    parts = []
    for k in (n, max(2, n // 2)):
        y, w = gauss_jacobi(k, alpha, alpha)
        theta = 0.5 * np.pi * (1 - y)
        x = np.exp(1j * theta)
        smooth = (2 * np.cos(0.5 * np.pi * y) / (1 - y * y)) ** alpha
        phase = np.exp(1j * alpha * (theta - 0.5 * np.pi))
        parts.append((x, w * smooth * phase * (-0.5j * np.pi) * x))
    return _union(parts[0][0], parts[0][1], parts[1][0], parts[1][1])


def sphere_rule(k: int, n_polar: int, n_azimuth: int) -> Rule:
    """Rule on ``S^k`` (points in ``R^{k+1}``) with fine and coarse weights."""
    if k == 0:
        pts = np.array([[1.0], [-1.0]])
        w = np.ones(2)
        return Rule(pts, w, w.copy())
    if k == 1:
        phi = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
        pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        fine = np.full(n_azimuth, 2 * np.pi / n_azimuth)
        coarse = np.where(np.arange(n_azimuth) % 2 == 0, 4 * np.pi / n_azimuth, 0.0)
        return Rule(pts, fine, coarse)
    alpha = 0.5 * (k - 2)
    inner = sphere_rule(k - 1, n_polar, n_azimuth)
    yf, wf = gauss_jacobi(n_polar, alpha, alpha)
    yc, wc = gauss_jacobi(max(2, n_polar // 2), alpha, alpha)
    ys = _union(yf, wf, yc, wc)
    return _product(ys, inner)


def _product(xs: Rule, inner: Rule) -> Rule:
    """Combine a first-coordinate rule with a rule on the lower sphere."""
    x = xs.nodes
    nx, ni = len(x), len(inner)
    fine = np.outer(xs.fine, inner.fine).reshape(-1)
    coarse = np.outer(xs.coarse, inner.coarse).reshape(-1)
    keep = (fine != 0) | (coarse != 0)
    radial = np.sqrt(1 - x * x)
    pts = np.empty((nx, ni, inner.nodes.shape[1] + 1), dtype=np.result_type(x, float))
    pts[:, :, 0] = x[:, None]
    pts[:, :, 1:] = radial[:, None, None] * inner.nodes[None, :, :]
    pts = pts.reshape(nx * ni, -1)
    return Rule(pts[keep], fine[keep], coarse[keep])


def householder_to(axis: np.ndarray) -> np.ndarray:
    """Orthogonal symmetric ``R`` with ``R e_1 = axis``."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    m = len(axis)
    e1 = np.zeros(m)
    e1[0] = 1.0
    # reflect onto whichever of +-axis is farther from e_1 to avoid cancellation
    sign = -1.0 if axis[0] > 0 else 1.0
    v = e1 - sign * axis
    v /= np.linalg.norm(v)
    return sign * (np.eye(m) - 2 * np.outer(v, v))


@dataclass
class SphereRule:
    """Directions ``nu`` (possibly complex in contour mode) with fine/coarse weights.

    ``x`` is the coordinate along the alignment axis, so ``nu . t = |t| x``.
    """

    nu: np.ndarray
    x: np.ndarray
    fine: np.ndarray
    coarse: np.ndarray
    axis: np.ndarray
    breakpoints: np.ndarray | None = None

    def __len__(self):
        return len(self.fine)


def build_sphere_rule(m: int, t=None, opts: QuadratureOptions | None = None,
                      cluster_scale: float | None = None) -> SphereRule:
    """Product rule on ``S^{m-1}`` aligned with ``t`` (first axis when ``t = 0``)."""
    opts = opts or QuadratureOptions()
    if m < 2:
        raise ValueError("the sphere rule needs m >= 2")
    n_end, n_polar, n_az = opts.sphere_nodes
    t = np.zeros(m) if t is None else np.asarray(t, dtype=float)
    tn = np.linalg.norm(t)
    axis = t / tn if tn > 0 else np.eye(m)[0]
    R = householder_to(axis)
    alpha = 0.5 * (m - 3)
    inner = sphere_rule(m - 2, n_polar, n_az)
    bps = None
    if opts.mode == "contour":
        if m not in (2, 3):
            raise ValueError("contour mode is only available for codim 2 and 3")
        xr = semicircle_x_rule(alpha, 4 * n_end)
    else:
        scale = cluster_scale if (opts.nu1_refine and tn > 0) else None
        bps = x_breakpoints(scale)
        xr = x_rule(alpha, bps, n_end)
    # product with the lower sphere; weights on x already carry (1 - x^2)^alpha
    xs = Rule(xr.nodes, xr.fine, xr.coarse)
    full = _product(xs, inner)
    nu = full.nodes @ R.T
    return SphereRule(nu=nu, x=full.nodes[:, 0], fine=full.fine, coarse=full.coarse,
                      axis=axis, breakpoints=bps)


# ---------------------------------------------------------------------------
# radial integration


@dataclass(frozen=True)
class RadialPoint:
    """A radial sample: ``r``, an accurate ``log r``, and ``s`` on the upper piece."""

    r: float
    log_r: float
    s: float | None = None


@dataclass
class ProductResult:
    value: np.ndarray
    est_error: float
    nodes_used: int
    warnings: list[str] = field(default_factory=list)


def _pairwise_weighted_sum(w: np.ndarray, f: np.ndarray) -> np.ndarray:
    # contiguous reduction along the last axis uses numpy's pairwise summation
    prod = np.ascontiguousarray((w[:, None] * f).T)
    return prod.sum(axis=-1)


def integrate_product(integrand: Callable[[RadialPoint], np.ndarray], rule: SphereRule,
                      opts: QuadratureOptions | None = None, *, measure: str = "dr",
                      r_range: tuple[float, float] = (0.0, 1.0),
                      lower_decay: float = 1.0, upper_decay: float = 1.0) -> ProductResult:
    """Integrate ``integrand`` over ``rule`` x ``r_range``.

    ``integrand(rp)`` returns an array of shape ``(len(rule), k)`` (or
    ``(len(rule),)``) of values at the sphere nodes.  ``measure`` is ``"dr"``
    or ``"dr/r"``.  ``r_range`` is ``(0, 1)``, ``(0, 1/2)`` or ``(1/2, 1)``.
    ``lower_decay`` and ``upper_decay`` are the exponential decay rates of the
    transformed integrand in ``u = -log r`` and ``v = log s``; they set the
    truncation points and the tail estimates.
    """
    opts = opts or QuadratureOptions()
    if measure not in ("dr", "dr/r"):
        raise ValueError("measure must be 'dr' or 'dr/r'")
    lo, hi = r_range
    if (lo, hi) not in ((0.0, 1.0), (0.0, 0.5), (0.5, 1.0)):
        raise ValueError("r_range must be (0, 1), (0, 0.5) or (0.5, 1)")
    shape: list = []
    neval = [0]

    def sphere_sum(rp: RadialPoint, jac: float) -> np.ndarray:
        vals = np.asarray(integrand(rp))
        neval[0] += 1
        if vals.ndim == 1:
            vals = vals[:, None]
        if not shape:
            shape.append(vals.shape[1])
        out = np.concatenate([_pairwise_weighted_sum(rule.fine, vals),
                              _pairwise_weighted_sum(rule.coarse, vals)]) * jac
        return np.concatenate([out.real, out.imag])

    pieces, errs, msgs = [], [], []
    tails = 0.0
    if lo == 0.0:
        u_max = min(math.log(2) + 40.0 / max(lower_decay, 1e-3), 740.0)

        def lower(u):
            r = math.exp(-u)
            jac = 1.0 if measure == "dr/r" else r
            return sphere_sum(RadialPoint(r, -u), jac)

        val, err, info = quad_vec(lower, math.log(2), u_max, epsabs=opts.abs_tol,
                                  epsrel=opts.rel_tol, norm="max", limit=opts.max_subdivisions,
                                  full_output=True)
        pieces.append(val)
        errs.append(err)
        if not info.success:
            msgs.append(f"lower radial piece did not converge (error {err:.3e})")
        tails += np.max(np.abs(lower(u_max))) / max(lower_decay, 1e-3)
    if hi == 1.0:
        v_max = math.log(opts.s_max)

        def upper(v):
            s = math.exp(v)
            log_r = math.log1p(-2.0 / (s + 1.0))
            r = (s - 1.0) / (s + 1.0)
            jac = 2.0 * s / ((s - 1.0) * (s + 1.0))
            if measure == "dr":
                jac *= r
            return sphere_sum(RadialPoint(r, log_r, s), jac)

        val, err, info = quad_vec(upper, math.log(3.0), v_max, epsabs=opts.abs_tol,
                                  epsrel=opts.rel_tol, norm="max", limit=opts.max_subdivisions,
                                  full_output=True)
        pieces.append(val)
        errs.append(err)
        if not info.success:
            msgs.append(f"upper radial piece did not converge (error {err:.3e})")
        tails += np.max(np.abs(upper(v_max))) / max(upper_decay, 1e-3)
    total = np.sum(pieces, axis=0)
    k = shape[0]
    cplx = total[: 2 * k] + 1j * total[2 * k:]
    fine, coarse = cplx[:k], cplx[k:]
    sphere_err = float(np.max(np.abs(fine - coarse)))
    est = float(sum(errs)) + sphere_err + float(tails)
    for msg in msgs:
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return ProductResult(value=fine, est_error=est, nodes_used=neval[0] * len(rule), warnings=msgs)
