"""Command-line front end: ``crgreen {check,eval,decay,validate,series}``.

Exit codes: 0 success, 1 usage or input error, 2 a check or validation failed.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from .forms import MultiIndex, increasing_tuples
from .kernel import DegenerateDirectionError, eval_kernel_deriv
from .quadric import QuadricError, QuadricForm, load_quadric, verify_nondegenerate
from .quadrature import default_options
from .scalar import SERIES_MAX_ORDER, F_series
from .validation import (OracleId, decay_csv, decay_scan, example_quadric, fmt17, ray_variation,
                         run_validation, validation_csv)

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x != ""]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc


def _tuple(text: str | None) -> tuple[int, ...]:
    if text is None or text.strip() in ("", "()"):
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise UsageError(f"cannot parse index tuple {text!r}") from exc


def _load(args) -> QuadricForm:
    path = Path(args.manifold)
    if not path.is_file():
        raise UsageError(f"manifold file not found: {path}")
    Q = load_quadric(path)
    b = getattr(args, "b", None)
    if b is not None:
        if Q.family != "ex12_5":
            raise UsageError("--b only applies to manifolds of family ex12_5")
        Q = example_quadric(OracleId("ex12_5", b))
    return Q


def _options(args, Q: QuadricForm):
    over = {}
    if getattr(args, "rel_tol", None) is not None:
        over["rel_tol"] = args.rel_tol
    if getattr(args, "s_max", None) is not None:
        over["s_max"] = args.s_max
    if getattr(args, "mode", None) is not None:
        over["mode"] = "real_axis" if args.mode == "real" else "contour"
    try:
        return default_options(Q.dim_z, Q.codim, **over)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _point(Q: QuadricForm, args) -> tuple[np.ndarray, np.ndarray]:
    zr = _floats(args.z) if args.z else []
    if len(zr) != 2 * Q.dim_z:
        raise UsageError(f"--z needs {2 * Q.dim_z} reals (re,im pairs), got {len(zr)}")
    t = np.array(_floats(args.t) if args.t else [], dtype=float)
    if len(t) != Q.codim:
        raise UsageError(f"--t needs {Q.codim} reals, got {len(t)}")
    z = np.array(zr[0::2]) + 1j * np.array(zr[1::2])
    return z, t


def _form_request(Q: QuadricForm, args) -> tuple[int, tuple[int, ...], MultiIndex]:
    q = args.q
    if not 0 <= q <= Q.dim_z:
        raise UsageError(f"--q {q} outside 0..{Q.dim_z}")
    K = _tuple(args.K)
    if K and K not in increasing_tuples(Q.dim_z, q):
        raise UsageError(f"--K {args.K} is not an increasing {q}-tuple in 1..{Q.dim_z}")
    if not K and q > 0:
        K = tuple(range(1, q + 1))
    try:
        I = MultiIndex.parse(args.deriv or "0", Q.dim_z, Q.codim)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return q, K, I


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(args) -> int:
    Q = _load(args)
    rep = verify_nondegenerate(Q, args.resolution, args.threshold)
    lines = [
        f"manifold: {args.manifold}",
        f"dim_z: {Q.dim_z}  codim: {Q.codim}",
        f"samples_checked: {rep.samples_checked}",
        f"min_abs_eigenvalue: {fmt17(rep.min_abs_eigenvalue)}",
        "worst_direction: " + ",".join(fmt17(x) for x in rep.worst_direction.nu),
        f"signature_at_worst: +{rep.n_positive} -{rep.n_negative}",
        f"passes: {str(rep.passes).lower()}",
    ]
    _emit("\n".join(lines) + "\n", getattr(args, "out", None))
    return EXIT_OK if rep.passes else EXIT_FAILED


def cmd_eval(args) -> int:
    Q = _load(args)
    q, K, I = _form_request(Q, args)
    z, t = _point(Q, args)
    rep = verify_nondegenerate(Q, 16, 1e-6)
    if not rep.passes:
        sys.stderr.write(f"hypothesis check failed: min |eigenvalue| {rep.min_abs_eigenvalue:.3e}\n")
        return EXIT_FAILED
    opts = _options(args, Q)
    try:
        val = eval_kernel_deriv(Q, q, K, I if I.order else None, z, t, opts)
    except DegenerateDirectionError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_FAILED
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    rows = [(J, val.coefficients[J]) for J in sorted(val.coefficients)]
    label = lambda J: ",".join(map(str, J)) or "()"
    if args.format == "csv":
        text = "J,re,im,est_error\n" + "".join(
            f"\"{label(J)}\",{fmt17(v.real)},{fmt17(v.imag)},{fmt17(val.est_error)}\n" for J, v in rows)
    elif args.format == "yaml":
        text = yaml.safe_dump({
            "q": q, "K": list(K), "deriv": I.describe(),
            "coefficients": [{"J": list(J), "re": fmt17(v.real), "im": fmt17(v.imag)} for J, v in rows],
            "est_error": fmt17(val.est_error), "nodes_used": val.nodes_used, "warnings": val.warnings,
        }, sort_keys=False)
    else:
        text = "".join(f"J={label(J)}  {fmt17(v.real)} {fmt17(v.imag)}j\n" for J, v in rows)
        text += f"est_error: {fmt17(val.est_error)}\n"
        text += "".join(f"warning: {w}\n" for w in val.warnings)
    _emit(text, args.out)
    return EXIT_OK


def cmd_decay(args) -> int:
    Q = _load(args)
    q, K, I = _form_request(Q, args)
    opts = _options(args, Q)
    scales = [2.0 ** k for k in range(args.min_scale, args.max_scale + 1)]
    rows = decay_scan(Q, q, K, I if I.order else None, args.directions, scales, opts,
                      seed=args.seed, threads=args.threads)
    _emit(decay_csv(rows), args.out)
    sys.stderr.write(f"empirical C_I: {fmt17(max(r.scaled for r in rows))}  "
                     f"max ray variation: {fmt17(ray_variation(rows))}\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    examples = [e for e in args.examples.split(",") if e.strip()]
    try:
        for e in examples:
            OracleId.parse(e, args.b)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    over = {}
    if args.rel_tol is not None:
        over["rel_tol"] = args.rel_tol
    if args.mode is not None:
        over["mode"] = "real_axis" if args.mode == "real" else "contour"
    rep = run_validation(examples, b=args.b, **over)
    if args.format == "csv":
        text = validation_csv(rep)
    else:
        text = "".join(f"{r.status:<4}  {r.example:<18} {r.component:<6} "
                       f"rel_err={r.rel_err:.3e} tol={r.tolerance:.0e}  {r.point}"
                       f"{'  [' + r.note + ']' if r.note else ''}\n" for r in rep.rows)
        for k, v in rep.normalization.items():
            text += f"normalization {k}: {v}\n"
        text += f"overall: {'pass' if rep.passed else 'FAIL'}\n"
    _emit(text, args.out)
    return EXIT_OK if rep.passed else EXIT_FAILED


def cmd_series(args) -> int:
    if not 2 <= args.order <= SERIES_MAX_ORDER:
        raise UsageError(f"--order must lie in 2..{SERIES_MAX_ORDER}")
    table = F_series(args.order)
    lines = []
    for k in range(1, len(table.coefficients) + 1):
        coeffs = " ".join(f"{c}" for c in table.coefficients[k - 1])
        lines.append(f"p{2 * k}(u) = {table.format_poly(k)}    [coefficients of u^0, u^2, ...: {coeffs}]")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crgreen", description="Green kernels of quadric CR manifolds")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def quad_flags(sp):
        sp.add_argument("--rel-tol", type=float, dest="rel_tol")
        sp.add_argument("--s-max", type=float, dest="s_max")
        sp.add_argument("--mode", choices=["real", "contour"])

    def form_flags(sp):
        sp.add_argument("--q", type=int, default=0)
        sp.add_argument("--K", default=None, help="comma separated increasing tuple, e.g. 1,3")
        sp.add_argument("--deriv", "--I", dest="deriv", default="0",
                        help="derivative, e.g. z1:2,zb1:1,t2:1 (0 for none)")

    sc = sub.add_parser("check", help="sample the sphere for vanishing Levi eigenvalues")
    sc.add_argument("manifold")
    sc.add_argument("--resolution", type=int, default=32)
    sc.add_argument("--threshold", type=float, default=1e-6)
    sc.add_argument("--b", type=float)
    sc.add_argument("--out")
    sc.set_defaults(func=cmd_check)

    se = sub.add_parser("eval", help="evaluate the kernel at a point")
    se.add_argument("manifold")
    form_flags(se)
    se.add_argument("--z", required=True, help="re,im pairs for each z_k")
    se.add_argument("--t", required=True)
    quad_flags(se)
    se.add_argument("--b", type=float)
    se.add_argument("--out")
    se.add_argument("--format", choices=["text", "csv", "yaml"], default="text")
    se.set_defaults(func=cmd_eval)

    sd = sub.add_parser("decay", help="scan the kernel along dilation rays")
    sd.add_argument("manifold")
    form_flags(sd)
    quad_flags(sd)
    sd.add_argument("--b", type=float)
    sd.add_argument("--directions", type=int, default=50)
    sd.add_argument("--min-scale", type=int, default=-4, help="smallest dyadic exponent")
    sd.add_argument("--max-scale", type=int, default=4)
    sd.add_argument("--seed", type=int, default=0)
    sd.add_argument("--threads", type=int, default=os.cpu_count())
    sd.add_argument("--out")
    sd.add_argument("--format", choices=["csv"], default="csv")
    sd.set_defaults(func=cmd_decay)

    sv = sub.add_parser("validate", help="compare with the closed-form examples")
    sv.add_argument("--examples", default="12.1,12.2,12.3,12.4,12.5")
    sv.add_argument("--b", type=float, default=None, help="parameter of example 12.5 (default 0.1)")
    sv.add_argument("--rel-tol", type=float, dest="rel_tol")
    sv.add_argument("--mode", choices=["real", "contour"])
    sv.add_argument("--out")
    sv.add_argument("--format", choices=["text", "csv"], default="text")
    sv.set_defaults(func=cmd_validate)

    ss = sub.add_parser("series", help="print the large-s expansion polynomials")
    ss.add_argument("--order", type=int, default=4, help="highest polynomial degree 2k to print")
    ss.add_argument("--out")
    ss.set_defaults(func=cmd_series)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help and usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, QuadricError, OSError, ValueError) as exc:
        sys.stderr.write(f"crgreen: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
