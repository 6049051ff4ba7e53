"""Dilation-ray scan of the kernel magnitude on one example quadric.

Prints one CSV row per (direction, scale) and a summary with the empirical
constant ``max rho^e |N|`` and the worst relative spread along a ray.

Usage: python3 scripts/decay_scan.py --example 12.5 --b 0.1 --directions 50
"""
import argparse
import sys
import time

from crgreen.validation import OracleId, decay_csv, decay_scan, example_quadric, ray_variation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--example", default="12.3")
    ap.add_argument("--b", type=float, default=None, help="perturbation for example 12.5")
    ap.add_argument("--directions", type=int, default=50)
    ap.add_argument("--min-scale", type=int, default=-4)
    ap.add_argument("--max-scale", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    Q = example_quadric(OracleId.parse(args.example, args.b))
    scales = [2.0 ** k for k in range(args.min_scale, args.max_scale + 1)]
    t0 = time.perf_counter()
    rows = decay_scan(Q, 0, (), n_directions=args.directions, scales=scales, seed=args.seed,
                      threads=args.threads)
    text = decay_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    c_emp = max(r.scaled for r in rows)
    print(f"{Q.name}: empirical C = {c_emp:.6e}, ray variation = {ray_variation(rows):.3e}, "
          f"{time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
