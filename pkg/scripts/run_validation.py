"""Run the closed-form comparisons for the worked examples and write a CSV report.

Usage: python3 scripts/run_validation.py [--examples 12.1 12.3] [--out report.csv]
"""
import argparse
import sys
import time

from crgreen.validation import run_validation, validation_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--examples", nargs="+", default=["12.1", "12.2", "12.3", "12.4", "12.5"])
    ap.add_argument("--out", default=None, help="CSV path (default: stdout)")
    args = ap.parse_args()

    t0 = time.perf_counter()
    report = run_validation(args.examples)
    text = validation_csv(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for ex, choice in report.normalization.items():
        print(f"normalization {ex}: {choice}", file=sys.stderr)
    failed = [r for r in report.rows if not r.passed]
    print(f"{len(report.rows)} rows, {len(failed)} failed, {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    for r in failed:
        print(f"FAIL {r.example} {r.component} rel_err={r.rel_err:.3e} ({r.note})", file=sys.stderr)
    return 0 if not failed else 2


if __name__ == "__main__":
    sys.exit(main())
