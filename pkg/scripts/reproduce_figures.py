#!/usr/bin/env python3
"""Regenerate every figure CSV/SVG through the command-line front end.

Usage:
    python scripts/reproduce_figures.py [--profile ci|full] [--out DIR] [--seed N]
"""

import argparse
import sys
import time

from synthamp.cli import main as cli_main

FIGURES = ("gauss-criterion", "prior-tradeoff", "fig3", "fig2")


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--profile", choices=("ci", "full"), default="ci")
    ap.add_argument("--out", default="figures")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()
    for which in FIGURES:
        t0 = time.perf_counter()
        code = cli_main(["figures", "--which", which, "--profile", args.profile, "--out", args.out,
                         "--seed", str(args.seed), "--threads", str(args.threads)])
        if code:
            return code
        print(f"{which}: {time.perf_counter() - t0:.1f}s", file=sys.stderr)
        code = cli_main(["verify", f"{args.out}/{which}.csv"])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
