#!/usr/bin/env python3
"""Drive the full benchmark suite through the CLI.

By default runs desk-scale versions of every case (minutes each); pass
--full for the original parameter sets (hours to days on one core, and the
full MNIST K grid needs tens of GB for the design matrix).

Results land in --outdir as one CSV per experiment.
"""

import argparse
import os
import sys
from pathlib import Path

from arff.cli import main as arff_main

DESK_OVERRIDES = {
    1: ["--k-grid", "2..256", "--replicas", "5"],
    2: ["--k-grid", "2..128", "--replicas", "5"],
    3: ["--replicas", "3"],
    4: ["--k-grid", "2..512"],
}


def run(argv) -> None:
    print("+ arff " + " ".join(argv), file=sys.stderr)
    code = arff_main(argv)
    if code != 0:
        raise SystemExit(code)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--full", action="store_true", help="original parameter sets")
    parser.add_argument("--cases", default="1,2,3,4,sigma", help="comma list, e.g. '1,3,sigma'")
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    wanted = [tok.strip() for tok in args.cases.split(",") if tok.strip()]

    common = ["--seed", str(args.seed), "--threads", str(args.threads)]
    for case in (1, 2, 3, 4):
        if str(case) not in wanted:
            continue
        if case == 4 and not os.environ.get("ARFF_DATA_DIR"):
            print("skipping case 4: set ARFF_DATA_DIR (see scripts/fetch_mnist.py)", file=sys.stderr)
            continue
        argv = ["run-case", str(case), "--out", str(args.outdir / f"case{case}.csv")]
        argv += common + (["--timing"] if case == 3 else [])
        if not args.full:
            argv += DESK_OVERRIDES[case]
        run(argv)
    if "sigma" in wanted:
        argv = ["sweep-sigma", "--out", str(args.outdir / "sigma_sweep.csv")] + common
        if not args.full:
            argv += ["--n-train", "20000"]
        run(argv)
    print(f"done; results in {args.outdir}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
