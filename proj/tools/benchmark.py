#!/usr/bin/env python3
"""Rough timing of both tests on Model 8 as the number of extra covariates grows.

Reports seconds per simulated sample (fit, statistic and B bootstrap refits).

    python3 tools/benchmark.py --cli build/tools/qrlof --reps 20 --bootstrap 500
"""

import argparse
import subprocess
import time


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--cli", default="build/tools/qrlof")
    parser.add_argument("--reps", type=int, default=20)
    parser.add_argument("--bootstrap", type=int, default=500)
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--t", default="0,6,10,20,50")
    args = parser.parse_args()

    print("t,d,test,seconds_per_sample")
    for t in (int(v) for v in args.t.split(",")):
        for test in ("projection", "hz"):
            command = [args.cli, "simulate", "--model", "8", "--t", str(t), "--n", str(args.n),
                       "--reps", str(args.reps), "-B", str(args.bootstrap), "--tests", test]
            start = time.perf_counter()
            subprocess.run(command, check=True, stdout=subprocess.DEVNULL)
            elapsed = time.perf_counter() - start
            print(f"{t},{t + 2},{test},{elapsed / args.reps:.4f}")


if __name__ == "__main__":
    main()
