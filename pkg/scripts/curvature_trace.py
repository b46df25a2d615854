"""Print the running extrema of the curvature sampler, step by step.

Usage: python3 scripts/curvature_trace.py PROBLEM FUNCTION --point 0,0 --dir 1,0
"""

import argparse

from voptkkt.config import Dd2Schedule
from voptkkt.model import load_problem
from voptkkt.subdiff2 import sampled_dd2


def vec(text):
    return [float(s) for s in text.split(",")]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("problem")
    parser.add_argument("function")
    parser.add_argument("--point", type=vec, required=True)
    parser.add_argument("--dir", type=vec, required=True)
    parser.add_argument("--K", type=int, default=Dd2Schedule.K)
    parser.add_argument("--S", type=int, default=Dd2Schedule.S)
    args = parser.parse_args()
    fn = load_problem(args.problem).function(args.function)
    est = sampled_dd2(fn.expr, args.point, args.dir, Dd2Schedule(K=args.K, S=args.S))
    print(f"{'t':>12s} {'upper':>14s} {'lower':>14s}")
    for t, up, lo in est.trace:
        print(f"{t:12.4e} {up:14.8f} {lo:14.8f}")
    print(f"source={est.source.value} samples={est.samples}")


if __name__ == "__main__":
    main()
