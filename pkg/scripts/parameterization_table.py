"""Held-out WHDR of reciprocal (confidence) vs direct-sigma training over seeds."""

import argparse

import numpy as np

from distrank.experiments import parameterization_sweep
from distrank.scorer import DIRECT, RECIPROCAL


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--flip", type=float, default=0.1)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    sweep = parameterization_sweep(range(args.seeds), args.flip)
    print("seed  reciprocal  direct")
    for s in range(args.seeds):
        (wr, dr), (wd, dd) = sweep[RECIPROCAL][s], sweep[DIRECT][s]
        print(f"{s:>4}  {wr:10.4f}{'*' if dr else ' '} {wd:7.4f}{'*' if dd else ''}")
    for par in (RECIPROCAL, DIRECT):
        w = [x for x, _ in sweep[par]]
        print(f"{par:<10} mean={np.mean(w):.4f} std={np.std(w):.4f}")
    print("* = diverged")


if __name__ == "__main__":
    main()
