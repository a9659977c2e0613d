"""Mean predicted confidence on clean vs ambiguous held-out items.

Ambiguous items get feature noise ``ratio`` times the base scale.
"""

import argparse

from distrank.experiments import confidence_by_class


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--ambiguous-fraction", type=float, default=0.3)
    ap.add_argument("--base-noise", type=float, default=0.02)
    ap.add_argument("--ratio", type=float, default=5.0)
    args = ap.parse_args()

    print("seed  clean   ambiguous  whdr")
    for s in range(args.seeds):
        r = confidence_by_class(s, args.ambiguous_fraction, args.base_noise, args.ratio)
        print(f"{s:>4}  {r['clean']:.4f}  {r['ambiguous']:.4f}     {r['whdr']:.4f}")


if __name__ == "__main__":
    main()
