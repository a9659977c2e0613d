"""Calibration of distribution-based vs mu-difference pair probabilities.

Trains on the pinned synthetic dataset with label noise, then reports
ECE/AdaECE/MCE for both interpretations on a fresh draw from the same
generator. Optional flags lengthen training to see how far ECE moves.

    python scripts/calibration_table.py --flip 0.1 --out results/calibration
"""

import argparse
from pathlib import Path

from distrank import calibration as cal
from distrank.experiments import calibration_eval_set, calibration_rows, pinned_run
from distrank.scorer import forward_arrays


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--flip", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=25)
    ap.add_argument("--lr-max", type=float, default=1e-3)
    ap.add_argument("--hidden-width", type=int, default=16)
    ap.add_argument("--bins", type=int, default=cal.DEFAULT_BINS)
    ap.add_argument("--out", type=Path, default=None, help="directory for reliability CSVs")
    args = ap.parse_args()

    run = pinned_run(args.flip, seed=args.seed, epochs=args.epochs, lr_max=args.lr_max, hidden_width=args.hidden_width)
    ev = calibration_eval_set(args.flip)
    rows = calibration_rows(run.params, ev, args.bins)
    print(f"held-out whdr={run.whdr:.4f} eval pairs={len(ev.pairs)}")
    print(f"{'interpretation':<14} {'ECE':>7} {'AdaECE':>7} {'MCE':>7}")
    for kind, m in rows.items():
        print(f"{kind:<14} {m['ece']:7.4f} {m['adaece']:7.4f} {m['mce']:7.4f}")

    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        mu, sigma = forward_arrays(run.params, ev.features)
        i, j, r, _ = ev.pair_arrays()
        probs = {
            "distribution": cal.distribution_probs(mu, sigma, i, j),
            "mu_diff": cal.mu_diff_minmax(mu[i] - mu[j]),
        }
        for tag, p in probs.items():
            bins = cal.bin_outcomes((p, r == 1), cal.RELIABILITY_BINS)
            (args.out / f"reliability_{tag}.csv").write_text(cal.reliability_csv(cal.reliability_table(bins)))
        print(f"wrote reliability tables to {args.out}")


if __name__ == "__main__":
    main()
