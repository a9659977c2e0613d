"""Command-line interface.

    distrank {generate|train|eval|calibrate|curves|gradcheck} [flags]

Every command ends by printing one ``key=value`` summary line. Exit codes:
0 success, 1 usage, 2 IO/data, 3 divergence, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from distrank import calibration as cal
from distrank.curves import ALL_CURVES, curve_csv
from distrank.data import GenConfig, generate, load_jsonl, save_jsonl, split
from distrank.errors import DatasetFormatError, DegenerateMetricError, UnsupportedRelationError
from distrank.gradcheck import BACKWARD_TOL, CORE_TOL, check_backward, check_core
from distrank.ranking import predict_relations, whdr_arrays
from distrank.scorer import (
    PARAMETERIZATIONS,
    TrainConfig,
    forward_arrays,
    load_checkpoint,
    save_checkpoint,
    train,
)

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DIVERGED, EXIT_VERIFY = 0, 1, 2, 3, 4

DISTRIBUTION, MU_DIFF = cal.DISTRIBUTION, cal.MU_DIFF


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _summary(**fields) -> None:
    def fmt(v):
        if isinstance(v, float):
            return f"{v:.6g}"
        return str(v)

    print(" ".join(f"{k}={fmt(v)}" for k, v in fields.items()))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_dataset(path):
    try:
        return load_jsonl(path)
    except OSError as exc:
        raise DataError(f"cannot read dataset {path}: {exc.strerror or exc}") from None
    except (DatasetFormatError, UnsupportedRelationError, IndexError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _load_model(path):
    try:
        return load_checkpoint(path)
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc.strerror or exc}") from None
    except (ValueError, KeyError) as exc:
        raise DataError(f"{path}: invalid checkpoint ({exc})") from None


def _score(params, ds):
    if ds.feature_dim != params.n_features:
        raise DataError(
            f"dataset has {ds.feature_dim} features but the checkpoint expects {params.n_features}"
        )
    return forward_arrays(params, ds.features)


# -- generate ---------------------------------------------------------------------


def cmd_generate(args) -> int:
    try:
        cfg = GenConfig(
            item_count=args.items,
            feature_dim=args.feature_dim,
            pairs_per_item=args.pairs_per_item,
            label_flip_prob=args.label_flip_prob,
            ambiguous_fraction=args.ambiguous_fraction,
            base_noise_scale=args.base_noise_scale,
            ambiguous_noise_scale=args.ambiguous_noise_scale,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = generate(cfg)
    try:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        save_jsonl(ds, args.output)
    except OSError as exc:
        raise DataError(f"cannot write {args.output}: {exc.strerror or exc}") from None
    i, j, r, _ = ds.pair_arrays()
    flipped = float(np.mean(np.where(ds.depths[i] > ds.depths[j], 1, -1) != r))
    _summary(
        command="generate",
        items=ds.n_items,
        pairs=len(ds.pairs),
        flip_prob=cfg.label_flip_prob,
        flip_rate=flipped,
        output=args.output,
    )
    return EXIT_OK


# -- train ------------------------------------------------------------------------


def cmd_train(args) -> int:
    try:
        cfg = TrainConfig(
            epochs=args.epochs,
            batch_size=args.batch_size,
            lr_max=args.lr_max,
            lr_min=args.lr_min,
            cycle_epochs=args.cycle_epochs,
            seed=args.seed,
            parameterization=args.parameterization,
            hidden_width=args.hidden_width,
            eps=args.eps,
            test_fraction=args.test_fraction,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ds = _load_dataset(args.dataset)
    if not ds.pairs:
        raise DataError(f"{args.dataset}: dataset has no pairs")
    try:
        train_ds, test_ds = split(ds, cfg.test_fraction, cfg.seed)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    params, history = train(train_ds, cfg, test=test_ds)

    out = Path(args.out_dir)
    try:
        save_jsonl(test_ds, _mk(out / "test.jsonl"))
        save_checkpoint(params, out / "checkpoint.json")
        _write(out / "history.csv", history.to_csv())
    except OSError as exc:
        raise DataError(f"cannot write to {out}: {exc.strerror or exc}") from None

    last = history.rows[-1]
    _summary(
        command="train",
        parameterization=cfg.parameterization,
        epochs=last[0],
        train_loss=last[1],
        test_whdr=last[2],
        diverged=int(history.diverged),
        out_dir=str(out),
    )
    if history.diverged:
        print(f"diverged: {history.message}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _mk(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


# -- eval -------------------------------------------------------------------------


def _probabilities(kind, mu, sigma, i, j):
    if kind == DISTRIBUTION:
        return cal.distribution_probs(mu, sigma, i, j)
    return cal.mu_diff_minmax(mu[i] - mu[j])


def cmd_eval(args) -> int:
    params = _load_model(args.checkpoint)
    ds = _load_dataset(args.dataset)
    mu, sigma = _score(params, ds)
    i, j, r, w = ds.pair_arrays()
    try:
        rate = whdr_arrays(mu, i, j, r, w)
        prob = _probabilities(args.interpretation, mu, sigma, i, j)
    except DegenerateMetricError as exc:
        raise DataError(str(exc)) from None
    pred = predict_relations(mu, i, j)

    lines = ["pair,i,j,r,r_pred,p_positive"]
    lines += [f"{k},{i[k]},{j[k]},{r[k]},{pred[k]},{float(prob[k])!r}" for k in range(len(i))]
    try:
        _write(Path(args.out_dir) / "predictions.csv", "\n".join(lines) + "\n")
    except OSError as exc:
        raise DataError(f"cannot write to {args.out_dir}: {exc.strerror or exc}") from None
    _summary(
        command="eval",
        whdr=rate,
        pairs=len(i),
        wrong=int(np.sum(pred != r)),
        interpretation=args.interpretation,
    )
    return EXIT_OK


# -- calibrate --------------------------------------------------------------------


def cmd_calibrate(args) -> int:
    if args.bins < 1 or args.reliability_bins < 1:
        raise UsageError("bin counts must be >= 1")
    params = _load_model(args.checkpoint)
    ds = _load_dataset(args.dataset)
    if not ds.pairs:
        raise DataError(f"{args.dataset}: dataset has no pairs")
    mu, sigma = _score(params, ds)
    i, j, r, _ = ds.pair_arrays()
    positive = r == 1

    out = Path(args.out_dir)
    report = ["interpretation,ece,adaece,mce,status"]
    summary = {"command": "calibrate", "pairs": len(i)}
    files = {}
    for kind in (DISTRIBUTION, MU_DIFF):
        tag = kind.replace("-", "_")
        try:
            prob = _probabilities(kind, mu, sigma, i, j)
        except DegenerateMetricError as exc:
            report.append(f"{kind},,,,degenerate: {exc}")
            summary[f"{tag}_status"] = "degenerate"
            continue
        m = cal.calibration_report(prob, positive, args.bins)
        report.append(f"{kind},{m['ece']!r},{m['adaece']!r},{m['mce']!r},ok")
        for k, v in m.items():
            summary[f"{tag}_{k}"] = v
        bins = cal.bin_outcomes((prob, positive), args.reliability_bins, cal.EQUAL_WIDTH)
        files[f"reliability_{tag}.csv"] = cal.reliability_csv(cal.reliability_table(bins))
    files["calibration.csv"] = "\n".join(report) + "\n"
    try:
        for name, text in files.items():
            _write(out / name, text)
    except OSError as exc:
        raise DataError(f"cannot write to {out}: {exc.strerror or exc}") from None
    _summary(**summary)
    return EXIT_OK


# -- curves -----------------------------------------------------------------------


def cmd_curves(args) -> int:
    out = Path(args.out_dir)
    names = []
    try:
        for make in ALL_CURVES:
            name, text = curve_csv(make())
            _write(out / name, text)
            names.append(name)
    except OSError as exc:
        raise DataError(f"cannot write to {out}: {exc.strerror or exc}") from None
    _summary(command="curves", files=len(names), out_dir=str(out))
    return EXIT_OK


# -- gradcheck --------------------------------------------------------------------


def cmd_gradcheck(args) -> int:
    if args.samples < 1 or args.backward_samples < 1:
        raise UsageError("--samples and --backward-samples must be >= 1")
    core = check_core(args.samples, args.seed, args.core_tol)
    back = check_backward(args.backward_samples, args.seed, args.backward_tol)
    ok = True
    for res, tol in ((core, args.core_tol), (back, args.backward_tol)):
        print(
            f"{res.name}: checked={res.checked} failures={res.failures} "
            f"worst_rel={res.worst_rel:.3e} tol={tol:g}"
        )
        if not res.ok:
            ok = False
            print(f"  offending: {res.worst_sample}")
    _summary(
        command="gradcheck",
        core_worst_rel=core.worst_rel,
        backward_worst_rel=back.worst_rel,
        status="pass" if ok else "fail",
    )
    return EXIT_OK if ok else EXIT_VERIFY


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="distrank", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", help="JSON file of flag defaults; command-line flags take precedence")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a synthetic JSONL dataset")
    d = GenConfig()
    g.add_argument("--items", type=int, default=d.item_count)
    g.add_argument("--feature-dim", type=int, default=d.feature_dim)
    g.add_argument("--pairs-per-item", type=float, default=d.pairs_per_item)
    g.add_argument("--label-flip-prob", type=float, default=d.label_flip_prob)
    g.add_argument("--ambiguous-fraction", type=float, default=d.ambiguous_fraction)
    g.add_argument("--base-noise-scale", type=float, default=d.base_noise_scale)
    g.add_argument("--ambiguous-noise-scale", type=float, default=d.ambiguous_noise_scale)
    g.add_argument("--seed", type=int, default=d.seed)
    g.add_argument("-o", "--output", default="dataset.jsonl")
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train a scorer; writes checkpoint.json, history.csv, test.jsonl")
    c = TrainConfig()
    t.add_argument("--dataset", required=True)
    t.add_argument("--out-dir", default="run")
    t.add_argument("--epochs", type=int, default=c.epochs)
    t.add_argument("--batch-size", type=int, default=c.batch_size)
    t.add_argument("--lr-max", type=float, default=c.lr_max)
    t.add_argument("--lr-min", type=float, default=c.lr_min)
    t.add_argument("--cycle-epochs", type=int, default=c.cycle_epochs)
    t.add_argument("--seed", type=int, default=c.seed)
    t.add_argument("--parameterization", choices=PARAMETERIZATIONS, default=c.parameterization)
    t.add_argument("--hidden-width", type=int, default=c.hidden_width)
    t.add_argument("--eps", type=float, default=c.eps)
    t.add_argument("--test-fraction", type=float, default=c.test_fraction)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="WHDR and per-pair predictions")
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--dataset", required=True)
    e.add_argument("--out-dir", default="eval")
    e.add_argument("--interpretation", choices=(DISTRIBUTION, MU_DIFF), default=DISTRIBUTION)
    e.set_defaults(func=cmd_eval)

    k = sub.add_parser("calibrate", help="ECE/AdaECE/MCE under both probability interpretations")
    k.add_argument("--checkpoint", required=True)
    k.add_argument("--dataset", required=True)
    k.add_argument("--out-dir", default="calibration")
    k.add_argument("--bins", type=int, default=cal.DEFAULT_BINS)
    k.add_argument("--reliability-bins", type=int, default=cal.RELIABILITY_BINS)
    k.set_defaults(func=cmd_calibrate)

    v = sub.add_parser("curves", help="export loss and gradient curves as CSV")
    v.add_argument("--out-dir", default="curves")
    v.set_defaults(func=cmd_curves)

    q = sub.add_parser("gradcheck", help="verify analytic gradients against finite differences")
    q.add_argument("--samples", type=int, default=1000)
    q.add_argument("--backward-samples", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--core-tol", type=float, default=CORE_TOL)
    q.add_argument("--backward-tol", type=float, default=BACKWARD_TOL)
    q.set_defaults(func=cmd_gradcheck)
    return p


def _apply_config(parser, argv):
    """Parse ``argv`` with a JSON config's values installed as subcommand defaults."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return parser.parse_args(argv)
    try:
        with open(known.config, encoding="utf-8") as fh:
            conf = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read config {known.config}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {known.config} is not valid JSON: {exc.msg}") from None
    if not isinstance(conf, dict):
        raise UsageError("config file must hold a JSON object")
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in (argv if argv is not None else sys.argv[1:]) if a in choices), None)
    if command is None:
        return parser.parse_args(argv)
    conf = {k.replace("-", "_"): v for k, v in conf.items()}
    subparser = choices[command]
    known_keys = {a.dest for a in subparser._actions} - {"help", "func"}
    unknown = sorted(set(conf) - known_keys)
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    for action in subparser._actions:
        if action.dest in conf:
            action.required = False
    subparser.set_defaults(**conf)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except UsageError as exc:
        print(f"distrank: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"distrank: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
