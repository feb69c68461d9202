"""Command-line entry point.

Subcommands: gen-data, train, predict, evaluate, sweep, compare. Every
command is deterministic given identical inputs and seed; wall-clock
timings are therefore kept out of report files unless --timings is passed.

Exit codes: 0 success, 2 input/flag error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import baselines, metrics, tuning, vwaa
from .data import (
    drop_targetless,
    generate_synthetic,
    make_windows,
    parse_records,
    prepare_splits,
    preprocess_apply,
    records_to_csv,
    split_dataset,
)
from .errors import InputError, VwaaKelmError
from .kelm import (
    DEFAULT_C,
    DEFAULT_GAMMA,
    KernelParams,
    WeightVector,
    deserialize,
    serialize,
    train,
)

DEFAULT_SPLIT = "0.7,0.15,0.15"


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _parse_split(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise InputError(f"--split needs three comma-separated ratios, got {text!r}")
    try:
        ratios = tuple(float(p) for p in parts)
    except ValueError:
        raise InputError(f"--split ratios must be numbers, got {text!r}") from None
    return ratios


def _parse_grid_axis(text: str, label: str) -> tuple[float, ...]:
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError:
        raise InputError(f"--{label} must be comma-separated numbers, got {text!r}") from None


def _kernel_params(args) -> KernelParams:
    try:
        return KernelParams(gamma=args.gamma, c=args.c)
    except ValueError as e:
        raise InputError(str(e)) from None


def _vwaa_config(args) -> vwaa.VwaaConfig:
    try:
        return vwaa.VwaaConfig(
            population=args.population,
            max_iters=args.iters,
            sigma0=args.sigma0,
            decay=args.decay,
            top_k=args.top_k,
            lambda_kl=args.lambda_kl,
            w_min=args.w_min,
            seed=args.seed,
            patience=args.patience,
            rel_tol=args.rel_tol,
        )
    except ValueError as e:
        raise InputError(str(e)) from None


def cmd_gen_data(args) -> int:
    records = generate_synthetic(args.rows, args.seed, args.noise_sd)
    _write_text(args.out, records_to_csv(records))
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def cmd_train(args) -> int:
    params = _kernel_params(args)
    ratios = _parse_split(args.split)
    records = parse_records(_read_text(args.data))
    splits, schema, stats = prepare_splits(records, ratios, args.seed, args.window_len)

    timings: dict[str, float] = {}
    history = None
    result = None
    if args.no_vwaa:
        weights = WeightVector.ones(splits["train"].original_features, args.w_min)
    else:
        config = _vwaa_config(args)
        t0 = time.perf_counter()
        result = vwaa.optimize(splits["train"], splits["val"], params, config)
        timings["vwaa_s"] = time.perf_counter() - t0
        weights = result.best_weights
        history = result.history

    t0 = time.perf_counter()
    model = train(
        splits["train"].feature_matrix,
        splits["train"].targets,
        params,
        weights=weights,
        origins=splits["train"].origins,
        schema=schema,
        preprocess_stats=stats,
        window_len=args.window_len,
    )
    timings["train_s"] = time.perf_counter() - t0

    Path(args.model_out).write_bytes(serialize(model))
    report = metrics.build_report(
        model,
        splits,
        timings=timings if args.timings else None,
        history=history,
        out_dir=args.out_dir,
    )
    if args.report_out:
        Path(args.report_out).write_bytes(report.to_bytes())
    if args.trace and result is not None:
        _write_text(args.trace, vwaa.trace_csv(result))

    print(f"model written to {args.model_out}")
    for name, sm in report.splits.items():
        print(f"{name}: n={sm.n} rmse={sm.rmse:.4f} r2={sm.r2} rpd={sm.rpd}")
    return 0


def _apply_model_schema(model, records):
    if model.schema is None or model.preprocess_stats is None:
        raise InputError("model carries no embedded schema; cannot process CSV input")
    ds = preprocess_apply(records, model.schema, model.preprocess_stats)
    return make_windows(ds, model.window_len)


def cmd_predict(args) -> int:
    model = deserialize(_read_bytes(args.model))
    records = parse_records(_read_text(args.data))
    ds = _apply_model_schema(model, records)
    preds = model.predict(ds.feature_matrix)
    lines = ["row_index,predicted_power_w"]
    offset = model.window_len - 1
    lines.extend(f"{i + offset},{p!r}" for i, p in enumerate(preds.tolist()))
    _write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {len(preds)} predictions to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    model = deserialize(_read_bytes(args.model))
    records = drop_targetless(parse_records(_read_text(args.data)))
    ratios = _parse_split(args.split)
    train_recs, val_recs, test_recs = split_dataset(records, ratios, args.seed)
    splits = {
        name: _apply_model_schema(model, recs)
        for name, recs in (("train", train_recs), ("val", val_recs), ("test", test_recs))
    }
    report = metrics.build_report(
        model, splits, timings=None, history=None, out_dir=args.out_dir
    )
    Path(args.report_out).write_bytes(report.to_bytes())
    for name, sm in report.splits.items():
        print(f"{name}: n={sm.n} rmse={sm.rmse:.4f} r2={sm.r2} rpd={sm.rpd}")
    return 0


def cmd_sweep(args) -> int:
    ratios = _parse_split(args.split)
    records = parse_records(_read_text(args.data))
    splits, _, _ = prepare_splits(records, ratios, args.seed, args.window_len)
    try:
        grid = tuning.SearchGrid(
            gamma_values=_parse_grid_axis(args.gammas, "gammas"),
            c_values=_parse_grid_axis(args.cs, "cs"),
        )
    except ValueError as e:
        raise InputError(str(e)) from None
    weights = None
    if args.weights_from:
        weights_model = deserialize(_read_bytes(args.weights_from))
        weights = weights_model.feature_weights
    result = tuning.grid_search(splits["train"], splits["val"], grid, weights)
    _write_text(args.out, tuning.surface_csv(result.surface))
    print(f"best gamma={result.best_gamma!r} c={result.best_c!r}; "
          f"surface ({len(result.surface)} cells) written to {args.out}")
    return 0


def cmd_compare(args) -> int:
    params = _kernel_params(args)
    config = _vwaa_config(args)
    ratios = _parse_split(args.split)
    records = parse_records(_read_text(args.data))
    splits, _, _ = prepare_splits(records, ratios, args.seed, args.window_len)
    report = baselines.compare_models(
        splits["train"], splits["val"], splits["test"], params, config
    )
    Path(args.out).write_bytes(report.to_bytes())
    for entry in report.models:
        if entry.error is not None:
            print(f"{entry.name}: FAILED ({entry.error})")
        else:
            print(f"{entry.name}: rmse={entry.rmse:.4f} r2={entry.r2:.4f} "
                  f"rpd={entry.rpd:.4f}")
    return 0


def _add_split_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--split", default=DEFAULT_SPLIT,
                   help=f"train,val,test ratios (default {DEFAULT_SPLIT})")
    p.add_argument("--seed", type=int, default=42, help="deterministic seed")
    p.add_argument("--window-len", type=int, default=1,
                   help="time-window length; 1 disables windowing")


def _add_vwaa_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("feature-weight search")
    g.add_argument("--population", type=int, default=20)
    g.add_argument("--iters", type=int, default=100, help="max iterations")
    g.add_argument("--sigma0", type=float, default=0.3)
    g.add_argument("--decay", type=float, default=0.95)
    g.add_argument("--top-k", type=int, default=5)
    g.add_argument("--lambda-kl", type=float, default=0.01)
    g.add_argument("--w-min", type=float, default=0.05)
    g.add_argument("--patience", type=int, default=5)
    g.add_argument("--rel-tol", type=float, default=0.001)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vwaakelm",
        description="Feature-weighted kernel ELM for cloud power prediction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write a synthetic telemetry CSV")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--noise-sd", type=float, default=8.0, help="target noise in watts")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("train", help="split, preprocess, optimize weights, train")
    p.add_argument("--data", required=True)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    _add_split_flags(p)
    p.add_argument("--no-vwaa", action="store_true",
                   help="skip the weight search; use all-ones weights")
    _add_vwaa_flags(p)
    p.add_argument("--model-out", required=True)
    p.add_argument("--report-out")
    p.add_argument("--out-dir", help="directory for plot-ready CSVs")
    p.add_argument("--trace", help="write the optimizer trace CSV here")
    p.add_argument("--timings", action="store_true",
                   help="include wall-clock timings in the report "
                        "(breaks byte-for-byte reproducibility)")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", help="predict power for a CSV with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("evaluate", help="re-evaluate a trained model on a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", default=DEFAULT_SPLIT)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--report-out", required=True)
    p.add_argument("--out-dir", help="directory for plot-ready CSVs")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("sweep", help="grid-search (gamma, c) and export the surface")
    p.add_argument("--data", required=True)
    _add_split_flags(p)
    p.add_argument("--gammas", default=",".join(repr(g) for g in tuning.DEFAULT_GAMMA_GRID))
    p.add_argument("--cs", default=",".join(repr(c) for c in tuning.DEFAULT_C_GRID))
    p.add_argument("--weights-from", help="model file whose feature weights to reuse")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("compare", help="compare vwaa-kelm, kelm and elm")
    p.add_argument("--data", required=True)
    p.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    _add_split_flags(p)
    _add_vwaa_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except VwaaKelmError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
