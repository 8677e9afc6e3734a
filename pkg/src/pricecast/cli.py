"""Command-line entry point: ``pricecast <command> [options]``.

Exit codes: 0 when every output was written, 2 for bad input or
configuration, 1 for failures while running a step.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import pipeline
from .config import ConfigError, PipelineConfig, example_config
from .data import DataError
from .io import write_text_atomic
from .neural.training import TrainingDiverged

log = logging.getLogger("pricecast")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common options")
    g.add_argument("--config", help="YAML config file (see `pricecast config init`)")
    g.add_argument("--commodity", help="bundled series name, e.g. cotton or oil")
    g.add_argument("--data", help="CSV with a `date` column (YYYY-MM) and price columns")
    g.add_argument("--column", help="price column to use (default: the commodity name)")
    g.add_argument("--ratio", type=float, help="training share for the chronological split")
    g.add_argument("--out", help="output directory")
    g.add_argument("--seed", type=int, help="master random seed")
    g.add_argument("--parallel", type=int, help="worker processes (1 = serial)")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pricecast", description=(
        "Monthly commodity price forecasting with recurrent networks, ARIMA and "
        "forecast combinations."))
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate a series, report the split")
    _common(p)

    p = sub.add_parser("train", help="train one recurrent network and forecast the test set")
    _common(p)
    p.add_argument("--kind", choices=["rnn", "gru_simple", "gru_full", "lstm"])
    p.add_argument("--units", type=int)
    p.add_argument("--lookback", type=int)
    p.add_argument("--dropout", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)

    p = sub.add_parser("gridsearch", help="search dropout x units x epochs x lookback")
    _common(p)
    p.add_argument("--kind", choices=["rnn", "gru_simple", "gru_full", "lstm"])
    p.add_argument("--grid-dropout", type=_floats, metavar="LIST")
    p.add_argument("--grid-units", type=_ints, metavar="LIST")
    p.add_argument("--grid-epochs", type=_ints, metavar="LIST")
    p.add_argument("--grid-lookback", type=_ints, metavar="LIST")
    p.add_argument("--no-timing", action="store_true",
                   help="leave the wall-time column empty (byte-reproducible table)")

    p = sub.add_parser("arima", help="breakpoint unit-root test, order selection, forecasts")
    _common(p)
    p.add_argument("--variant",
                   choices=["intercept_only", "intercept_break", "trend_break", "both_breaks"])
    p.add_argument("--lag-rule", choices=["sic", "t_sig"])
    p.add_argument("--reps", type=int, help="Monte Carlo replications for the null")
    p.add_argument("--p-max", type=int)
    p.add_argument("--q-max", type=int)
    p.add_argument("--refit", action="store_true", help="re-estimate before every forecast")
    p.add_argument("--cache", help="directory for cached null distributions")

    p = sub.add_parser("compare", help="metrics, HLN tests and forecast combinations")
    _common(p)
    p.add_argument("--neural", help="neural forecast CSV (default: OUT/neural_predictions.csv)")
    p.add_argument("--arima", help="ARIMA forecast CSV (default: OUT/arima_forecasts.csv)")
    p.add_argument("--holdout", type=float,
                   help="share of the test period used to fit combination weights")
    p.add_argument("--rank-rule", choices=["inverse", "proportional"])

    p = sub.add_parser("config", help="configuration helpers")
    csub = p.add_subparsers(dest="config_command", required=True)
    c = csub.add_parser("init", help="print or write a complete default config")
    c.add_argument("--commodity", default="cotton")
    c.add_argument("--out", help="file to write instead of printing")
    return parser


def resolve_config(args) -> PipelineConfig:
    """Config file (or defaults) with command-line overrides applied."""
    if args.config:
        cfg = PipelineConfig.load(args.config)
        if args.commodity:
            cfg.commodity = args.commodity
    else:
        cfg = example_config(args.commodity or "cotton")
    top = {"data": args.data, "column": args.column, "split_ratio": args.ratio,
           "out": args.out, "seed": args.seed, "parallel": args.parallel}
    for key, value in top.items():
        if value is not None:
            setattr(cfg, key, value)

    nmap = {"kind": "kind", "units": "units", "lookback": "lookback", "dropout": "dropout",
            "epochs": "epochs", "batch_size": "batch_size"}
    over = {dst: getattr(args, src) for src, dst in nmap.items()
            if getattr(args, src, None) is not None}
    if over:
        cfg.neural = replace(cfg.neural, **over)
    gmap = {"grid_dropout": "dropout", "grid_units": "units", "grid_epochs": "epochs",
            "grid_lookback": "lookback"}
    over = {dst: getattr(args, src) for src, dst in gmap.items()
            if getattr(args, src, None) is not None}
    if over:
        cfg.grid = replace(cfg.grid, **over)
    umap = {"variant": "variant", "lag_rule": "lag_rule", "reps": "reps"}
    over = {dst: getattr(args, src) for src, dst in umap.items()
            if getattr(args, src, None) is not None}
    if over:
        cfg.unitroot = replace(cfg.unitroot, **over)
    amap = {"p_max": "p_max", "q_max": "q_max"}
    over = {dst: getattr(args, src) for src, dst in amap.items()
            if getattr(args, src, None) is not None}
    if getattr(args, "refit", False):
        over["refit"] = True
    if over:
        cfg.arima = replace(cfg.arima, **over)
    over = {}
    if getattr(args, "holdout", None) is not None:
        over["holdout"] = args.holdout
    if getattr(args, "rank_rule", None) is not None:
        over["rank_rule"] = args.rank_rule
    if over:
        cfg.combine = replace(cfg.combine, **over)
    return cfg.validate()


def _run(args) -> int:
    if args.command == "config":
        text = example_config(args.commodity).to_yaml()
        if args.out:
            write_text_atomic(args.out, text)
            print(f"wrote {args.out}")
        else:
            sys.stdout.write(text)
        return 0

    cfg = resolve_config(args)
    if args.command == "ingest":
        s = pipeline.run_ingest(cfg)
        print(f"{s['rows']} rows, {s['start']}..{s['end']}")
        print(f"split {cfg.split_ratio}: train {s['train']} ({s['train_range']}), "
              f"test {s['test']} ({s['test_range']})")
    elif args.command == "train":
        s = pipeline.run_train(cfg)
        print(f"{s['model']} trained: final train RMSE (scaled) {s['final_train_rmse_scaled']:.6f}, "
              f"test RMSE {s['test_rmse']:.6g}, MAPE {s['test_mape']:.3f}%")
        print(f"outputs in {cfg.out}")
    elif args.command == "gridsearch":
        s = pipeline.run_gridsearch(cfg, timing=not args.no_timing)
        b = s["best"]
        print(f"{s['trials']} trials ({s['failed']} failed); best: dropout {b['dropout']}, "
              f"units {b['units']}, epochs {b['epochs']}, lookback {b['lookback']} "
              f"(test RMSE scaled {b['test_rmse_scaled']:.6f})")
        print(f"table: {Path(cfg.out) / 'grid.csv'}; best config: "
              f"{Path(cfg.out) / 'best_config.yaml'}")
    elif args.command == "arima":
        s = pipeline.run_arima(cfg, cache_dir=args.cache)
        verdict = "stationary around breaks" if s["d"] == 0 else "unit root not rejected, d=1"
        print(f"breakpoint ADF: min t {s['min_t']:.4f} at {s['break_date']} (lag {s['lag']}), "
              f"p {s['p_value']:.4f}: {verdict}")
        p, d, q = s["order"]
        print(f"ARIMA({p},{d},{q}) by SIC: test RMSE {s['test_rmse']:.6g}, "
              f"MAPE {s['test_mape']:.3f}%")
    elif args.command == "compare":
        r = pipeline.run_compare(cfg, args.neural, args.arima)
        for row in r["evaluation"]:
            print(f"{row['name']:<16} RMSE {row['rmse']:<12.6g} MAPE {row['mape']:.3f}%")
        for t in r["hln"]:
            print(f"HLN {t['a']} vs {t['b']}: stat {t['statistic']:.4f}, p {t['p_value']:.4f}")
        for c in r["paper-comparison"]:
            print(f"reference check [{c['status']}]: {c['check']}")
        print(f"report: {Path(cfg.out) / 'report.yaml'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except (ConfigError, DataError, FileNotFoundError, pipeline.PipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"error: {exc}; try a smaller learning rate or clip norm", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
