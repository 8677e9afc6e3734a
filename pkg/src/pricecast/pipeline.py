"""End-to-end steps behind the command-line interface.

Each ``run_*`` function reads a validated :class:`PipelineConfig`, writes its
artifacts into ``cfg.out`` and returns a small summary dict. Steps
communicate only through those files, so they can be rerun independently.
"""
from __future__ import annotations

import math
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from . import arima as ar
from . import plotting
from .combine import combine, combine_mse_ranks, evaluate_combinations
from .config import PipelineConfig
from .data import bundled_path, fit_scaler, load_series, make_windows, train_test_split
from .evaluation import ForecastSet, mape, rmse
from .io import read_csv, write_csv, write_text_atomic
from .neural import grid_search, init_network, predict, save_network, train
from .neural.gridsearch import TABLE_HEADER, table_rows
from .unitroot import breakpoint_adf

NEURAL_FILE = "neural_predictions.csv"
ARIMA_FILE = "arima_forecasts.csv"

# published results for the two bundled commodities (used only for reporting)
REFERENCE_RESULTS = {
    "cotton": {"min_t": -4.94, "p_value": 0.0391, "order": (4, 2),
               "rmse": {"arima": 0.1377, "lstm": 0.1754, "average": 0.1374}},
    "oil": {"min_t": -4.85, "p_value": 0.0275, "order": (4, 1),
            "rmse": {"arima": 4.823, "lstm": 5.493, "average": 4.915}},
}
MIN_T_TOLERANCE = 0.5


class PipelineError(RuntimeError):
    """A step cannot run, e.g. because an earlier step's output is missing."""


def _dump_yaml(doc) -> str:
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=False)


def load(cfg: PipelineConfig):
    path = Path(cfg.data) if cfg.data else bundled_path(cfg.commodity)
    return load_series(path, cfg.column_name)


def prepare(cfg: PipelineConfig):
    """Series, chronological split and fitted scaler."""
    series = load(cfg)
    train_s, test_s = train_test_split(series, cfg.split_ratio)
    scaler = fit_scaler(train_s if cfg.scaler == "train" else series)
    return series, train_s, test_s, scaler


def out_dir(cfg: PipelineConfig) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------- ingest

def run_ingest(cfg: PipelineConfig) -> dict:
    series, train_s, test_s, _ = prepare(cfg)
    return {
        "rows": len(series), "start": series.start, "end": series.end,
        "train": len(train_s), "test": len(test_s),
        "train_range": f"{train_s.dates[0]}..{train_s.dates[-1]}",
        "test_range": f"{test_s.dates[0]}..{test_s.dates[-1]}",
    }


# ---------------------------------------------------------------- neural

def run_train(cfg: PipelineConfig) -> dict:
    out = out_dir(cfg)
    _, train_s, test_s, scaler = prepare(cfg)
    n = cfg.neural
    z_train = scaler.apply(train_s.values)
    z_test = scaler.apply(test_s.values)
    tr = make_windows(z_train, n.lookback)
    te = make_windows(z_test, n.lookback)
    net = init_network(n.kind, n.units, 1, n.lookback, n.dropout, seed=cfg.seed)
    net, history = train(net, tr, cfg.train_config())
    fit_scaled = predict(net, tr.features)
    pred_scaled = predict(net, te.features)
    fit = scaler.invert(fit_scaled)
    pred = scaler.invert(pred_scaled)
    tr_dates = train_s.dates[n.lookback:]
    te_dates = test_s.dates[n.lookback:]
    te_actual = test_s.values[n.lookback:]

    save_network(net, out / "model.json")
    write_csv(out / "loss_history.csv", ["epoch", "train_rmse_scaled"],
              [(i, v) for i, v in enumerate(history, start=1)])
    write_csv(out / "train_fit.csv", ["date", "actual", "fitted"],
              zip(tr_dates, train_s.values[n.lookback:], fit))
    write_csv(out / NEURAL_FILE,
              ["date", "actual", "forecast", "actual_scaled", "forecast_scaled"],
              zip(te_dates, te_actual, pred, te.labels, pred_scaled))
    summary = {
        "commodity": cfg.commodity, "model": n.kind, "units": n.units,
        "lookback": n.lookback, "dropout": n.dropout, "epochs": n.epochs,
        "batch_size": n.batch_size, "seed": cfg.seed,
        "scaler": {"mode": cfg.scaler, "lo": scaler.lo, "hi": scaler.hi},
        "final_train_rmse_scaled": history[-1],
        "test_rmse_scaled": float(np.sqrt(np.mean((pred_scaled - te.labels) ** 2))),
        "test_rmse": rmse(te_actual, pred), "test_mape": mape(te_actual, pred),
    }
    write_text_atomic(out / "train_summary.yaml", _dump_yaml(summary))
    plotting.training_chart(
        out / "training.svg", tr_dates, train_s.values[n.lookback:], fit, history,
        te_dates, te_actual, pred, f"{cfg.commodity}: {n.kind.upper()} "
        f"({n.units} units, lookback {n.lookback}, {n.epochs} epochs)",
    )
    return summary


def run_gridsearch(cfg: PipelineConfig, timing: bool = True) -> dict:
    out = out_dir(cfg)
    _, train_s, test_s, scaler = prepare(cfg)
    result = grid_search(
        cfg.neural.kind, cfg.grid_spec(), scaler.apply(train_s.values),
        scaler.apply(test_s.values), cfg.train_config(), n_jobs=cfg.parallel,
    )
    write_csv(out / "grid.csv", TABLE_HEADER, table_rows(result, timing=timing))
    if result.best is None:
        raise PipelineError("every grid trial failed; see grid.csv")
    b = result.best
    best_cfg = PipelineConfig.from_dict(cfg.to_dict())
    best_cfg.neural = replace(best_cfg.neural, dropout=b.dropout, units=b.units,
                              epochs=b.epochs, lookback=b.lookback)
    write_text_atomic(out / "best_config.yaml", best_cfg.to_yaml())
    return {"trials": len(result.table), "failed": sum(not r.ok for r in result.table),
            "best": {"dropout": b.dropout, "units": b.units, "epochs": b.epochs,
                     "lookback": b.lookback, "test_rmse_scaled": b.test_rmse}}


# ---------------------------------------------------------------- arima

def run_arima(cfg: PipelineConfig, cache_dir=None) -> dict:
    out = out_dir(cfg)
    series, train_s, test_s, _ = prepare(cfg)
    u = cfg.unitroot
    cache = Path(cache_dir) if cache_dir is not None else out / "null_cache"
    ur = breakpoint_adf(series, cfg.break_spec(), reps=u.reps, seed=cfg.seed,
                        n_jobs=cfg.parallel, cache_dir=cache)
    stationary = ur.rejects(u.level)
    d = 0 if stationary else 1
    row = ur.to_row()
    row.update(level=u.level, verdict="reject unit root" if stationary else "unit root",
               d=d, n=len(series))
    write_csv(out / "unitroot.csv", list(row), [list(row.values())])

    z = ar.difference(train_s.values, d)
    lags = min(cfg.arima.acf_lags, (len(z) - 1) // 2)
    write_csv(out / "correlogram.csv", ["lag", "acf", "pacf"],
              zip(range(lags + 1), ar.acf(z, lags), ar.pacf(z, lags)))

    spec, table = ar.select_order(train_s.values, cfg.arima.p_max, cfg.arima.q_max, d=d,
                                  n_jobs=cfg.parallel, maxiter=cfg.arima.maxiter,
                                  gtol=cfg.arima.gtol)
    write_csv(out / "orders.csv", ["p", "d", "q", "sic", "css", "n_used", "selected", "error"],
              [(t.p, d, t.q, t.sic, t.css, t.n_used,
                int(t.p == spec.p and t.q == spec.q), t.error) for t in table])
    model = ar.fit_arma(train_s.values, spec, condition=cfg.arima.p_max,
                        maxiter=cfg.arima.maxiter, gtol=cfg.arima.gtol)
    write_text_atomic(out / "arima_model.json", model.to_json())
    fc = ar.rolling_forecast(model, train_s, test_s, refit=cfg.arima.refit,
                             maxiter=cfg.arima.maxiter, gtol=cfg.arima.gtol)
    write_csv(out / ARIMA_FILE, ["date", "actual", "forecast"], zip(test_s.dates, test_s.values, fc))
    return {"min_t": ur.min_t, "p_value": ur.p_value, "break_date": ur.break_date,
            "lag": ur.chosen_lag, "d": d, "order": (spec.p, spec.d, spec.q),
            "test_rmse": rmse(test_s.values, fc), "test_mape": mape(test_s.values, fc)}


# ---------------------------------------------------------------- compare

def _read_forecast(path: Path, what: str, hint: str) -> dict:
    if not path.is_file():
        raise PipelineError(f"missing {what} forecasts at {path}; run `pricecast {hint}` first")
    rows = read_csv(path)
    return {r["date"]: (float(r["actual"]), float(r["forecast"])) for r in rows}


def _label(out: Path) -> str:
    summary = out / "train_summary.yaml"
    if summary.is_file():
        doc = yaml.safe_load(summary.read_text(encoding="utf-8")) or {}
        return str(doc.get("model", "neural")).upper()
    return "NEURAL"


def reference_checks(commodity: str, out: Path, rows) -> list[dict]:
    """Compare this run with the published figures; never raises on divergence."""
    ref = REFERENCE_RESULTS.get(commodity)
    if ref is None:
        return [{"check": "reference values", "status": "n/a",
                 "note": f"no published figures for {commodity!r}"}]
    checks = []
    ur_path = out / "unitroot.csv"
    if ur_path.is_file():
        ur = read_csv(ur_path)[0]
        min_t = float(ur["min_t"])
        ok = abs(min_t - ref["min_t"]) <= MIN_T_TOLERANCE
        checks.append({"check": "breakpoint min-t", "ours": min_t, "published": ref["min_t"],
                       "tolerance": MIN_T_TOLERANCE, "status": "pass" if ok else "diverge",
                       "ours_p_value": float(ur["p_value"]), "published_p_value": ref["p_value"]})
    else:
        checks.append({"check": "breakpoint min-t", "status": "n/a", "note": "unitroot.csv missing"})
    orders_path = out / "orders.csv"
    if orders_path.is_file():
        sel = [r for r in read_csv(orders_path) if r["selected"] == "1"]
        if sel:
            ours = (int(sel[0]["p"]), int(sel[0]["q"]))
            checks.append({"check": "SIC order (p, q)", "ours": list(ours),
                           "published": list(ref["order"]),
                           "status": "pass" if ours == ref["order"] else "diverge"})
    by_name = {r.name: r for r in rows}
    arima_row = by_name.get("ARIMA")
    combos = [r for r in rows if r.kind == "combination"]
    if arima_row is not None and combos:
        best = min(combos, key=lambda r: r.rmse)
        # least squares cannot lose in-sample, so also show the best fixed-rule average
        others = [r for r in combos if r.name != "least_squares"]
        extra = {}
        if others:
            alt = min(others, key=lambda r: r.rmse)
            extra = {"ours_best_other_scheme": alt.name, "ours_best_other_rmse": alt.rmse}
        if commodity == "cotton":
            name, ok = "best average RMSE <= ARIMA RMSE", best.rmse <= arima_row.rmse
        else:
            name, ok = "ARIMA RMSE <= best average RMSE", arima_row.rmse <= best.rmse
        checks.append({"check": name, "ours_average": best.rmse, "ours_arima": arima_row.rmse,
                       "average_scheme": best.name, **extra,
                       "published_average": ref["rmse"]["average"],
                       "published_arima": ref["rmse"]["arima"],
                       "status": "pass" if ok else "diverge"})
    return checks


def run_compare(cfg: PipelineConfig, neural_path=None, arima_path=None) -> dict:
    out = out_dir(cfg)
    neural = _read_forecast(Path(neural_path) if neural_path else out / NEURAL_FILE,
                            "neural-network", "train")
    arima = _read_forecast(Path(arima_path) if arima_path else out / ARIMA_FILE,
                           "ARIMA", "arima")
    label = _label(out)
    actual = {d: a for d, (a, _) in arima.items()}
    actual.update({d: a for d, (a, _) in neural.items()})
    fs = ForecastSet.align(actual, {"ARIMA": {d: f for d, (_, f) in arima.items()},
                                    label: {d: f for d, (_, f) in neural.items()}})
    if len(fs.dates) < 10:
        raise PipelineError(f"only {len(fs.dates)} common test dates between the two forecasts")
    n = len(fs.dates)
    h = cfg.combine.holdout
    if h is None:
        fit_w = eval_w = (0, n)
    else:
        cut = int(math.floor(h * n))
        fit_w, eval_w = (0, cut), (cut, n)
    rows = evaluate_combinations(fs.forecasts, fs.actual, fit_w, eval_w,
                                 schemes=cfg.combine.schemes, rank_rule=cfg.combine.rank_rule)
    hln = fs.hln_matrix(h=1)

    write_csv(out / "comparison.csv",
              ["commodity", "name", "kind", "rmse", "mape", "best_rmse", "best_mape",
               "intercept", "weights", "flags"],
              [(cfg.commodity, r.name, r.kind, r.rmse, r.mape, int(r.best_rmse), int(r.best_mape),
                r.intercept if r.kind == "combination" else "",
                ";".join(f"{k}={v!r}" for k, v in r.weights.items()), ";".join(r.flags))
               for r in rows])
    write_csv(out / "hln.csv",
              ["forecast_a", "forecast_b", "statistic", "p_value", "n", "h", "mean_loss_diff",
               "degenerate"],
              [(a, b, res.statistic, res.p_value, res.n, res.h, res.mean_loss_diff,
                int(res.degenerate)) for a, b, res in hln])
    combos = {}
    for scheme in cfg.combine.schemes:
        if scheme == "mse_ranks":
            res = combine_mse_ranks(fs.forecasts, fs.actual, fit_w, rule=cfg.combine.rank_rule)
        else:
            res = combine(scheme, fs.forecasts, fs.actual, fit_w)
        combos[scheme] = res.combined
    series_cols = {**fs.forecasts, **combos}
    write_csv(out / "plot_data.csv", ["date", "actual", *series_cols],
              [(d, fs.actual[i], *(v[i] for v in series_cols.values()))
               for i, d in enumerate(fs.dates)])
    plotting.forecast_chart(out / "forecasts.svg", fs.dates, fs.actual, series_cols,
                            f"{cfg.commodity}: actual vs. one-step forecasts")
    checks = reference_checks(cfg.commodity, out, rows)
    report = {
        "commodity": cfg.commodity,
        "test_dates": f"{fs.dates[0]}..{fs.dates[-1]}",
        "n": n,
        "weights_fit_window": list(fit_w),
        "eval_window": list(eval_w),
        "evaluation": [
            {"name": r.name, "kind": r.kind, "rmse": r.rmse, "mape": r.mape,
             "best_rmse": r.best_rmse, "best_mape": r.best_mape,
             **({"weights": r.weights, "intercept": r.intercept, "flags": r.flags}
                if r.kind == "combination" else {})}
            for r in rows
        ],
        "hln": [{"a": a, "b": b, "statistic": res.statistic, "p_value": res.p_value,
                 "degenerate": res.degenerate} for a, b, res in hln],
        "paper-comparison": checks,
    }
    write_text_atomic(out / "report.yaml", _dump_yaml(report))
    return report
