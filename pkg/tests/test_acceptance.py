"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line (repeated in the pytest
terminal summary). Soft reference targets print ``[REPORT]`` lines and never
fail. Expensive null distributions are cached under ``.cache/`` at the
repository root (override with ``PRICECAST_CACHE``).
"""
import filecmp
import math
import os
import time
from pathlib import Path

import numpy as np
import pytest
import yaml

from pricecast import arima as ar
from pricecast import rng as rngmod
from pricecast.cli import main
from pricecast.data import make_windows
from pricecast.evaluation import hln_test
from pricecast.io import read_csv
from pricecast.neural import AdamState, TrainConfig, adam_step, init_network, train
from pricecast.neural.gradcheck import check_gradients
from pricecast.unitroot import BreakSpec, breakpoint_adf, simulate_null

from conftest import ACCEPTANCE_LINES

ROOT = Path(__file__).resolve().parents[1]
CACHE = Path(os.environ.get("PRICECAST_CACHE", ROOT / ".cache"))


def report(criterion: str, ok, detail: str):
    tag = "REPORT" if ok is None else ("PASS" if ok else "FAIL")
    line = f"[{tag}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def test_c1_gradient_correctness():
    t0 = time.perf_counter()
    results = [check_gradients(k, hidden=4, lookback=3, trials=100, tol=1e-5)
               for k in ("rnn", "gru_simple", "gru_full", "lstm")]
    elapsed = time.perf_counter() - t0
    ok = all(r.passed(1e-5) for r in results) and elapsed < 60
    worst = max(r.worst_norm_rel for r in results)
    report("C1 gradient check (4 cells x 100 trials)", ok,
           f"worst relative error {worst:.2e} (tol 1e-5), {elapsed:.1f}s (limit 60s)")
    assert ok


def test_c2_adam_single_step():
    params = {"theta": np.array([0.0])}
    adam_step(params, {"theta": np.array([1.0])},
              AdamState.for_params(params, alpha=0.001, beta1=0.9, beta2=0.999, epsilon=1e-8))
    want = -0.001 * (1.0 / (1.0 + 1e-8))
    err = abs(params["theta"][0] - want)
    ok = err <= 1e-12
    report("C2 ADAM single step", ok, f"theta {float(params['theta'][0])!r}, |error| {err:.1e} (tol 1e-12)")
    assert ok


def _sine_run():
    t = np.arange(500)
    z = np.sin(2 * np.pi * t / 50)
    z = (z - z.min()) / (z.max() - z.min())
    net = init_network("lstm", 16, 1, 4, seed=3)
    return train(net, make_windows(z, 4), TrainConfig(epochs=100, seed=3))


def test_c3_sine_learnability():
    t0 = time.perf_counter()
    net_a, hist_a = _sine_run()
    net_b, hist_b = _sine_run()
    elapsed = time.perf_counter() - t0
    same = hist_a == hist_b and all(np.array_equal(net_a.params[k], net_b.params[k])
                                    for k in net_a.params)
    ok = hist_a[-1] < 0.05 and same and elapsed / 2 < 120
    report("C3 LSTM on noiseless sine", ok,
           f"final training RMSE {hist_a[-1]:.5f} (< 0.05), identical reruns {same}, "
           f"{elapsed / 2:.1f}s per run")
    assert ok


def test_c4_arma_recovery():
    t0 = time.perf_counter()
    ar_err, ma_err = [], []
    for i in range(100):
        x = ar.simulate_arma(2000, ar=(0.7,), rng=rngmod.stream(3, "accept-ar", i))
        ar_err.append(abs(ar.fit_arma(x, (1, 0)).ar[0] - 0.7))
        x = ar.simulate_arma(2000, ma=(0.4,), rng=rngmod.stream(3, "accept-ma", i))
        ma_err.append(abs(ar.fit_arma(x, (0, 1)).ma[0] - 0.4))
    hits = 0
    for i in range(200):
        x = rngmod.stream(3, "accept-wn", i).standard_normal(500)
        spec, _ = ar.select_order(x, 3, 3)
        hits += (spec.p, spec.q) == (0, 0)
    elapsed = time.perf_counter() - t0
    ar_mae, ma_mae, share = float(np.mean(ar_err)), float(np.mean(ma_err)), hits / 200
    ok = ar_mae < 0.05 and ma_mae < 0.07 and share >= 0.80 and elapsed < 300
    report("C4 ARMA recovery", ok,
           f"AR(1) MAE {ar_mae:.4f} (< 0.05), MA(1) MAE {ma_mae:.4f} (< 0.07), "
           f"white noise -> (0,0) in {share:.1%} (>= 80%, orders up to 3,3), {elapsed:.1f}s")
    assert ok


def test_c5_breakpoint_adf_size():
    t0 = time.perf_counter()
    spec = BreakSpec("both_breaks")
    null = simulate_null(spec, 500, reps=5000, seed=3, n_jobs=os.cpu_count() or 1,
                         cache_dir=CACHE / "nulls")
    rejections = 0
    for i in range(200):
        walk = np.cumsum(rngmod.stream(3, "accept-size", i).standard_normal(500))
        rejections += breakpoint_adf(walk, spec, null=null).rejects(0.05)
    elapsed = time.perf_counter() - t0
    rate = rejections / 200
    ok = 0.02 <= rate <= 0.09 and elapsed < 900
    report("C5 breakpoint ADF size", ok,
           f"rejection rate {rate:.1%} at 5% (target [2%, 9%]), 5% critical value "
           f"{null.quantile(0.05):.3f}, {elapsed:.1f}s")
    assert ok


def test_c6_hln_size_and_degenerate():
    rejections = 0
    for i in range(1000):
        g = rngmod.stream(3, "accept-hln", i)
        rejections += hln_test(g.standard_normal(100), g.standard_normal(100), h=1).p_value <= 0.05
    e = rngmod.stream(3, "accept-hln-deg").standard_normal(100)
    deg = hln_test(e, e.copy())
    rate = rejections / 1000
    ok = 0.03 <= rate <= 0.07 and deg.p_value == 1.0
    report("C6 HLN size", ok, f"rejection rate {rate:.1%} (target [3%, 7%]), "
                              f"identical errors p = {deg.p_value}")
    assert ok


GRID = ["--grid-dropout", "0.001,0.3", "--grid-units", "10,50", "--grid-epochs", "20,40",
        "--grid-lookback", "2,4", "--no-timing"]


def _pipeline(out: Path, commodity: str, cache=None) -> float:
    t0 = time.perf_counter()
    common = ["--commodity", commodity, "--out", str(out)]
    assert main(["ingest", *common]) == 0
    assert main(["gridsearch", *common, *GRID]) == 0
    assert main(["train", "--config", str(out / "best_config.yaml")]) == 0
    assert main(["arima", *common, *(["--cache", str(cache)] if cache else [])]) == 0
    assert main(["compare", *common]) == 0
    return time.perf_counter() - t0


@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("e2e")
    out = base / "cotton"
    runs = {}
    # same config (including the output path) twice; each run simulates its own null
    t_a = _pipeline(out, "cotton")
    out.rename(base / "cotton_a")
    t_b = _pipeline(out, "cotton")
    out.rename(base / "cotton_b")
    runs["cotton_a"] = (base / "cotton_a", t_a)
    runs["cotton_b"] = (base / "cotton_b", t_b)
    # oil has the same length, so the cached null is reused
    runs["oil"] = (base / "oil", _pipeline(base / "oil", "oil", base / "cotton_a" / "null_cache"))
    return runs


def _tree(path: Path):
    return sorted(p.relative_to(path) for p in path.rglob("*") if p.is_file())


def test_c9_end_to_end_determinism(pipeline_runs):
    a, ta = pipeline_runs["cotton_a"]
    b, tb = pipeline_runs["cotton_b"]
    files = _tree(a)
    same_names = files == _tree(b)
    diff = [str(f) for f in files if not filecmp.cmp(a / f, b / f, shallow=False)]
    ok = same_names and not diff and max(ta, tb) < 1800
    report("C9 end-to-end determinism", ok,
           f"{len(files)} files byte-identical across two runs: {same_names and not diff}"
           f"{' (differ: ' + ', '.join(diff) + ')' if diff else ''}; "
           f"run times {ta:.0f}s / {tb:.0f}s (limit 1800s)")
    assert ok


def test_c7_combination_properties(pipeline_runs):
    lines = []
    ok = True
    for key in ("cotton_a", "oil"):
        out, _ = pipeline_runs[key]
        rows = yaml.safe_load((out / "report.yaml").read_text())["evaluation"]
        indiv = min(r["rmse"] for r in rows if r["kind"] == "individual")
        by = {r["name"]: r for r in rows}
        ls = by["least_squares"]["rmse"]
        sums = [abs(sum(by[s]["weights"].values()) - 1.0) for s in ("inverse_mse", "mse_ranks")]
        ok &= ls <= indiv and max(sums) <= 1e-12
        lines.append(f"{key}: LS RMSE {ls:.6g} <= best single {indiv:.6g}, "
                     f"weight-sum error {max(sums):.1e}")
    # a batch of synthetic pairs as well
    from pricecast.combine import combine_inverse_mse, combine_least_squares, combine_mse_ranks
    from pricecast.evaluation import rmse
    worst = 0.0
    for i in range(200):
        g = rngmod.stream(3, "accept-combine", i)
        y = np.cumsum(g.standard_normal(120)) + 50
        fc = {"a": y + g.normal(0.3, 1.0, 120), "b": y + g.normal(-0.2, 0.6, 120)}
        ls = combine_least_squares(fc, y)
        ok &= rmse(y, ls.combined) <= min(rmse(y, f) for f in fc.values())
        for res in (combine_inverse_mse(fc, y), combine_mse_ranks(fc, y)):
            worst = max(worst, abs(res.weights.sum() - 1.0))
    ok &= worst <= 1e-12
    report("C7 combination projection and weight sums", ok,
           "; ".join(lines) + f"; 200 synthetic cases, worst weight-sum error {worst:.1e}")
    assert ok


def test_c8_reference_targets_reported(pipeline_runs):
    for key in ("cotton_a", "oil"):
        out, _ = pipeline_runs[key]
        checks = yaml.safe_load((out / "report.yaml").read_text())["paper-comparison"]
        assert checks, "paper-comparison section missing"
        for c in checks:
            detail = ", ".join(f"{k}={v}" for k, v in c.items() if k not in ("check", "status"))
            report(f"C8 {key.split('_')[0]} {c['check']}", None, f"{c['status']} ({detail})")
