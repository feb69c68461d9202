"""Acceptance suite: one test per release criterion.

Each test asserts the behavior and its runtime budget, so `pytest -v`
prints a single pass/fail line per criterion.
"""

import time

import numpy as np
import pytest

from conftest import make_dataset
from vwaakelm import cli, tuning, vwaa
from vwaakelm.data import PowerCoefficients, generate_synthetic, prepare_splits
from vwaakelm.kelm import KernelParams, WeightVector, kernel_matrix, train
from vwaakelm.metrics import (
    error_histogram,
    measure_inference_ms_per_sample,
    r2,
    rmse,
    rpd,
)


def test_c01_solver_matches_explicit_inverse_oracle():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 11))
        d = int(rng.integers(1, 5))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n)
        params = KernelParams(gamma=float(rng.uniform(0.05, 1.0)),
                              c=float(rng.uniform(0.5, 500.0)))
        model = train(X, y, params)
        K = kernel_matrix(X, params.gamma)
        beta_oracle = np.linalg.inv(K + np.eye(n) / params.c) @ y
        worst = max(worst, float(np.abs(model.beta - beta_oracle).max()))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-8
    assert elapsed < 1.0


def test_c02_interpolation_limit_and_monotone_fit():
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    # distinct, well-separated rows keep the near-singular c=1e9 solve stable
    X = 3.0 * rng.uniform(size=(60, 5))
    y = 200.0 + 80.0 * rng.normal(size=60)
    params = KernelParams(gamma=0.3, c=1e9)
    interp_rmse = rmse(y, train(X, y, params).predict(X))
    fits = [
        rmse(y, train(X, y, KernelParams(gamma=0.3, c=c)).predict(X))
        for c in (1.0, 10.0, 100.0, 1000.0)
    ]
    elapsed = time.perf_counter() - t0
    assert interp_rmse < 1e-3
    assert all(b <= a for a, b in zip(fits, fits[1:]))
    assert elapsed < 5.0


def test_c03_feature_weights_equal_prescaled_columns():
    rng = np.random.default_rng(103)
    for _ in range(10):
        n = int(rng.integers(5, 25))
        d = int(rng.integers(1, 6))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n)
        Q = rng.normal(size=(7, d))
        params = KernelParams(gamma=float(rng.uniform(0.05, 0.8)),
                              c=float(rng.uniform(1.0, 300.0)))
        origins = [f"x{j}" for j in range(d)]
        w = WeightVector(
            {o: float(rng.uniform(0.05, 1.0)) for o in origins}
        )
        weighted = train(X, y, params, weights=w, origins=origins)
        scales = w.column_scales(origins)
        plain = train(X * scales, y, params)
        diff = np.abs(weighted.predict(Q) - plain.predict(Q * scales)).max()
        assert diff < 1e-12


def test_c04_metric_fixtures_and_rpd_identity():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert abs(rmse([0.0, 0.0], [3.0, 4.0]) - 3.535534) < 5e-7
    assert abs(rmse([1, 2, 3, 4], [1.1, 1.9, 3.2, 3.8]) - 0.158114) < 5e-7
    assert r2([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0
    assert r2([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == 0.0
    assert r2([1, 2, 3], [1, 2, 4]) == pytest.approx(0.5)
    assert abs(rpd([1, 2, 3, 4], [1.1, 1.9, 3.2, 3.8]) - 8.16497) < 5e-6
    assert error_histogram([0.0, 0.0, 0.0], [10.0, 60.0, 120.0]) == (1, 1, 1)
    assert error_histogram([5.0] * 7, [5.0] * 7) == (7, 0, 0)
    assert error_histogram([0.0, 0.0], [50.0, 100.0]) == (1, 1, 0)

    rng = np.random.default_rng(104)
    for _ in range(100):
        n = int(rng.integers(2, 80))
        actual = rng.normal(250.0, rng.uniform(0.5, 60.0), size=n)
        predicted = actual + rng.normal(0.0, 10.0, size=n)
        sd = float(np.std(actual, ddof=1))
        if sd == 0.0 or rmse(actual, predicted) == 0.0:
            continue
        assert abs(rpd(actual, predicted) * rmse(actual, predicted) - sd) < 1e-9


def test_c05_vwaa_dominates_uniform_and_monotone_history():
    params = KernelParams(gamma=0.15, c=180.0)
    for seed in (1, 2, 3):
        records = generate_synthetic(220, seed=seed, noise_sd=8.0)
        splits, _, _ = prepare_splits(records, (0.7, 0.15, 0.15), seed)
        tr, va = splits["train"], splits["val"]
        cfg = vwaa.VwaaConfig(population=6, top_k=4, max_iters=5, seed=seed)
        res = vwaa.optimize(tr, va, params, cfg)
        ones = WeightVector.ones(tr.original_features, cfg.w_min)
        ones_fit, _ = vwaa.fitness(ones, tr, va, params, cfg.lambda_kl)
        assert res.best_fitness <= ones_fit
        assert all(b <= a for a, b in zip(res.history, res.history[1:]))


def test_c06_recovers_relevant_features_across_seeds():
    t0 = time.perf_counter()
    coeffs = PowerCoefficients(mem=0.0, eff_slope=0.0)
    params = KernelParams(gamma=0.15, c=180.0)
    wins = 0
    for seed in (1, 2, 3, 4, 5):
        records = generate_synthetic(1500, seed=seed, noise_sd=8.0,
                                     coefficients=coeffs)
        splits, _, _ = prepare_splits(records, (0.7, 0.15, 0.15), seed)
        cfg = vwaa.VwaaConfig(population=10, max_iters=12, seed=seed)
        res = vwaa.optimize(splits["train"], splits["val"], params, cfg)
        w = res.best_weights.weights
        zeroed_mean = 0.5 * (w["memory_usage"] + w["energy_efficiency"])
        wins += w["cpu_usage"] > zeroed_mean
    elapsed = time.perf_counter() - t0
    assert wins >= 4
    assert elapsed < 120.0


def test_c07_end_to_end_quality_on_synthetic_analog():
    t0 = time.perf_counter()
    records = generate_synthetic(2000, seed=42, noise_sd=8.0)
    splits, _, _ = prepare_splits(records, (0.7, 0.15, 0.15), 42)
    tr, va, te = splits["train"], splits["val"], splits["test"]

    found = tuning.grid_search(tr, va, tuning.SearchGrid())
    params = KernelParams(gamma=found.best_gamma, c=found.best_c)
    cfg = vwaa.VwaaConfig(population=10, max_iters=10, seed=42)
    res = vwaa.optimize(tr, va, params, cfg)
    model = train(tr.feature_matrix, tr.targets, params,
                  weights=res.best_weights, origins=tr.origins)
    pred = model.predict(te.feature_matrix)
    test_r2 = r2(te.targets, pred)
    test_rpd = rpd(te.targets, pred)
    elapsed = time.perf_counter() - t0
    assert test_r2 >= 0.90
    assert test_rpd >= 3.0
    assert elapsed < 120.0


def test_c08_grid_argmin_matches_oracle_and_tie_rule():
    rng = np.random.default_rng(108)
    X = rng.uniform(size=(60, 3))
    y = 150.0 + 70.0 * X[:, 0] + rng.normal(0, 5, 60)
    tr = make_dataset(X[:48], y[:48])
    va = make_dataset(X[48:], y[48:])
    grid = tuning.SearchGrid()
    result = tuning.grid_search(tr, va, grid)
    assert len(result.surface) == 49

    oracle = None
    for gamma in grid.gamma_values:
        for c in grid.c_values:
            model = train(tr.feature_matrix, tr.targets, KernelParams(gamma, c))
            val = rmse(va.targets, model.predict(va.feature_matrix))
            if oracle is None or val < oracle[0]:
                oracle = (val, gamma, c)
    assert (result.best_gamma, result.best_c) == (oracle[1], oracle[2])

    # equal-RMSE fixture: zero targets make every cell exactly 0
    zt = make_dataset(rng.uniform(size=(20, 2)), np.zeros(20))
    zv = make_dataset(rng.uniform(size=(8, 2)), np.zeros(8))
    tie = tuning.grid_search(zt, zv, grid)
    assert all(cell.rmse_val == 0.0 for cell in tie.surface)
    assert tie.best_gamma == grid.gamma_values[0]
    assert tie.best_c == grid.c_values[0]


def test_c09_train_cli_is_byte_deterministic(tmp_path):
    data = tmp_path / "data.csv"
    assert cli.main(["gen-data", "--rows", "200", "--seed", "6",
                     "--out", str(data)]) == 0
    outputs = []
    for tag in ("a", "b"):
        model = tmp_path / f"model_{tag}.json"
        report = tmp_path / f"report_{tag}.json"
        rc = cli.main(["train", "--data", str(data), "--seed", "29",
                       "--population", "5", "--top-k", "4", "--iters", "3",
                       "--model-out", str(model), "--report-out", str(report)])
        assert rc == 0
        outputs.append((model.read_bytes(), report.read_bytes()))
    assert outputs[0][0] == outputs[1][0]
    assert outputs[0][1] == outputs[1][1]


def test_c10_per_sample_inference_scales_linearly():
    rng = np.random.default_rng(110)
    d = 14
    params = KernelParams(gamma=0.15, c=180.0)
    queries = rng.random((500, d))

    ratios = []
    for _ in range(3):
        small = train(rng.random((200, d)), rng.random(200), params)
        large = train(rng.random((1000, d)), rng.random(1000), params)
        t_small = measure_inference_ms_per_sample(small.predict, queries)
        t_large = measure_inference_ms_per_sample(large.predict, queries)
        ratios.append(t_large / t_small)
    ratio = sorted(ratios)[1]
    assert 2.0 <= ratio <= 10.0


def test_c11_early_stop_after_patience_plateau_iterations():
    records = generate_synthetic(200, seed=5, noise_sd=8.0)
    splits, _, _ = prepare_splits(records, (0.7, 0.15, 0.15), 5)
    cfg = vwaa.VwaaConfig(population=6, top_k=4, max_iters=50, sigma0=0.0,
                          seed=5, patience=5, rel_tol=0.001)
    res = vwaa.optimize(splits["train"], splits["val"],
                        KernelParams(gamma=0.15, c=180.0), cfg)
    assert res.stop_reason == "converged"

    history = res.history
    plateau_start = None
    for t in range(1, len(history)):
        improvement = ((history[t - 1] - history[t]) / history[t - 1]
                       if history[t - 1] > 0 else 0.0)
        if improvement < cfg.rel_tol:
            plateau_start = t
            break
    assert plateau_start is not None
    iterations_run = len(history) - 1
    post_plateau = iterations_run - (plateau_start - 1)
    assert post_plateau == cfg.patience
