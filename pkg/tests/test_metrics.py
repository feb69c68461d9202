import json

import numpy as np
import pytest

from vwaakelm.errors import UndefinedMetricError
from vwaakelm.kelm import KernelParams, train
from vwaakelm.metrics import (
    HISTOGRAM_KEYS,
    build_report,
    error_histogram,
    measure_inference_ms_per_sample,
    r2,
    rmse,
    rpd,
    split_metrics,
)


def test_rmse_perfect():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0


def test_rmse_known_values():
    assert abs(rmse([0.0, 0.0], [3.0, 4.0]) - 3.535534) < 5e-7
    assert abs(rmse([1, 2, 3, 4], [1.1, 1.9, 3.2, 3.8]) - 0.158114) < 5e-7


def test_rmse_length_mismatch():
    with pytest.raises(ValueError):
        rmse([1.0], [1.0, 2.0])


def test_r2_perfect_and_mean():
    actual = [1.0, 2.0, 3.0]
    assert r2(actual, actual) == 1.0
    assert r2(actual, [2.0, 2.0, 2.0]) == 0.0


def test_r2_known_value():
    assert r2([1, 2, 3], [1, 2, 4]) == pytest.approx(0.5)


def test_r2_constant_actual_undefined():
    with pytest.raises(UndefinedMetricError):
        r2([5.0, 5.0, 5.0], [1.0, 2.0, 3.0])


def test_rpd_known_value():
    assert abs(rpd([1, 2, 3, 4], [1.1, 1.9, 3.2, 3.8]) - 8.16497) < 5e-6


def test_rpd_sd_equal_rmse_is_one():
    actual = np.array([0.0, 2.0])
    sd = np.std(actual, ddof=1)
    predicted = actual + np.array([sd, sd])
    assert rpd(actual, predicted) == pytest.approx(1.0)


def test_rpd_zero_rmse_undefined():
    with pytest.raises(UndefinedMetricError):
        rpd([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(UndefinedMetricError):
        rpd([3.0, 3.0], [1.0, 2.0])


def test_identity_rpd_times_rmse_is_sd():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(2, 60))
        actual = rng.normal(200.0, rng.uniform(1.0, 40.0), size=n)
        predicted = actual + rng.normal(0.0, 5.0, size=n)
        if np.std(actual, ddof=1) == 0.0 or rmse(actual, predicted) == 0.0:
            continue
        sd = float(np.std(actual, ddof=1))
        assert abs(rpd(actual, predicted) * rmse(actual, predicted) - sd) < 1e-9


def test_metrics_permutation_invariant():
    rng = np.random.default_rng(23)
    actual = rng.normal(100, 10, 30)
    predicted = actual + rng.normal(0, 3, 30)
    perm = rng.permutation(30)
    assert rmse(actual, predicted) == pytest.approx(rmse(actual[perm], predicted[perm]))
    assert r2(actual, predicted) == pytest.approx(r2(actual[perm], predicted[perm]))
    assert rpd(actual, predicted) == pytest.approx(rpd(actual[perm], predicted[perm]))


def test_histogram_bins():
    actual = [0.0, 0.0, 0.0]
    predicted = [10.0, 60.0, 120.0]
    assert error_histogram(actual, predicted) == (1, 1, 1)


def test_histogram_all_zero_errors():
    actual = [5.0] * 7
    assert error_histogram(actual, actual) == (7, 0, 0)


def test_histogram_boundaries_go_low():
    actual = [0.0, 0.0]
    predicted = [50.0, 100.0]
    assert error_histogram(actual, predicted) == (1, 1, 0)


def test_histogram_counts_sum():
    rng = np.random.default_rng(29)
    actual = rng.normal(200, 50, 83)
    predicted = actual + rng.normal(0, 60, 83)
    assert sum(error_histogram(actual, predicted)) == 83


def test_split_metrics_notes_undefined():
    sm = split_metrics([4.0, 4.0], [1.0, 2.0])
    assert sm.r2 is None and sm.rpd is None
    assert len(sm.notes) == 2
    assert sm.rmse > 0


def _trained_model(n=40, c=180.0, seed=0):
    from conftest import make_dataset

    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, 3))
    y = 100.0 + 60.0 * X[:, 0] + 20.0 * X[:, 1] + rng.normal(0, 2, n)
    ds = make_dataset(X, y)
    model = train(ds.feature_matrix, ds.targets, KernelParams(gamma=0.3, c=c),
                  origins=ds.origins)
    return model, ds


def test_build_report_fields_and_payload(tmp_path):
    model, ds = _trained_model()
    report = build_report(model, {"train": ds}, out_dir=tmp_path,
                          history=[3.0, 2.0, 2.0])
    payload = json.loads(report.to_bytes())
    assert payload["format_version"] == 1
    assert payload["params"] == {"gamma": 0.3, "c": 180.0}
    assert set(payload["splits"]) == {"train"}
    hist = payload["splits"]["train"]["error_histogram"]
    assert set(hist) == set(HISTOGRAM_KEYS)
    assert sum(hist.values()) == len(ds)
    assert set(payload["feature_weights"]["weights"]) == {"x0", "x1", "x2"}
    assert payload["timings"] is None

    assert (tmp_path / "scatter_train.csv").read_text().startswith("actual,predicted\n")
    errors = (tmp_path / "errors_train.csv").read_text().splitlines()
    assert errors[0] == "abs_error" and len(errors) == len(ds) + 1
    weights = (tmp_path / "weights.csv").read_text().splitlines()
    assert weights[0] == "feature,weight" and len(weights) == 4
    history = (tmp_path / "history.csv").read_text().splitlines()
    assert history == ["iteration,fitness", "0,3.0", "1,2.0", "2,2.0"]


def test_build_report_near_interpolation_r2():
    model, ds = _trained_model(c=1e9)
    report = build_report(model, {"train": ds})
    assert report.splits["train"].r2 > 0.999


def test_report_bytes_deterministic():
    model, ds = _trained_model()
    a = build_report(model, {"train": ds}).to_bytes()
    b = build_report(model, {"train": ds}).to_bytes()
    assert a == b


def test_measure_inference_time_positive():
    model, ds = _trained_model()
    t = measure_inference_ms_per_sample(model.predict, ds.feature_matrix,
                                        min_samples=50, repeats=2)
    assert t > 0.0
