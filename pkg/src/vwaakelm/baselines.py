"""Comparison models: plain ELM and uniform-weight KELM.

The ELM maps inputs through a random frozen hidden layer (sigmoid, weights
and biases uniform in [-1, 1], hidden size defaulting to eight times the
number of encoded input columns) and fits only the output weights by
regularized least squares.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import vwaa
from ._rng import SplitMix64, derive_seed
from .data import Dataset
from .errors import InputError, NumericError
from .kelm import KernelParams, WeightVector, _solve_spd, train
from .metrics import measure_inference_ms_per_sample, rpd, r2, rmse
from .vwaa import VwaaConfig

HIDDEN_MULTIPLIER = 8


@dataclass
class ElmModel:
    input_weights: np.ndarray  # (h, d)
    biases: np.ndarray  # (h,)
    output_weights: np.ndarray  # (h,)
    c: float
    seed: int

    @property
    def hidden(self) -> int:
        return self.input_weights.shape[0]


def train_elm(X, y, c: float, seed: int, hidden: int | None = None) -> ElmModel:
    """Fit output weights of a random sigmoid hidden layer.

    Weights are drawn row-major (per hidden node, then per input), biases
    after, all from one seeded substream, so the model is a pure function
    of (X, y, c, seed, hidden).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] < 1:
        raise ValueError("X and y must be non-empty with matching row counts")
    d = X.shape[1]
    h = HIDDEN_MULTIPLIER * d if hidden is None else int(hidden)
    if h < 1:
        raise ValueError("need at least one hidden node")

    rng = SplitMix64(derive_seed(seed, "elm"))
    draws = np.array([rng.uniform(-1.0, 1.0) for _ in range(h * d + h)])
    A = draws[: h * d].reshape(h, d)
    b = draws[h * d :]

    H = expit(X @ A.T + b)
    G = H.T @ H + np.eye(h) / c
    v = _solve_spd(G, H.T @ y)
    return ElmModel(input_weights=A, biases=b, output_weights=v, c=c, seed=seed)


def predict_elm(model: ElmModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_weights.shape[1]:
        raise ValueError(
            f"query matrix must have {model.input_weights.shape[1]} columns"
        )
    return expit(X @ model.input_weights.T + model.biases) @ model.output_weights


@dataclass
class ModelEntry:
    name: str
    rmse: float | None
    r2: float | None
    rpd: float | None
    train_time_s: float | None
    infer_time_ms_per_sample: float | None
    error: str | None = None


@dataclass
class ComparisonReport:
    models: list[ModelEntry]
    vwaa_summary: dict = field(default_factory=dict)
    gamma: float = 0.0
    c: float = 0.0

    def to_payload(self) -> dict:
        return {
            "format_version": 1,
            "params": {"gamma": self.gamma, "c": self.c},
            "models": [
                {
                    "name": m.name,
                    "rmse": m.rmse,
                    "r2": m.r2,
                    "rpd": m.rpd,
                    "train_time_s": m.train_time_s,
                    "infer_time_ms_per_sample": m.infer_time_ms_per_sample,
                    **({"error": m.error} if m.error is not None else {}),
                }
                for m in self.models
            ],
            "vwaa": self.vwaa_summary,
        }

    def to_bytes(self) -> bytes:
        return json.dumps(self.to_payload(), separators=(",", ":"),
                          ensure_ascii=False, allow_nan=False).encode("utf-8")

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ComparisonReport":
        try:
            payload = json.loads(blob.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise InputError(f"malformed comparison JSON: {e}") from None
        return cls(
            models=[
                ModelEntry(
                    name=m["name"],
                    rmse=m["rmse"],
                    r2=m["r2"],
                    rpd=m["rpd"],
                    train_time_s=m["train_time_s"],
                    infer_time_ms_per_sample=m["infer_time_ms_per_sample"],
                    error=m.get("error"),
                )
                for m in payload["models"]
            ],
            vwaa_summary=payload["vwaa"],
            gamma=payload["params"]["gamma"],
            c=payload["params"]["c"],
        )


def _entry(name, predict_fn, test: Dataset, train_time: float) -> ModelEntry:
    pred = predict_fn(test.feature_matrix)
    infer_ms = measure_inference_ms_per_sample(predict_fn, test.feature_matrix)
    return ModelEntry(
        name=name,
        rmse=rmse(test.targets, pred),
        r2=r2(test.targets, pred),
        rpd=rpd(test.targets, pred),
        train_time_s=train_time,
        infer_time_ms_per_sample=infer_ms,
    )


def _failed(name, error) -> ModelEntry:
    return ModelEntry(name=name, rmse=None, r2=None, rpd=None, train_time_s=None,
                      infer_time_ms_per_sample=None, error=str(error))


def compare_models(
    train_split: Dataset,
    val_split: Dataset,
    test_split: Dataset,
    params: KernelParams,
    config: VwaaConfig,
) -> ComparisonReport:
    """Train VWAA-KELM, uniform KELM and ELM on identical splits.

    Each entry reports test RMSE / R2 / RPD, wall-clock training time and
    per-sample inference time. A numeric failure in one model is recorded
    in its entry without dropping the others.
    """
    entries: list[ModelEntry] = []
    summary: dict = {}

    try:
        t0 = time.perf_counter()
        result = vwaa.optimize(train_split, val_split, params, config)
        weighted = train(
            train_split.feature_matrix,
            train_split.targets,
            params,
            weights=result.best_weights,
            origins=train_split.origins,
        )
        t_vwaa = time.perf_counter() - t0
        entries.append(_entry("vwaa-kelm", weighted.predict, test_split, t_vwaa))
        summary = {
            "best_penalized_fitness": result.best_fitness,
            "stop_reason": result.stop_reason,
            "iterations": len(result.history) - 1,
            "best_weights": dict(result.best_weights.weights),
        }
    except NumericError as e:
        entries.append(_failed("vwaa-kelm", e))

    try:
        t0 = time.perf_counter()
        uniform = train(
            train_split.feature_matrix,
            train_split.targets,
            params,
            weights=WeightVector.ones(train_split.original_features, config.w_min),
            origins=train_split.origins,
        )
        t_kelm = time.perf_counter() - t0
        entries.append(_entry("kelm", uniform.predict, test_split, t_kelm))
        val_pred = uniform.predict(val_split.feature_matrix)
        summary["uniform_penalized_fitness"] = rmse(val_split.targets, val_pred)
    except NumericError as e:
        entries.append(_failed("kelm", e))

    try:
        t0 = time.perf_counter()
        elm = train_elm(train_split.feature_matrix, train_split.targets,
                        c=params.c, seed=config.seed)
        t_elm = time.perf_counter() - t0
        entries.append(
            _entry("elm", lambda X: predict_elm(elm, X), test_split, t_elm)
        )
    except NumericError as e:
        entries.append(_failed("elm", e))

    return ComparisonReport(models=entries, vwaa_summary=summary,
                            gamma=params.gamma, c=params.c)
