"""Weighted-RBF kernel extreme learning machine.

The predictor is a kernel expansion over the stored training rows with dual
coefficients from the regularized least-squares system

    (K + D) beta = y,    D_ii = 1 / (c * s_i)

where K is the weighted RBF kernel matrix and s are optional per-sample
confidence weights (all ones by default). Feature weights enter as squared
column scales inside the distance, i.e.

    k(x, z) = exp(-gamma * sum_j w(j)^2 (x_j - z_j)^2)

with w(j) the weight of the original feature that encoded column j belongs
to -- exactly equivalent to pre-scaling every column by its weight and
applying a plain RBF kernel.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import backends
from .data import ColumnStats, Dataset, PreprocessStats, Schema
from .errors import InputError, NumericError, UnsupportedVersionError

FORMAT_VERSION = 1

DEFAULT_GAMMA = 0.15
DEFAULT_C = 180.0


@dataclass(frozen=True)
class KernelParams:
    """RBF width gamma and regularization strength c."""

    gamma: float = DEFAULT_GAMMA
    c: float = DEFAULT_C

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma!r}")
        if not (np.isfinite(self.c) and self.c > 0):
            raise ValueError(f"c must be positive and finite, got {self.c!r}")


@dataclass
class WeightVector:
    """Per-original-feature importance weights, each in [w_min, 1]."""

    weights: dict[str, float]
    w_min: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.w_min < 1.0:
            raise ValueError(f"w_min must lie in (0, 1), got {self.w_min!r}")
        if not self.weights:
            raise ValueError("weight vector must cover at least one feature")
        for name, w in self.weights.items():
            if not (np.isfinite(w) and self.w_min <= w <= 1.0):
                raise ValueError(
                    f"weight for {name!r} must lie in [{self.w_min}, 1], got {w!r}"
                )

    @classmethod
    def ones(cls, features, w_min: float = 0.05) -> "WeightVector":
        return cls({name: 1.0 for name in features}, w_min=w_min)

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(self.weights)

    def as_array(self, feature_order=None) -> np.ndarray:
        order = self.features if feature_order is None else tuple(feature_order)
        return np.array([self.weights[name] for name in order], dtype=np.float64)

    def column_scales(self, origins) -> np.ndarray:
        """Broadcast feature weights to encoded columns via their origins."""
        try:
            return np.array([self.weights[o] for o in origins], dtype=np.float64)
        except KeyError as e:
            raise ValueError(f"no weight for feature {e.args[0]!r}") from None


def weighted_rbf(x, z, gamma: float, column_weights=None) -> float:
    """Kernel value for a single pair of encoded rows."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape or x.ndim != 1:
        raise ValueError(f"x and z must be equal-length vectors, got {x.shape} vs {z.shape}")
    diff = x - z
    if column_weights is not None:
        w = np.asarray(column_weights, dtype=np.float64)
        if w.shape != x.shape:
            raise ValueError("column_weights must match the row dimension")
        diff = w * diff
    return float(np.exp(-gamma * np.dot(diff, diff)))


def kernel_matrix(X, gamma: float, column_weights=None) -> np.ndarray:
    """Weighted RBF kernel matrix of X against itself.

    Exactly symmetric with a unit diagonal (the backends compute the upper
    triangle and mirror it).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("kernel input contains non-finite values")
    if column_weights is not None:
        X = X * np.asarray(column_weights, dtype=np.float64)
    return backends.rbf_kernel_symmetric(X, gamma)


def _solve_spd(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Cholesky solve with jitter escalation 1e-10 .. 1e-6 on failure."""
    jitter = 0.0
    while True:
        try:
            M = A if jitter == 0.0 else A + jitter * np.eye(A.shape[0])
            factor = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
            return scipy.linalg.cho_solve(factor, y, check_finite=False)
        except scipy.linalg.LinAlgError:
            if jitter >= 1e-6:
                raise NumericError(
                    f"SPD factorization failed even with diagonal jitter {jitter:g}"
                ) from None
            jitter = 1e-10 if jitter == 0.0 else jitter * 10.0


@dataclass
class KelmModel:
    """Trained predictor; immutable in practice and safe to share."""

    support_matrix: np.ndarray
    beta: np.ndarray
    params: KernelParams
    feature_weights: WeightVector
    origins: tuple[str, ...]
    schema: Schema | None = None
    preprocess_stats: PreprocessStats | None = None
    window_len: int = 1
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.beta.shape[0] != self.support_matrix.shape[0]:
            raise ValueError("beta length must match the support row count")

    @property
    def column_scales(self) -> np.ndarray:
        return self.feature_weights.column_scales(self.origins)

    def predict(self, X) -> np.ndarray:
        """Kernel expansion over the support rows; does not modify the model."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.support_matrix.shape[1]:
            raise ValueError(
                f"query matrix must have {self.support_matrix.shape[1]} columns"
            )
        scales = self.column_scales
        K = backends.rbf_kernel_cross(X * scales, self.support_matrix * scales,
                                      self.params.gamma)
        return K @ self.beta


def train(
    X,
    y,
    params: KernelParams,
    weights: WeightVector | None = None,
    origins=None,
    sample_weights=None,
    schema: Schema | None = None,
    preprocess_stats: PreprocessStats | None = None,
    window_len: int = 1,
) -> KelmModel:
    """Solve the regularized kernel system and return the trained model.

    ``origins`` names the original feature of every encoded column (defaults
    to one synthetic feature per column); ``weights`` must cover exactly
    those features and defaults to all ones. ``sample_weights`` scale the
    per-row regularization: D_ii = 1/(c * s_i).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X and y must have matching row counts")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite values")

    if origins is None:
        origins = tuple(f"x{j}" for j in range(X.shape[1]))
    else:
        origins = tuple(origins)
        if len(origins) != X.shape[1]:
            raise ValueError("origins must name every column of X")
    if weights is None:
        weights = WeightVector.ones(dict.fromkeys(origins))
    if set(weights.weights) != set(origins):
        raise ValueError("weights must cover exactly the original features of X")

    n = X.shape[0]
    if sample_weights is None:
        d = np.full(n, 1.0 / params.c)
    else:
        s = np.asarray(sample_weights, dtype=np.float64).ravel()
        if s.shape[0] != n:
            raise ValueError("sample_weights must have one entry per row")
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise ValueError("sample_weights must be positive and finite")
        d = 1.0 / (params.c * s)

    K = kernel_matrix(X, params.gamma, weights.column_scales(origins))
    A = K + np.diag(d)
    beta = _solve_spd(A, y)
    return KelmModel(
        support_matrix=X.copy(),
        beta=beta,
        params=params,
        feature_weights=weights,
        origins=origins,
        schema=schema,
        preprocess_stats=preprocess_stats,
        window_len=window_len,
    )


def predict(model: KelmModel, X) -> np.ndarray:
    return model.predict(X)


def _canonical_json_bytes(payload) -> bytes:
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False,
                      allow_nan=False).encode("utf-8")


def serialize(model: KelmModel) -> bytes:
    """Canonical JSON bytes; fixed key order, shortest round-trip floats."""
    schema_obj = {
        "window_len": model.window_len,
        "origins": list(model.origins),
        "data": None,
    }
    if model.schema is not None:
        schema_obj["data"] = {
            "numeric_features": list(model.schema.numeric_features),
            "categorical_features": list(model.schema.categorical_features),
            "category_levels": {
                k: list(v) for k, v in model.schema.category_levels.items()
            },
            "target": model.schema.target,
        }
    stats_obj = None
    if model.preprocess_stats is not None:
        stats_obj = {
            "numeric": {
                name: {"min": st.vmin, "max": st.vmax, "median": st.median}
                for name, st in model.preprocess_stats.numeric.items()
            },
            "categorical": dict(model.preprocess_stats.categorical_modes),
        }
    payload = {
        "format_version": model.format_version,
        "schema": schema_obj,
        "preprocess_stats": stats_obj,
        "gamma": model.params.gamma,
        "c": model.params.c,
        "feature_weights": {
            "w_min": model.feature_weights.w_min,
            "weights": dict(model.feature_weights.weights),
        },
        "support_matrix": [list(row) for row in model.support_matrix.tolist()],
        "beta": model.beta.tolist(),
    }
    return _canonical_json_bytes(payload)


def deserialize(blob: bytes) -> KelmModel:
    """Inverse of :func:`serialize`; round-trips predictions bit-identically."""
    try:
        payload = json.loads(blob.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise InputError(f"model file is not valid UTF-8: {e}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"malformed model JSON: {e}") from None
    if not isinstance(payload, dict):
        raise InputError("malformed model JSON: top level must be an object")

    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"unsupported model format_version {version!r}; this build reads {FORMAT_VERSION}"
        )
    try:
        schema_obj = payload["schema"]
        stats_obj = payload["preprocess_stats"]
        params = KernelParams(gamma=payload["gamma"], c=payload["c"])
        fw = payload["feature_weights"]
        weights = WeightVector(dict(fw["weights"]), w_min=fw["w_min"])
        support = np.array(payload["support_matrix"], dtype=np.float64)
        beta = np.array(payload["beta"], dtype=np.float64)
        window_len = schema_obj["window_len"]
        origins = tuple(schema_obj["origins"])
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed model JSON: {e!r}") from None

    if support.ndim != 2 or beta.ndim != 1 or beta.shape[0] != support.shape[0]:
        raise InputError("malformed model JSON: support_matrix/beta shapes disagree")

    schema = None
    if schema_obj.get("data") is not None:
        d = schema_obj["data"]
        schema = Schema(
            numeric_features=tuple(d["numeric_features"]),
            categorical_features=tuple(d["categorical_features"]),
            category_levels={k: tuple(v) for k, v in d["category_levels"].items()},
            target=d["target"],
        )
    stats = None
    if stats_obj is not None:
        stats = PreprocessStats(
            numeric={
                name: ColumnStats(vmin=st["min"], vmax=st["max"], median=st["median"])
                for name, st in stats_obj["numeric"].items()
            },
            categorical_modes=dict(stats_obj["categorical"]),
        )
    return KelmModel(
        support_matrix=support,
        beta=beta,
        params=params,
        feature_weights=weights,
        origins=origins,
        schema=schema,
        preprocess_stats=stats,
        window_len=window_len,
        format_version=version,
    )
