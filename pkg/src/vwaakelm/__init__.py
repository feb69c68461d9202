"""Feature-weighted kernel extreme learning machine for power prediction.

The public surface is small: train/predict/serialize a kernel model,
search per-feature kernel weights with a population optimizer, and
compute the evaluation metrics used throughout the command-line tools.
"""

from .backends import backend_name, compiled_available
from .data import Dataset, generate_synthetic, parse_records, prepare_splits
from .errors import (
    InputError,
    NumericError,
    SchemaError,
    UndefinedMetricError,
    UnsupportedVersionError,
    VwaaKelmError,
)
from .kelm import (
    DEFAULT_C,
    DEFAULT_GAMMA,
    KelmModel,
    KernelParams,
    WeightVector,
    deserialize,
    predict,
    serialize,
    train,
)
from .metrics import error_histogram, r2, rmse, rpd
from .vwaa import VwaaConfig, VwaaResult, optimize

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_C",
    "DEFAULT_GAMMA",
    "Dataset",
    "InputError",
    "KelmModel",
    "KernelParams",
    "NumericError",
    "SchemaError",
    "UndefinedMetricError",
    "UnsupportedVersionError",
    "VwaaConfig",
    "VwaaKelmError",
    "VwaaResult",
    "WeightVector",
    "backend_name",
    "compiled_available",
    "deserialize",
    "error_histogram",
    "generate_synthetic",
    "optimize",
    "parse_records",
    "predict",
    "prepare_splits",
    "r2",
    "rmse",
    "rpd",
    "serialize",
    "train",
    "__version__",
]
