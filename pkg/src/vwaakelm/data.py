"""Dataset schema, CSV ingestion, preprocessing, splitting and windowing.

The on-disk format is a UTF-8 comma-separated file with a header row. The
six numeric feature columns are required; the three categorical columns and
the target column are optional but, when present, apply to every row:

    cpu_usage, memory_usage, network_traffic, num_executed_instructions,
    execution_time, energy_efficiency, task_type, task_priority,
    task_status, power_consumption

Preprocessing is fit on the training split only: numeric features are
median-imputed and min-max scaled to [0, 1], categoricals are mode-imputed
and one-hot encoded over the levels seen in training (unseen levels at
apply time encode to all zeros).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import SplitMix64, derive_seed
from .errors import InputError, SchemaError

NUMERIC_FEATURES = (
    "cpu_usage",
    "memory_usage",
    "network_traffic",
    "num_executed_instructions",
    "execution_time",
    "energy_efficiency",
)
CATEGORICAL_FEATURES = ("task_type", "task_priority", "task_status")
TARGET_COLUMN = "power_consumption"
CSV_COLUMNS = NUMERIC_FEATURES + CATEGORICAL_FEATURES + (TARGET_COLUMN,)

# Validity ranges. A parsed value outside its range is treated as missing
# (imputed downstream); an invalid target rejects the whole row instead.
_NUMERIC_BOUNDS = {
    "cpu_usage": (0.0, 100.0),
    "memory_usage": (0.0, 100.0),
    "network_traffic": (0.0, math.inf),
    "num_executed_instructions": (0.0, math.inf),
    "execution_time": (0.0, math.inf),
    "energy_efficiency": (0.0, 1.0),
}


@dataclass
class RawRecord:
    """One telemetry row; None marks a missing value."""

    cpu_usage: float | None = None
    memory_usage: float | None = None
    network_traffic: float | None = None
    num_executed_instructions: float | None = None
    execution_time: float | None = None
    energy_efficiency: float | None = None
    task_type: str | None = None
    task_priority: str | None = None
    task_status: str | None = None
    power_consumption: float | None = None

    def numeric(self, name: str) -> float | None:
        return getattr(self, name)


@dataclass
class Schema:
    """Feature layout fitted from training records."""

    numeric_features: tuple[str, ...]
    categorical_features: tuple[str, ...]
    category_levels: dict[str, tuple[str, ...]]
    target: str = TARGET_COLUMN


@dataclass
class ColumnStats:
    vmin: float
    vmax: float
    median: float

    @property
    def is_constant(self) -> bool:
        return self.vmax == self.vmin


@dataclass
class PreprocessStats:
    """Training-split statistics used by :func:`preprocess_apply`."""

    numeric: dict[str, ColumnStats]
    categorical_modes: dict[str, str]


@dataclass
class Dataset:
    """Encoded feature matrix with per-column provenance.

    ``origins[j]`` is the original feature that encoded column j came from;
    one-hot and lagged columns all map back to their parent feature so a
    per-feature weight can be broadcast over them. Targets are NaN for
    scoring-only rows.
    """

    column_names: list[str]
    feature_matrix: np.ndarray
    targets: np.ndarray
    origins: list[str]

    def __post_init__(self):
        if self.feature_matrix.shape[0] != self.targets.shape[0]:
            raise ValueError("feature matrix and targets disagree on row count")
        if self.feature_matrix.shape[1] != len(self.origins):
            raise ValueError("origins must name every encoded column")

    def __len__(self) -> int:
        return self.feature_matrix.shape[0]

    @property
    def original_features(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.origins))


def _parse_cell(text: str, name: str) -> tuple[float | None, bool]:
    """Parse one numeric cell. Returns (value, ok); value None when missing."""
    text = text.strip()
    if not text:
        return None, True
    try:
        v = float(text)
    except ValueError:
        return None, False
    if not math.isfinite(v):
        return None, False
    lo, hi = _NUMERIC_BOUNDS.get(name, (-math.inf, math.inf))
    if v < lo or v > hi:
        return None, False
    return v, True


def parse_records(csv_text: str) -> list[RawRecord]:
    """Parse CSV text into records.

    Missing or unparseable feature cells are marked missing and the row is
    kept; a bad target cell drops the row (a training row without a usable
    target is useless and a scoring file simply omits the target column).
    Unrecognized columns are ignored.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("empty CSV: no header row") from None
    header = [h.strip() for h in header]
    positions = {name: header.index(name) for name in header if name in CSV_COLUMNS}
    missing = [name for name in NUMERIC_FEATURES if name not in positions]
    if missing:
        raise SchemaError(f"missing required columns: {', '.join(missing)}")

    has_target = TARGET_COLUMN in positions
    records: list[RawRecord] = []
    for row in reader:
        if not row:
            continue
        if len(row) < len(header):
            row = row + [""] * (len(header) - len(row))

        if has_target:
            raw = row[positions[TARGET_COLUMN]].strip()
            if not raw:
                continue
            try:
                power = float(raw)
            except ValueError:
                continue
            if not math.isfinite(power) or power <= 0.0:
                continue
        else:
            power = None

        rec = RawRecord(power_consumption=power)
        for name in NUMERIC_FEATURES:
            value, _ok = _parse_cell(row[positions[name]], name)
            setattr(rec, name, value)
        for name in CATEGORICAL_FEATURES:
            if name in positions:
                cell = row[positions[name]].strip()
                setattr(rec, name, cell or None)
        records.append(rec)
    return records


def _format_value(v: float | str | None) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    return repr(float(v))


def records_to_csv(records: list[RawRecord]) -> str:
    """Serialize records; floats use shortest round-trip decimals.

    Optional columns whose values are missing in every record are omitted
    entirely, matching the all-or-nothing column convention.
    """
    columns = list(NUMERIC_FEATURES)
    for name in CATEGORICAL_FEATURES + (TARGET_COLUMN,):
        if any(getattr(r, name) is not None for r in records):
            columns.append(name)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        writer.writerow([_format_value(getattr(rec, name)) for name in columns])
    return out.getvalue()


def drop_targetless(records: list[RawRecord]) -> list[RawRecord]:
    return [r for r in records if r.power_consumption is not None]


def preprocess_fit(records: list[RawRecord]) -> tuple[Schema, PreprocessStats]:
    """Fit schema and normalization statistics from training records.

    Only records with a target contribute. Numeric features keep the
    canonical column order; categoricals follow with first-seen level order
    and earliest-seen mode on frequency ties.
    """
    usable = drop_targetless(records)
    if len(usable) < 2:
        raise InputError(
            "need at least 2 training records with power_consumption present"
        )

    numeric_stats: dict[str, ColumnStats] = {}
    for name in NUMERIC_FEATURES:
        values = [r.numeric(name) for r in usable]
        observed = [v for v in values if v is not None]
        if not observed:
            raise InputError(f"feature {name!r} has no observed values to fit")
        numeric_stats[name] = ColumnStats(
            vmin=min(observed),
            vmax=max(observed),
            median=float(np.median(observed)),
        )

    categorical: list[str] = []
    levels: dict[str, tuple[str, ...]] = {}
    modes: dict[str, str] = {}
    for name in CATEGORICAL_FEATURES:
        seen: dict[str, int] = {}
        for r in usable:
            v = getattr(r, name)
            if v is not None:
                seen[v] = seen.get(v, 0) + 1
        if not seen:
            continue
        categorical.append(name)
        levels[name] = tuple(seen)
        modes[name] = max(seen, key=seen.get)  # ties: earliest-seen wins

    schema = Schema(
        numeric_features=NUMERIC_FEATURES,
        categorical_features=tuple(categorical),
        category_levels=levels,
    )
    return schema, PreprocessStats(numeric=numeric_stats, categorical_modes=modes)


def preprocess_apply(
    records: list[RawRecord], schema: Schema, stats: PreprocessStats
) -> Dataset:
    """Impute, scale and encode records with training statistics.

    Total for any record: missing numerics take the training median, missing
    categoricals the training mode, unseen categorical levels encode to all
    zeros. Values outside the training range scale outside [0, 1] and are
    left as-is.
    """
    column_names: list[str] = []
    origins: list[str] = []
    for name in schema.numeric_features:
        column_names.append(name)
        origins.append(name)
    for name in schema.categorical_features:
        for level in schema.category_levels[name]:
            column_names.append(f"{name}={level}")
            origins.append(name)

    n = len(records)
    X = np.zeros((n, len(column_names)), dtype=np.float64)
    y = np.full(n, np.nan, dtype=np.float64)
    for i, rec in enumerate(records):
        col = 0
        for name in schema.numeric_features:
            st = stats.numeric[name]
            v = rec.numeric(name)
            if v is None:
                v = st.median
            X[i, col] = 0.0 if st.is_constant else (v - st.vmin) / (st.vmax - st.vmin)
            col += 1
        for name in schema.categorical_features:
            v = getattr(rec, name)
            if v is None:
                v = stats.categorical_modes[name]
            for level in schema.category_levels[name]:
                if v == level:
                    X[i, col] = 1.0
                col += 1
        if rec.power_consumption is not None:
            y[i] = rec.power_consumption
    return Dataset(column_names=column_names, feature_matrix=X, targets=y, origins=origins)


def split_dataset(
    records: list[RawRecord],
    ratios: tuple[float, float, float],
    seed: int,
) -> tuple[list[RawRecord], list[RawRecord], list[RawRecord]]:
    """Shuffle records with a seeded SplitMix64 Fisher-Yates and partition.

    Sizes are floor(n*train) and floor(n*val) with the remainder going to
    test. The same seed always yields the identical partition.
    """
    if len(ratios) != 3 or any(r <= 0 for r in ratios):
        raise InputError("split ratios must be three positive numbers")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise InputError(f"split ratios must sum to 1, got {sum(ratios)!r}")

    order = list(range(len(records)))
    SplitMix64(derive_seed(seed, "split")).shuffle(order)
    shuffled = [records[i] for i in order]

    n = len(records)
    # +1e-9 guards against 14.0 landing as 13.999... in float arithmetic
    n_train = int(math.floor(n * ratios[0] + 1e-9))
    n_val = int(math.floor(n * ratios[1] + 1e-9))
    n_test = n - n_train - n_val
    if n_train == 0 or n_val == 0 or n_test <= 0:
        raise InputError(
            f"split of {n} rows at {ratios} leaves an empty subset; provide more rows"
        )
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )


def make_windows(dataset: Dataset, window_len: int) -> Dataset:
    """Concatenate each row with its window_len-1 predecessors.

    Rows are treated as time-ordered. Output row i covers input rows
    i..i+window_len-1 (oldest first) and keeps the newest row's target.
    Lagged columns get a ``@t-k`` suffix but share the parent feature's
    weight group.
    """
    if window_len < 1:
        raise InputError("window_len must be >= 1")
    if window_len == 1:
        return dataset
    n = len(dataset)
    if n < window_len:
        raise InputError(f"window_len {window_len} exceeds the {n} available rows")

    names: list[str] = []
    origins: list[str] = []
    for offset in range(window_len):
        lag = window_len - 1 - offset
        for name, origin in zip(dataset.column_names, dataset.origins):
            names.append(name if lag == 0 else f"{name}@t-{lag}")
            origins.append(origin)

    rows = n - window_len + 1
    blocks = [
        dataset.feature_matrix[offset : offset + rows]
        for offset in range(window_len)
    ]
    X = np.hstack(blocks)
    return Dataset(
        column_names=names,
        feature_matrix=np.ascontiguousarray(X),
        targets=dataset.targets[window_len - 1 :].copy(),
        origins=origins,
    )


@dataclass(frozen=True)
class PowerCoefficients:
    """Coefficients of the synthetic power formula (all in watts)."""

    base: float = 90.0
    cpu: float = 120.0
    mem: float = 60.0
    net: float = 90.0
    eff_slope: float = 1.0
    sin_cpu_net: float = 40.0


def power_value(
    u_cpu: float,
    u_mem: float,
    u_net: float,
    u_eff: float,
    coeffs: PowerCoefficients = PowerCoefficients(),
) -> float:
    """Noiseless synthetic power for unit-scaled utilizations."""
    return (
        coeffs.base
        + coeffs.cpu * u_cpu
        + coeffs.mem * u_mem
        + coeffs.net * u_net * (1.0 - coeffs.eff_slope * u_eff)
        + coeffs.sin_cpu_net * math.sin(2.0 * math.pi * u_cpu) * u_net
    )


def generate_synthetic(
    n: int,
    seed: int,
    noise_sd: float = 8.0,
    coefficients: PowerCoefficients = PowerCoefficients(),
) -> list[RawRecord]:
    """Deterministic synthetic telemetry with a known power ground truth.

    Per record the SplitMix64 substream draws, in this fixed order: u_cpu,
    u_mem, u_eff, network ~ U[100, 1000] MB/s, instructions ~ int U[1000,
    10000], execution time ~ U[10, 100] ms, the three categoricals, then one
    Gaussian noise term (two words). The noiseless power surface stays
    within [50, 400] W; Gaussian noise is added on top and the result is
    floored at 0.001 W to keep targets positive under extreme noise.
    """
    if n < 1:
        raise InputError("need n >= 1 synthetic rows")
    if noise_sd < 0:
        raise InputError("noise_sd must be >= 0")

    rng = SplitMix64(derive_seed(seed, "synthetic"))
    task_types = ("compute", "io", "network")
    priorities = ("low", "mid", "high")
    statuses = ("completed", "failed")

    records = []
    for _ in range(n):
        u_cpu = rng.uniform()
        u_mem = rng.uniform()
        u_eff = rng.uniform()
        network = rng.uniform(100.0, 1000.0)
        instructions = float(rng.randint(1000, 10000))
        exec_time = rng.uniform(10.0, 100.0)
        task_type = task_types[rng.randint(0, 2)]
        priority = priorities[rng.randint(0, 2)]
        status = statuses[rng.randint(0, 1)]
        noise = rng.normal(0.0, noise_sd)

        u_net = (network - 100.0) / 900.0
        power = power_value(u_cpu, u_mem, u_net, u_eff, coefficients) + noise
        records.append(
            RawRecord(
                cpu_usage=100.0 * u_cpu,
                memory_usage=100.0 * u_mem,
                network_traffic=network,
                num_executed_instructions=instructions,
                execution_time=exec_time,
                energy_efficiency=u_eff,
                task_type=task_type,
                task_priority=priority,
                task_status=status,
                power_consumption=max(power, 1e-3),
            )
        )
    return records


def prepare_splits(
    records: list[RawRecord],
    ratios: tuple[float, float, float],
    seed: int,
    window_len: int = 1,
) -> tuple[dict[str, Dataset], Schema, PreprocessStats]:
    """Split, fit on train, encode all three splits, optionally window.

    Records without a target are dropped up front (every split is used for
    fitting or scoring against actuals). Windowing treats each split's row
    order as its time order.
    """
    usable = drop_targetless(records)
    train, val, test = split_dataset(usable, ratios, seed)
    schema, stats = preprocess_fit(train)
    splits = {}
    for name, recs in (("train", train), ("val", val), ("test", test)):
        ds = preprocess_apply(recs, schema, stats)
        splits[name] = make_windows(ds, window_len)
    return splits, schema, stats
