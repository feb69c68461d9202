import numpy as np
import pytest

from vwaakelm.data import Dataset, generate_synthetic, prepare_splits


def make_dataset(X, y) -> Dataset:
    """Wrap plain arrays as a Dataset with one origin per column."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    names = [f"x{j}" for j in range(X.shape[1])]
    return Dataset(list(names), X, np.asarray(y, dtype=np.float64), list(names))


@pytest.fixture(scope="session")
def small_splits():
    """240-row synthetic telemetry split once and shared across tests."""
    records = generate_synthetic(240, seed=3, noise_sd=8.0)
    splits, schema, stats = prepare_splits(records, (0.7, 0.15, 0.15), 3)
    return splits, schema, stats
