"""Grid search over (gamma, c) on validation RMSE, plus the sensitivity surface."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .errors import NumericError, UndefinedMetricError
from .kelm import KernelParams, WeightVector, train
from .metrics import r2, rmse

DEFAULT_GAMMA_GRID = (0.01, 0.05, 0.1, 0.15, 0.2, 0.5, 1.0)
DEFAULT_C_GRID = (1.0, 10.0, 50.0, 100.0, 180.0, 500.0, 1000.0)


def _validated_axis(values, label) -> tuple[float, ...]:
    values = tuple(float(v) for v in values)
    if not values:
        raise ValueError(f"{label} grid must be non-empty")
    if any(v <= 0 for v in values):
        raise ValueError(f"{label} grid values must be positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{label} grid values must be strictly increasing")
    return values


@dataclass(frozen=True)
class SearchGrid:
    gamma_values: tuple[float, ...] = DEFAULT_GAMMA_GRID
    c_values: tuple[float, ...] = DEFAULT_C_GRID

    def __post_init__(self):
        object.__setattr__(self, "gamma_values", _validated_axis(self.gamma_values, "gamma"))
        object.__setattr__(self, "c_values", _validated_axis(self.c_values, "c"))


@dataclass
class SurfaceCell:
    gamma: float
    c: float
    rmse_val: float | None
    r2_val: float | None


@dataclass
class GridSearchResult:
    best_gamma: float
    best_c: float
    surface: list[SurfaceCell]


def _scan(train_split, val_split, grid, weights) -> list[SurfaceCell]:
    """Evaluate every grid cell in gamma-major order; failures yield null metrics."""
    cells: list[SurfaceCell] = []
    for gamma in grid.gamma_values:
        for c in grid.c_values:
            try:
                model = train(
                    train_split.feature_matrix,
                    train_split.targets,
                    KernelParams(gamma=gamma, c=c),
                    weights=weights,
                    origins=train_split.origins,
                )
                pred = model.predict(val_split.feature_matrix)
                cell_rmse = rmse(val_split.targets, pred)
                try:
                    cell_r2 = r2(val_split.targets, pred)
                except UndefinedMetricError:
                    cell_r2 = None
            except NumericError:
                cells.append(SurfaceCell(gamma, c, None, None))
                continue
            cells.append(SurfaceCell(gamma, c, cell_rmse, cell_r2))
    return cells


def grid_search(
    train_split: Dataset,
    val_split: Dataset,
    grid: SearchGrid | None = None,
    weights: WeightVector | None = None,
) -> GridSearchResult:
    """Argmin of validation RMSE over the grid with fixed feature weights.

    Ties break toward the smaller gamma, then the smaller c (the scan order
    is gamma-major ascending, so the first strict minimum wins).
    """
    grid = grid or SearchGrid()
    surface = _scan(train_split, val_split, grid, weights)
    best: SurfaceCell | None = None
    for cell in surface:
        if cell.rmse_val is None:
            continue
        if best is None or cell.rmse_val < best.rmse_val:
            best = cell
    if best is None:
        raise NumericError("grid search failed: every cell failed numerically")
    return GridSearchResult(best_gamma=best.gamma, best_c=best.c, surface=surface)


def surface_csv(surface: list[SurfaceCell]) -> str:
    """CSV text with header gamma,c,rmse_val,r2_val; nulls are empty fields."""
    lines = ["gamma,c,rmse_val,r2_val"]
    for cell in surface:
        rm = "" if cell.rmse_val is None else repr(cell.rmse_val)
        r = "" if cell.r2_val is None else repr(cell.r2_val)
        lines.append(f"{cell.gamma!r},{cell.c!r},{rm},{r}")
    return "\n".join(lines) + "\n"


def sensitivity_surface(
    train_split: Dataset,
    val_split: Dataset,
    grid: SearchGrid | None = None,
    weights: WeightVector | None = None,
) -> str:
    """Full (gamma, c) response surface as CSV, one row per cell."""
    grid = grid or SearchGrid()
    return surface_csv(_scan(train_split, val_split, grid, weights))
