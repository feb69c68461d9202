"""Population search over per-feature weight vectors.

Each candidate is scored by training a KELM on the training split and
measuring validation RMSE, multiplied by a KL penalty that discourages the
normalized weight distribution from collapsing away from uniform:

    fitness = val_rmse * (1 + lambda_kl * KL(w / sum(w) || uniform))

The update is a fitness-weighted mean of the top-k candidates perturbed by
Gaussian noise with geometrically decaying scale, with the best-ever
candidate always carried over unchanged (elitism). The all-ones vector is
seeded into the initial population, so the final best can never be worse
than uniform weighting.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._rng import SplitMix64, derive_seed
from .data import Dataset
from .errors import NumericError
from .kelm import KernelParams, WeightVector, train

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VwaaConfig:
    population: int = 20
    max_iters: int = 100
    sigma0: float = 0.3
    decay: float = 0.95
    top_k: int = 5
    lambda_kl: float = 0.01
    w_min: float = 0.05
    seed: int = 0
    patience: int = 5
    rel_tol: float = 0.001

    def __post_init__(self):
        if self.population < 1:
            raise ValueError("population must be >= 1")
        if not 1 <= self.top_k <= self.population:
            raise ValueError("top_k must lie in [1, population]")
        if not 0.0 < self.w_min < 1.0:
            raise ValueError("w_min must lie in (0, 1)")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if not 0.0 < self.decay < 1.0:
            raise ValueError("decay must lie in (0, 1)")
        if self.sigma0 < 0 or self.max_iters < 0 or self.patience < 1:
            raise ValueError("sigma0 >= 0, max_iters >= 0 and patience >= 1 required")
        if self.lambda_kl < 0:
            raise ValueError("lambda_kl must be >= 0")


@dataclass
class Candidate:
    weight_vector: WeightVector
    fitness: float
    raw_val_rmse: float


@dataclass
class VwaaResult:
    best_weights: WeightVector
    best_fitness: float
    history: list[float]
    stop_reason: str  # "converged" | "max_iters"
    trace: list[tuple[int, float, float, float]] = field(default_factory=list)


def kl_divergence(p, q) -> float:
    """Sum of p_j * ln(p_j / q_j) with the 0 * ln(0/q) = 0 convention."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("p and q must be equal-length vectors")
    if np.any(p < 0) or np.any(q < 0):
        raise ValueError("probability entries must be >= 0")
    if abs(p.sum() - 1.0) > 1e-9 or abs(q.sum() - 1.0) > 1e-9:
        raise ValueError("p and q must each sum to 1")
    support = p > 0
    if np.any(q[support] == 0):
        raise ValueError("KL undefined: p has mass where q is zero")
    return float(np.sum(p[support] * np.log(p[support] / q[support])))


def _kl_penalty(weights: WeightVector) -> float:
    w = weights.as_array()
    p = w / w.sum()
    u = np.full(len(p), 1.0 / len(p))
    return kl_divergence(p, u)


def fitness(
    weights: WeightVector,
    train_split: Dataset,
    val_split: Dataset,
    params: KernelParams,
    lambda_kl: float,
) -> tuple[float, float]:
    """(penalized, raw validation RMSE) for one candidate weight vector.

    A numeric training failure is logged and reported as infinite fitness
    so the candidate is culled from ranking.
    """
    try:
        model = train(
            train_split.feature_matrix,
            train_split.targets,
            params,
            weights=weights,
            origins=train_split.origins,
        )
    except NumericError as e:
        logger.warning("culling candidate: training failed (%s)", e)
        return math.inf, math.inf
    pred = model.predict(val_split.feature_matrix)
    raw = float(np.sqrt(np.mean((val_split.targets - pred) ** 2)))
    penalized = raw * (1.0 + lambda_kl * _kl_penalty(weights))
    return penalized, raw


def weighted_mean(candidates: list[Candidate]) -> WeightVector:
    """Mix candidate vectors with softmax-of-negative-normalized-fitness.

    v_i = exp(-(f_i - f_min) / (f_max - f_min + 1e-12)), normalized to sum
    to 1; equal fitnesses degrade to the plain average.
    """
    if not candidates:
        raise ValueError("weighted_mean of an empty candidate list")
    fits = np.array([c.fitness for c in candidates], dtype=np.float64)
    if not np.all(np.isfinite(fits)):
        raise ValueError("weighted_mean requires finite fitnesses")
    v = np.exp(-(fits - fits.min()) / (fits.max() - fits.min() + 1e-12))
    v /= v.sum()

    first = candidates[0].weight_vector
    features = first.features
    stacked = np.array([c.weight_vector.as_array(features) for c in candidates])
    mixed = v @ stacked
    # guard the [w_min, 1] bounds against summation roundoff
    mixed = np.clip(mixed, first.w_min, 1.0)
    return WeightVector(dict(zip(features, mixed.tolist())), w_min=first.w_min)


@dataclass
class VwaaState:
    population: list[Candidate]
    best: Candidate
    iteration: int


def step(state: VwaaState, config: VwaaConfig, evaluate) -> VwaaState:
    """One generation: rank, mix top-k, perturb, re-evaluate, keep the elite.

    The perturbation scale is sigma0 * decay**t for the step leaving
    iteration t. Every new candidate draws from its own substream keyed by
    (seed, iteration, candidate index), so results do not depend on
    evaluation order.
    """
    ranked = sorted(
        (c for c in state.population if math.isfinite(c.fitness)),
        key=lambda c: c.fitness,
    )
    if not ranked:
        raise NumericError("every candidate in the population has failed")
    mean = weighted_mean(ranked[: config.top_k])
    features = mean.features
    mean_arr = mean.as_array(features)
    sigma = config.sigma0 * config.decay ** state.iteration

    new_iteration = state.iteration + 1
    best = state.best
    population: list[Candidate] = []
    for i in range(config.population - 1):
        rng = SplitMix64(derive_seed(config.seed, "vwaa", new_iteration, i))
        noise = np.array([rng.normal() for _ in features])
        values = np.clip(mean_arr + sigma * noise, config.w_min, 1.0)
        w = WeightVector(dict(zip(features, values.tolist())), w_min=config.w_min)
        penalized, raw = evaluate(w)
        cand = Candidate(w, penalized, raw)
        population.append(cand)
        if cand.fitness < best.fitness:
            best = cand
    population.append(best)  # elite slot
    return VwaaState(population=population, best=best, iteration=new_iteration)


def optimize(
    train_split: Dataset,
    val_split: Dataset,
    params: KernelParams,
    config: VwaaConfig,
) -> VwaaResult:
    """Run the search and return the best-ever candidate.

    The initial population is the all-ones vector plus population-1 vectors
    drawn uniformly per coordinate from [max(w_min, 0.1), 1]. Iteration
    stops once the relative improvement of the best penalized fitness stays
    below rel_tol for patience consecutive iterations, or at max_iters.
    """
    features = train_split.original_features
    if tuple(val_split.original_features) != tuple(features):
        raise ValueError("train and validation splits disagree on features")

    def evaluate(w: WeightVector) -> tuple[float, float]:
        return fitness(w, train_split, val_split, params, config.lambda_kl)

    population: list[Candidate] = []
    lo = max(config.w_min, 0.1)
    for i in range(config.population):
        if i == 0:
            w = WeightVector.ones(features, w_min=config.w_min)
        else:
            rng = SplitMix64(derive_seed(config.seed, "vwaa", 0, i))
            w = WeightVector(
                {name: rng.uniform(lo, 1.0) for name in features},
                w_min=config.w_min,
            )
        penalized, raw = evaluate(w)
        population.append(Candidate(w, penalized, raw))

    best = population[0]
    for cand in population[1:]:
        if cand.fitness < best.fitness:
            best = cand
    if not math.isfinite(best.fitness):
        raise NumericError("no candidate in the initial population evaluated cleanly")

    state = VwaaState(population=population, best=best, iteration=0)
    history = [best.fitness]
    trace = [(0, best.fitness, best.raw_val_rmse, config.sigma0)]
    stop_reason = "max_iters"
    plateau_streak = 0
    for t in range(1, config.max_iters + 1):
        previous = state.best.fitness
        state = step(state, config, evaluate)
        current = state.best.fitness
        history.append(current)
        trace.append((t, current, state.best.raw_val_rmse,
                      config.sigma0 * config.decay**t))
        improvement = (previous - current) / previous if previous > 0 else 0.0
        plateau_streak = plateau_streak + 1 if improvement < config.rel_tol else 0
        if plateau_streak >= config.patience:
            stop_reason = "converged"
            break

    return VwaaResult(
        best_weights=state.best.weight_vector,
        best_fitness=state.best.fitness,
        history=history,
        stop_reason=stop_reason,
        trace=trace,
    )


def trace_csv(result: VwaaResult) -> str:
    """Optimizer trace as CSV text."""
    lines = ["iteration,best_penalized,best_raw_rmse,sigma_t"]
    for it, pen, raw, sigma in result.trace:
        lines.append(f"{it},{pen!r},{raw!r},{sigma!r}")
    return "\n".join(lines) + "\n"
