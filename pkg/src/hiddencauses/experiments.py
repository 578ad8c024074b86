"""Batch experiment protocols over synthetic data.

Two studies, each run over freshly sampled datasets per condition:

dimension recovery   vary the true number of causes (graphs drawn from
                     the unbounded prior conditioned on K+), fit with
                     both samplers and both initializations, and compare
                     the posterior mean dimension to the truth.

structure recovery   fix one of the canonical graphs, fit, and track
                     in-degree and pairwise structure errors of the
                     running posterior mean of Z Z^T at checkpoints.

Datasets are derived only from (master seed, condition, dataset index),
never from sampler or init, so every sampler/init pair sees identical
data within a condition.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .harness import (
    Dataset,
    canonical_structure,
    generate_dataset,
    in_degree_error,
    rejection_sample_Z,
    structure_error,
)
from .model import ModelParams
from .runner import run_chain

DEFAULT_PARAMS = ModelParams(epsilon=0.01, lam=0.9, p=0.1, alpha=3.0)
DEFAULT_CHECKPOINTS = (1, 2, 5, 10, 25, 50, 100, 250, 500)

_DATASET_TAG = 0xD5
_CHAIN_TAG = 0xC4


def _dataset_rng(master_seed: int, condition: int, index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((master_seed, condition, index, _DATASET_TAG))
    )


def _chain_rng(master_seed: int, condition: int, index: int, sampler: str, init: str):
    codes = {"gibbs": 0, "rjmcmc": 1, "empty": 0, "random10": 1}
    return np.random.default_rng(
        np.random.SeedSequence(
            (master_seed, condition, index, _CHAIN_TAG, codes[sampler], codes[init])
        )
    )


# ---------------------------------------------------------------------------
# dimension recovery
# ---------------------------------------------------------------------------


@dataclass
class DimensionRun:
    k_true: int
    dataset_index: int
    sampler: str
    init: str
    mean_dimension: float  # E[K+] for gibbs, E[K] for rjmcmc
    mean_kplus: float
    error: str | None = None


def make_dimension_dataset(
    master_seed: int,
    k_true: int,
    index: int,
    n_rows: int,
    n_trials: int,
    params: ModelParams,
    max_tries: int = 100_000,
) -> Dataset:
    rng = _dataset_rng(master_seed, k_true, index)
    Z = rejection_sample_Z(n_rows, k_true, params.alpha, rng, max_tries=max_tries)
    return generate_dataset(Z, n_trials, params, rng)


def _dimension_worker(spec: dict) -> DimensionRun:
    params = ModelParams(**spec["params"])
    try:
        data = make_dimension_dataset(
            spec["seed"], spec["k_true"], spec["index"], spec["n_rows"],
            spec["n_trials"], params, spec["max_tries"],
        )
        rng = _chain_rng(spec["seed"], spec["k_true"], spec["index"], spec["sampler"], spec["init"])
        result = run_chain(
            data.X,
            sampler=spec["sampler"],
            iterations=spec["iterations"],
            params=params,
            rng=rng,
            init=spec["init"],
        )
        mean_dim = (
            result.summary.mean_kplus if spec["sampler"] == "gibbs" else result.summary.mean_k
        )
        return DimensionRun(
            k_true=spec["k_true"],
            dataset_index=spec["index"],
            sampler=spec["sampler"],
            init=spec["init"],
            mean_dimension=mean_dim,
            mean_kplus=result.summary.mean_kplus,
        )
    except Exception as exc:  # reported per run, batch continues
        return DimensionRun(
            k_true=spec["k_true"],
            dataset_index=spec["index"],
            sampler=spec["sampler"],
            init=spec["init"],
            mean_dimension=float("nan"),
            mean_kplus=float("nan"),
            error=f"{type(exc).__name__}: {exc}",
        )


def dimension_recovery_experiment(
    *,
    master_seed: int = 0,
    k_values=(1, 2, 3, 4),
    samplers=("gibbs", "rjmcmc"),
    inits=("empty", "random10"),
    datasets_per_condition: int = 10,
    n_rows: int = 6,
    n_trials: int = 500,
    iterations: int = 500,
    params: ModelParams = DEFAULT_PARAMS,
    max_tries: int = 100_000,
    jobs: int = 1,
) -> list[DimensionRun]:
    specs = [
        {
            "seed": master_seed,
            "k_true": k_true,
            "index": idx,
            "sampler": sampler,
            "init": init,
            "n_rows": n_rows,
            "n_trials": n_trials,
            "iterations": iterations,
            "params": {
                "epsilon": params.epsilon,
                "lam": params.lam,
                "p": params.p,
                "alpha": params.alpha,
            },
            "max_tries": max_tries,
        }
        for k_true in k_values
        for idx in range(datasets_per_condition)
        for sampler in samplers
        for init in inits
    ]
    return _run_specs(_dimension_worker, specs, jobs)


# ---------------------------------------------------------------------------
# structure recovery
# ---------------------------------------------------------------------------


@dataclass
class StructureRun:
    structure: str
    dataset_index: int
    sampler: str
    init: str
    checkpoints: list[int]
    in_degree_errors: list[float]
    structure_errors: list[float]
    error: str | None = None


_STRUCTURE_CONDITION = {"degree1": 101, "disconnected": 102, "undercomplete": 103, "overcomplete": 104}


def make_structure_dataset(
    master_seed: int, structure: str, index: int, n_trials: int, params: ModelParams
) -> Dataset:
    rng = _dataset_rng(master_seed, _STRUCTURE_CONDITION[structure], index)
    return generate_dataset(canonical_structure(structure), n_trials, params, rng)


def _structure_worker(spec: dict) -> StructureRun:
    params = ModelParams(**spec["params"])
    checkpoints = [c for c in spec["checkpoints"] if c <= spec["iterations"]]
    try:
        data = make_structure_dataset(
            spec["seed"], spec["structure"], spec["index"], spec["n_trials"], params
        )
        rng = _chain_rng(
            spec["seed"],
            _STRUCTURE_CONDITION[spec["structure"]],
            spec["index"],
            spec["sampler"],
            spec["init"],
        )
        result = run_chain(
            data.X,
            sampler=spec["sampler"],
            iterations=spec["iterations"],
            params=params,
            rng=rng,
            init=spec["init"],
            snapshot_iterations=checkpoints,
        )
        Z_true = data.truth.Z
        ind = [in_degree_error(result.snapshots[c], Z_true) for c in checkpoints]
        struct = [structure_error(result.snapshots[c], Z_true) for c in checkpoints]
        return StructureRun(
            structure=spec["structure"],
            dataset_index=spec["index"],
            sampler=spec["sampler"],
            init=spec["init"],
            checkpoints=checkpoints,
            in_degree_errors=ind,
            structure_errors=struct,
        )
    except Exception as exc:
        return StructureRun(
            structure=spec["structure"],
            dataset_index=spec["index"],
            sampler=spec["sampler"],
            init=spec["init"],
            checkpoints=checkpoints,
            in_degree_errors=[],
            structure_errors=[],
            error=f"{type(exc).__name__}: {exc}",
        )


def structure_recovery_experiment(
    *,
    master_seed: int = 0,
    structures=("degree1", "disconnected", "undercomplete", "overcomplete"),
    samplers=("gibbs", "rjmcmc"),
    inits=("empty",),
    datasets_per_condition: int = 10,
    n_trials: int = 150,
    iterations: int = 500,
    checkpoints=DEFAULT_CHECKPOINTS,
    params: ModelParams = DEFAULT_PARAMS,
    jobs: int = 1,
) -> list[StructureRun]:
    specs = [
        {
            "seed": master_seed,
            "structure": structure,
            "index": idx,
            "sampler": sampler,
            "init": init,
            "n_trials": n_trials,
            "iterations": iterations,
            "checkpoints": list(checkpoints),
            "params": {
                "epsilon": params.epsilon,
                "lam": params.lam,
                "p": params.p,
                "alpha": params.alpha,
            },
        }
        for structure in structures
        for idx in range(datasets_per_condition)
        for sampler in samplers
        for init in inits
    ]
    return _run_specs(_structure_worker, specs, jobs)


def _run_specs(worker, specs: list[dict], jobs: int) -> list:
    if jobs <= 1 or len(specs) <= 1:
        return [worker(spec) for spec in specs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, specs))


def aggregate(values) -> tuple[float, float]:
    """Mean and sample standard deviation (ddof 1; 0.0 for a single value)."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size == 0:
        return float("nan"), float("nan")
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), sd
