"""Chain orchestration: initialization, sweep loop, hyperparameter
schedule, trace records, and posterior summaries."""

import time
from dataclasses import dataclass, field

import numpy as np

from .gibbs import gibbs_sweep
from .harness import PosteriorSummary, SummaryAccumulator
from .hypers import mh_step_rate, sample_alpha, sample_p
from .ibp import harmonic_number
from .model import ModelParams, SamplerState, as_binary_matrix, log_joint
from .rjmcmc import FiniteState, ShiftedPoissonK, rjmcmc_sweep

SAMPLERS = ("gibbs", "rjmcmc")
INITS = ("empty", "random10")
RANDOM_INIT_K = 10


@dataclass
class TraceRecord:
    """One sampler iteration: dimension stats, parameters, log-joint.

    Iteration 0 records the initial state.  k equals kplus for the
    unbounded sampler; wall_ms is populated only when timing is on.
    """

    iteration: int
    kplus: int
    k: int
    epsilon: float
    lam: float
    p: float
    alpha: float
    log_joint: float
    wall_ms: float | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        rec = {
            "iteration": self.iteration,
            "kplus": self.kplus,
            "k": self.k,
            "epsilon": self.epsilon,
            "lambda": self.lam,
            "p": self.p,
            "alpha": self.alpha,
            "log_joint": self.log_joint,
        }
        if include_timing and self.wall_ms is not None:
            rec["wall_ms"] = self.wall_ms
        return rec


@dataclass
class RunResult:
    trace: list[TraceRecord]
    summary: PosteriorSummary
    snapshots: dict[int, PosteriorSummary]
    state: SamplerState
    mh_acceptance: dict[str, float] = field(default_factory=dict)
    elapsed_ms: float = 0.0


def initial_state(
    X,
    sampler: str,
    init: str,
    params: ModelParams,
    rng: np.random.Generator,
    k_prior=None,
) -> SamplerState:
    """Build the starting state.

    empty: no structure. The unbounded sampler starts with zero columns;
    the finite sampler needs K >= 1 and starts with one unlinked column
    and a zero activation row.

    random10: K = K+ = 10 with iid Bernoulli(0.5) entries in Z and Y;
    any all-zero Z column gets a single 1 at a random row so every
    column is linked.
    """
    X = np.asarray(X)
    n, t = X.shape
    if sampler not in SAMPLERS:
        raise ValueError(f"sampler must be one of {SAMPLERS}, got {sampler!r}")
    if init not in INITS:
        raise ValueError(f"init must be one of {INITS}, got {init!r}")
    if init == "empty":
        if sampler == "gibbs":
            return SamplerState(
                Z=np.zeros((n, 0), dtype=np.int8),
                Y=np.zeros((0, t), dtype=np.int8),
                params=params,
            )
        Z = np.zeros((n, 1), dtype=np.int8)
        Y = np.zeros((1, t), dtype=np.int8)
    else:
        k0 = RANDOM_INIT_K
        Z = (rng.random((n, k0)) < 0.5).astype(np.int8)
        Y = (rng.random((k0, t)) < 0.5).astype(np.int8)
        for col in np.flatnonzero(Z.sum(axis=0) == 0):
            Z[int(rng.integers(n)), col] = 1
    if sampler == "gibbs":
        return SamplerState(Z=Z, Y=Y, params=params)
    kwargs = {} if k_prior is None else {"k_prior": k_prior}
    return FiniteState(Z=Z, Y=Y, params=params, **kwargs)


def default_k_prior(alpha: float, n_rows: int) -> ShiftedPoissonK:
    """Shifted Poisson centered at the unbounded model's mean dimension."""
    return ShiftedPoissonK(mean=alpha * harmonic_number(n_rows))


def _trace_record(iteration, state, X, sampler, wall_ms=None) -> TraceRecord:
    prior = "ibp" if sampler == "gibbs" else "finite"
    lj = log_joint(X, state.Z, state.Y, state.params, prior=prior)
    return TraceRecord(
        iteration=iteration,
        kplus=state.kplus,
        k=state.k,
        epsilon=state.params.epsilon,
        lam=state.params.lam,
        p=state.params.p,
        alpha=state.params.alpha,
        log_joint=lj,
        wall_ms=wall_ms,
    )


def run_chain(
    X,
    *,
    sampler: str = "gibbs",
    iterations: int = 500,
    params: ModelParams,
    seed: int | None = None,
    rng: np.random.Generator | None = None,
    init: str = "empty",
    infer_hypers: bool = False,
    mh_step: float = 0.05,
    k_prior=None,
    predictive: bool = True,
    duplicate_row_factor: bool = False,
    burn_in: int = 0,
    snapshot_iterations=(),
    timing: bool = False,
) -> RunResult:
    """Run one chain and accumulate posterior summaries.

    Iterations 1..iterations sweep the sampler; hyperparameters (when
    inferred) update once per sweep after the Z/Y pass, in the order
    lam, epsilon, p, alpha.  alpha's conjugate update belongs to the
    unbounded model and is skipped under the finite sampler.  States from
    iterations > burn_in enter the summary; with none eligible, the
    summary falls back to the final state.
    """
    X = as_binary_matrix(X, "X")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    if rng is None:
        rng = np.random.default_rng(seed)
    if sampler == "rjmcmc" and k_prior is None:
        k_prior = default_k_prior(params.alpha, X.shape[0])
    state = initial_state(X, sampler, init, params, rng, k_prior=k_prior)
    acc = SummaryAccumulator(X.shape[0])
    snapshots: dict[int, PosteriorSummary] = {}
    snapshot_at = set(int(s) for s in snapshot_iterations)
    mh_hits = {"lam": 0, "epsilon": 0}
    start = time.perf_counter()
    trace = [_trace_record(0, state, X, sampler)]
    for it in range(1, iterations + 1):
        tick = time.perf_counter()
        if sampler == "gibbs":
            gibbs_sweep(state, X, rng)
        else:
            rjmcmc_sweep(
                state, X, rng, predictive=predictive, duplicate_row_factor=duplicate_row_factor
            )
        if infer_hypers:
            _, acc_lam = mh_step_rate("lam", state, X, rng, mh_step)
            _, acc_eps = mh_step_rate("epsilon", state, X, rng, mh_step)
            mh_hits["lam"] += acc_lam
            mh_hits["epsilon"] += acc_eps
            new_p = sample_p(state.Y, rng)
            state.params = state.params.replace(p=new_p)
            if sampler == "gibbs":
                new_alpha = sample_alpha(state.kplus, state.n_rows, rng)
                state.params = state.params.replace(alpha=new_alpha)
        if it > burn_in:
            acc.add(state)
        wall = (time.perf_counter() - tick) * 1e3 if timing else None
        trace.append(_trace_record(it, state, X, sampler, wall_ms=wall))
        if it in snapshot_at and acc.count:
            snapshots[it] = acc.summary()
    if acc.count == 0:
        acc.add(state)
    elapsed = (time.perf_counter() - start) * 1e3
    rates = (
        {name: mh_hits[name] / iterations for name in mh_hits}
        if infer_hypers and iterations
        else {}
    )
    return RunResult(
        trace=trace,
        summary=acc.summary(),
        snapshots=snapshots,
        state=state,
        mh_acceptance=rates,
        elapsed_ms=elapsed,
    )
