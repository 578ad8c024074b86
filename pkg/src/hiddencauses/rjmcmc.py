"""Reversible-jump sampler over (K, Z, Y) with a finite prior over K.

The model keeps an explicit dimension K >= 1 with the finite beta-
Bernoulli prior over Z's columns and a prior P(K) over the dimension.
One sweep visits rows in ascending order; each row gets one birth/death
proposal on a uniformly chosen column, a Gibbs pass over its Z entries,
and a full resample of Y.

Birth appends an all-zero column of Z plus a fresh Bernoulli(p) row of Y
and is accepted with probability

    min[1, K P(Z'|K+1) P(K+1) / (K+ P(Z|K) P(K))],

death of an unlinked column k mirrors it with

    min[1, K+ P(Z''|K-1) P(K-1) / ((K-1) P(Z|K) P(K))],

where K+ counts linked columns.  These ratios follow from detailed
balance on column multisets: the prior over Z is column-exchangeable and
the likelihood depends on (Z, Y) only through Z Y, so the proposal
multiplicity of duplicate (column, activation-row) pairs cancels against
the ordering count of the multiset, leaving no duplicate-row factor.

A classical variant instead scales the birth ratio by delta / (K+1) and
the death ratio by K / delta, with delta counting rows of Y identical to
the proposed (or deleted) activation row, that row included.  The two
variants have reciprocal log-ratios either way, but only the default
holds the joint posterior invariant (the variant's chain visibly tilts
toward small K on enumerable instances).  Pass duplicate_row_factor=True
to get the variant.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy

from .gibbs import _sample_z_given_theta, resample_all_y
from .model import ModelParams, SamplerState, as_binary_matrix, log_prior_Z_finite_from_sums


# ---------------------------------------------------------------------------
# priors over the dimension K
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftedPoissonK:
    """K - 1 ~ Poisson(mean), supported on K >= 1."""

    mean: float

    def log_pmf(self, k: int) -> float:
        if k < 1:
            return -math.inf
        j = k - 1
        return float(xlogy(j, self.mean)) - self.mean - float(gammaln(j + 1.0))


@dataclass(frozen=True)
class GeometricK:
    """P(K = k) = q (1-q)^(k-1), supported on K >= 1."""

    q: float

    def log_pmf(self, k: int) -> float:
        if k < 1:
            return -math.inf
        return math.log(self.q) + (k - 1) * math.log1p(-self.q)


@dataclass(frozen=True)
class UniformK:
    """Uniform over 1..k_max; birth proposals beyond the cap get zero mass."""

    k_max: int

    def log_pmf(self, k: int) -> float:
        if 1 <= k <= self.k_max:
            return -math.log(self.k_max)
        return -math.inf


def make_k_prior(name: str, *, mean: float = 1.0, q: float = 0.5, k_max: int = 50):
    if name == "poisson":
        return ShiftedPoissonK(mean=mean)
    if name == "geometric":
        return GeometricK(q=q)
    if name == "uniform":
        return UniformK(k_max=k_max)
    raise ValueError(f"unknown K prior {name!r}")


# ---------------------------------------------------------------------------
# finite-dimensional state
# ---------------------------------------------------------------------------


@dataclass
class FiniteState(SamplerState):
    """Sampler state carrying an explicit dimension K = Z.shape[1] >= 1
    and a prior over K.  Zero columns of Z are kept, not compacted."""

    k_prior: object = field(default_factory=lambda: GeometricK(q=0.5))

    def __post_init__(self):
        super().__post_init__()
        if self.Z.shape[1] < 1:
            raise ValueError("finite state needs K >= 1")

    @classmethod
    def from_matrices(cls, Z, Y, params: ModelParams, k_prior=None) -> "FiniteState":
        Z = as_binary_matrix(Z, "Z")
        Y = as_binary_matrix(Y, "Y")
        if Z.shape[1] != Y.shape[0]:
            raise ValueError(f"Z has {Z.shape[1]} columns, Y has {Y.shape[0]} rows")
        kwargs = {} if k_prior is None else {"k_prior": k_prior}
        return cls(Z=Z, Y=Y, params=params, **kwargs)


def _log_prior_z(state: FiniteState, column_sums, k: int) -> float:
    return log_prior_Z_finite_from_sums(column_sums, state.n_rows, k, state.params.alpha)


def _matching_rows(Y: np.ndarray, row: np.ndarray) -> int:
    if Y.shape[0] == 0:
        return 0
    return int((Y == row[None, :]).all(axis=1).sum())


def _accept(log_ratio: float, rng: np.random.Generator) -> tuple[float, bool]:
    prob = 1.0 if log_ratio >= 0 else math.exp(log_ratio)
    return prob, bool(rng.random() < prob)


# ---------------------------------------------------------------------------
# dimension moves
# ---------------------------------------------------------------------------


def birth_acceptance(
    state: FiniteState,
    proposed_y_row,
    rng: np.random.Generator,
    duplicate_row_factor: bool = False,
) -> tuple[float, bool]:
    """Propose growing K by one: an all-zero Z column plus the given Y row.

    Applies the move on acceptance and returns (acceptance prob, accepted).
    duplicate_row_factor=True multiplies the ratio by delta / (K+1) with
    delta the number of identical activation rows (see module docstring).
    """
    proposed = np.asarray(proposed_y_row, dtype=np.int8)
    if proposed.shape != (state.n_trials,):
        raise ValueError("proposed activation row has the wrong length")
    k = state.k
    kplus = state.kplus
    if kplus == 0:
        raise ValueError("birth requires the chosen column to be linked")
    sums_new = np.concatenate([state.column_sums, [0]])
    log_ratio = (
        _log_prior_z(state, sums_new, k + 1)
        + state.k_prior.log_pmf(k + 1)
        - math.log(kplus)
        + math.log(k)
        - _log_prior_z(state, state.column_sums, k)
        - state.k_prior.log_pmf(k)
    )
    if duplicate_row_factor:
        delta = _matching_rows(state.Y, proposed) + 1  # the new row matches itself
        log_ratio += math.log(delta) - math.log(k + 1)
    prob, accepted = _accept(log_ratio, rng)
    if accepted:
        n = state.n_rows
        state.Z = np.concatenate([state.Z, np.zeros((n, 1), dtype=np.int8)], axis=1)
        state.column_sums = sums_new
        state.Y = np.concatenate([state.Y, proposed[None, :]], axis=0)
        # counts unchanged: the new column is unlinked
    return prob, accepted


def death_acceptance(
    state: FiniteState, k: int, rng: np.random.Generator, duplicate_row_factor: bool = False
) -> tuple[float, bool]:
    """Propose deleting unlinked column k (and its activation row).

    Auto-rejects at K = 1 and when no linked columns remain.  Applies the
    move on acceptance and returns (acceptance prob, accepted).
    duplicate_row_factor=True multiplies the ratio by K / delta with
    delta the number of identical activation rows (see module docstring).
    """
    if state.column_sums[k] != 0:
        raise ValueError("death requires an unlinked column")
    kk = state.k
    if kk == 1:
        return 0.0, False
    kplus = state.kplus
    if kplus == 0:
        return 0.0, False
    sums_new = np.delete(state.column_sums, k)
    log_ratio = (
        math.log(kplus)
        - math.log(kk - 1)
        + _log_prior_z(state, sums_new, kk - 1)
        + state.k_prior.log_pmf(kk - 1)
        - _log_prior_z(state, state.column_sums, kk)
        - state.k_prior.log_pmf(kk)
    )
    if duplicate_row_factor:
        delta = _matching_rows(state.Y, state.Y[k])  # includes row k itself
        log_ratio += math.log(kk) - math.log(delta)
    prob, accepted = _accept(log_ratio, rng)
    if accepted:
        state.Z = np.ascontiguousarray(np.delete(state.Z, k, axis=1))
        state.Y = np.ascontiguousarray(np.delete(state.Y, k, axis=0))
        state.column_sums = sums_new
        # counts unchanged: the deleted column was unlinked
    return prob, accepted


# ---------------------------------------------------------------------------
# within-dimension Gibbs
# ---------------------------------------------------------------------------


def finite_theta_bar(
    m_minus: int, n_rows: int, k: int, alpha: float, predictive: bool = True
) -> float:
    """Prior weight on z = 1 given the rest of the column.

    The integrated beta-Bernoulli predictive is (m_minus + alpha/K) over
    (N + alpha/K).  predictive=False divides by N instead; that variant
    can exceed 1 when alpha/K >= 1 and is clamped to [0, 1].
    """
    ak = alpha / k
    if predictive:
        return (m_minus + ak) / (n_rows + ak)
    return min(1.0, (m_minus + ak) / n_rows)


def finite_conditional_z(
    state: FiniteState, i: int, k: int, X, rng: np.random.Generator, predictive: bool = True
) -> int:
    """Resample z[i, k] under the finite prior (valid for m_minus = 0)."""
    m_minus = int(state.column_sums[k]) - int(state.Z[i, k])
    theta_bar = finite_theta_bar(
        m_minus, state.n_rows, state.k, state.params.alpha, predictive
    )
    return _sample_z_given_theta(state, i, k, X, rng, theta_bar)


def finite_gibbs_sweep(
    state: FiniteState, X, rng: np.random.Generator, predictive: bool = True
) -> FiniteState:
    """One fixed-dimension sweep: every z entry, then every activation row."""
    for i in range(state.n_rows):
        for k in range(state.k):
            finite_conditional_z(state, i, k, X, rng, predictive)
    resample_all_y(state, X, rng)
    return state


def rjmcmc_sweep(
    state: FiniteState,
    X,
    rng: np.random.Generator,
    predictive: bool = True,
    duplicate_row_factor: bool = False,
) -> FiniteState:
    """One full sweep.  Per row: one dimension move on a uniformly chosen
    column (birth if it is linked, death if not), a Gibbs pass over the
    row's Z entries, and a resample of all of Y."""
    params = state.params
    for i in range(state.n_rows):
        k_pick = int(rng.integers(state.k))
        if state.column_sums[k_pick] > 0:
            proposed = (rng.random(state.n_trials) < params.p).astype(np.int8)
            birth_acceptance(state, proposed, rng, duplicate_row_factor)
        else:
            death_acceptance(state, k_pick, rng, duplicate_row_factor)
        for k in range(state.k):
            finite_conditional_z(state, i, k, X, rng, predictive)
        resample_all_y(state, X, rng)
    return state
