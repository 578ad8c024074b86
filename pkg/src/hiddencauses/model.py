"""Generative model for binary observations driven by unobserved binary causes.

Matrices (dense 0/1 arrays, row-major):

    X   N x T   observations: N variables measured over T trials
    Z   N x K   bipartite graph: Z[i, k] = 1 links cause k to variable i
    Y   K x T   activations: Y[k, t] = 1 if cause k is active on trial t

An observation turns on through a noisy-OR: every active cause linked to
variable i trips it independently with probability ``lam``, and a leak
trips it with probability ``epsilon``, so

    P(X[i, t] = 1 | Z, Y) = 1 - (1 - lam)^(Z[i] . Y[:, t]) * (1 - epsilon).

Activations are iid Bernoulli(p).  Two priors over Z are supported: a
finite K-column beta-Bernoulli prior with per-column weight alpha / K,
and its K -> infinity limit (see :mod:`hiddencauses.ibp`).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, xlogy


class DegenerateModelError(RuntimeError):
    """Every candidate in a conditional draw carries zero posterior mass.

    Raised when a Gibbs update finds all its options at log-probability
    -inf, which only happens for degenerate parameter settings (for
    example epsilon = 0 with an observation no cause can explain).
    """


@dataclass(frozen=True)
class ModelParams:
    """Model hyperparameters.

    epsilon : baseline (leak) probability that an observation is on, in [0, 1)
    lam     : transmission probability of an active linked cause, in [0, 1]
    p       : prior activation probability of a cause per trial, in [0, 1]
    alpha   : expected-structure intensity of the prior over Z, > 0
    """

    epsilon: float
    lam: float
    p: float
    alpha: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def replace(self, **changes) -> "ModelParams":
        import dataclasses

        return dataclasses.replace(self, **changes)


def as_binary_matrix(values, name: str = "matrix") -> np.ndarray:
    """Validate and convert to a 2-D int8 array with entries in {0, 1}."""
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} entries must be 0 or 1")
    return arr.astype(np.int8)


def noisy_or_prob(active_count: int, params: ModelParams) -> float:
    """P(x = 1 | c active linked causes) = 1 - (1 - lam)^c (1 - epsilon).

    Monotone nondecreasing in ``active_count`` and bounded to [epsilon, 1].
    """
    if active_count < 0:
        raise ValueError("active_count must be nonnegative")
    return 1.0 - (1.0 - params.lam) ** active_count * (1.0 - params.epsilon)


def log_pmf_noisy_or(x, counts, lam: float, epsilon: float) -> np.ndarray:
    """Elementwise log P(x | counts) under the noisy-OR observation model.

    ``x`` and ``counts`` broadcast together.  Returns -inf (never NaN) for
    zero-probability entries at parameter boundaries.
    """
    x = np.asarray(x)
    counts = np.asarray(counts)
    with np.errstate(divide="ignore"):
        # log P(x=0 | c) = c log(1 - lam) + log(1 - epsilon)
        log_off = xlogy(counts, 1.0 - lam) + np.log1p(-epsilon)
        # log P(x=1 | c) = log(1 - exp(log_off)), computed stably
        log_on = np.log(-np.expm1(log_off))
    return np.where(x == 1, log_on, log_off)


def log_likelihood_from_counts(X, counts, lam: float, epsilon: float) -> float:
    """Total log-likelihood given the cause-count matrix counts = Z @ Y."""
    return float(log_pmf_noisy_or(X, counts, lam, epsilon).sum())


def log_likelihood(X, Z, Y, params: ModelParams) -> float:
    """log P(X | Z, Y) summed over all N x T entries.

    Raises ValueError on inconsistent shapes.  Empty products (T = 0 or
    N = 0) give 0.0.
    """
    X = np.asarray(X)
    Z = np.asarray(Z)
    Y = np.asarray(Y)
    n, t = X.shape
    if Z.shape[0] != n:
        raise ValueError(f"Z has {Z.shape[0]} rows, X has {n}")
    if Y.shape[1] != t:
        raise ValueError(f"Y has {Y.shape[1]} trials, X has {t}")
    if Z.shape[1] != Y.shape[0]:
        raise ValueError(f"Z has {Z.shape[1]} columns, Y has {Y.shape[0]} rows")
    counts = Z.astype(np.int32) @ Y.astype(np.int32)
    return log_likelihood_from_counts(X, counts, params.lam, params.epsilon)


def log_prior_Y(Y, p: float) -> float:
    """log P(Y | p) for iid Bernoulli(p) entries; 0.0 for an empty Y."""
    Y = np.asarray(Y)
    s = float(Y.sum())
    total = float(Y.size)
    # xlogy(0, 0) = 0, so p in {0, 1} yields -inf only when Y disagrees
    return float(xlogy(s, p) + xlogy(total - s, 1.0 - p))


def log_prior_Z_finite_from_sums(column_sums, n_rows: int, k: int, alpha: float) -> float:
    """Finite-model column-exchangeable prior evaluated from column sums.

    Each of the k columns contributes

        (alpha/k) Gamma(m + alpha/k) Gamma(n - m + 1) / Gamma(n + 1 + alpha/k)

    where m is the column sum (the per-column Bernoulli rate has been
    integrated out against Beta(alpha/k, 1)).
    """
    if n_rows < 1:
        raise ValueError("need at least one row")
    if k == 0:
        return 0.0
    m = np.asarray(column_sums, dtype=np.float64)
    if m.shape != (k,):
        raise ValueError(f"expected {k} column sums, got shape {m.shape}")
    ak = alpha / k
    per_col = (
        math.log(ak)
        + gammaln(m + ak)
        + gammaln(n_rows - m + 1.0)
        - gammaln(n_rows + 1.0 + ak)
    )
    return float(per_col.sum())


def log_prior_Z_finite(Z, k: int, alpha: float) -> float:
    """log P(Z | K = k, alpha) under the finite beta-Bernoulli prior.

    Z must have exactly k columns (all-zero columns included); alpha > 0.
    """
    Z = as_binary_matrix(Z, "Z")
    if Z.shape[1] != k:
        raise ValueError(f"Z has {Z.shape[1]} columns, expected k = {k}")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return log_prior_Z_finite_from_sums(Z.sum(axis=0), Z.shape[0], k, alpha)


def log_joint(X, Z, Y, params: ModelParams, prior: str = "ibp", k: int | None = None) -> float:
    """log P(X, Z, Y) under the chosen prior over Z.

    prior="ibp" uses the unbounded-cause prior (Z must have no all-zero
    columns); prior="finite" uses the k-column prior with k defaulting to
    Z's column count.
    """
    from .ibp import log_prior_Z_ibp

    ll = log_likelihood(X, Z, Y, params)
    lp_y = log_prior_Y(Y, params.p)
    if prior == "ibp":
        lp_z = log_prior_Z_ibp(Z, params.alpha)
    elif prior == "finite":
        kk = np.asarray(Z).shape[1] if k is None else k
        lp_z = log_prior_Z_finite(Z, kk, params.alpha)
    else:
        raise ValueError(f"unknown prior {prior!r}")
    return ll + lp_y + lp_z


@dataclass
class SamplerState:
    """Mutable sampler state: the pair (Z, Y), parameters, and caches.

    ``column_sums`` holds Z's column sums and ``counts`` holds Z @ Y;
    both are maintained incrementally by the samplers and must never be
    mutated elsewhere.  ``check_consistency`` recomputes them for tests.
    """

    Z: np.ndarray
    Y: np.ndarray
    params: ModelParams
    column_sums: np.ndarray = field(repr=False, default=None)
    counts: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.column_sums is None:
            self.column_sums = self.Z.sum(axis=0, dtype=np.int64)
        if self.counts is None:
            self.counts = self.Z.astype(np.int32) @ self.Y.astype(np.int32)

    @classmethod
    def from_matrices(cls, Z, Y, params: ModelParams) -> "SamplerState":
        Z = as_binary_matrix(Z, "Z")
        Y = as_binary_matrix(Y, "Y")
        if Z.shape[1] != Y.shape[0]:
            raise ValueError(f"Z has {Z.shape[1]} columns, Y has {Y.shape[0]} rows")
        return cls(Z=Z, Y=Y, params=params)

    @property
    def n_rows(self) -> int:
        return self.Z.shape[0]

    @property
    def n_trials(self) -> int:
        return self.Y.shape[1]

    @property
    def k(self) -> int:
        """Number of columns currently represented (zero columns included)."""
        return self.Z.shape[1]

    @property
    def kplus(self) -> int:
        """Number of columns with at least one edge."""
        return int(np.count_nonzero(self.column_sums))

    def copy(self) -> "SamplerState":
        import dataclasses

        # replace() keeps fields added by subclasses (e.g. a prior over K)
        return dataclasses.replace(
            self,
            Z=self.Z.copy(),
            Y=self.Y.copy(),
            column_sums=self.column_sums.copy(),
            counts=self.counts.copy(),
        )

    def check_consistency(self):
        """Assert the caches match Z and Y exactly (test helper)."""
        assert self.Z.shape[1] == self.Y.shape[0]
        assert np.isin(self.Z, (0, 1)).all() and np.isin(self.Y, (0, 1)).all()
        np.testing.assert_array_equal(self.column_sums, self.Z.sum(axis=0))
        np.testing.assert_array_equal(
            self.counts, self.Z.astype(np.int32) @ self.Y.astype(np.int32)
        )
