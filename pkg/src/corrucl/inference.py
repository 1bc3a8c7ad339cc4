"""Gaussian posterior tracking for correlated and uncorrelated priors.

The correlated path keeps the posterior in information form (precision
``Lambda`` and information vector ``q``) and the covariance ``Sigma`` side by
side. ``Lambda`` is updated exactly by a rank-1 addition and ``Sigma`` by
Sherman-Morrison, with a periodic direct solve to keep the two consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import NumericError, PriorError

__all__ = [
    "GaussianPrior",
    "PosteriorState",
    "EstimatorMoments",
    "RESYNC_INTERVAL",
    "RESYNC_RTOL",
    "init_state",
    "information_update",
    "covariance_rank1_update",
    "batch_posterior",
    "correlation_profile",
    "conditional_variance",
    "conditional_confidence",
    "estimator_moments",
]

RESYNC_INTERVAL = 256
RESYNC_RTOL = 1e-8


def _check_spd(cov: np.ndarray, what: str = "covariance") -> None:
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise PriorError(f"{what} must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise PriorError(f"{what} has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > 1e-10 * scale:
        raise PriorError(f"{what} is not symmetric")
    try:
        np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise PriorError(f"{what} is not positive definite") from None


@dataclass(frozen=True)
class GaussianPrior:
    """Multivariate Gaussian prior over the arm means.

    With ``uninformative=True`` the covariance is ignored and every arm starts
    with unbounded variance.
    """

    mean: np.ndarray
    covariance: np.ndarray | None = None
    uninformative: bool = False

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if mean.size < 1 or not np.all(np.isfinite(mean)):
            raise PriorError("prior mean must be a finite, non-empty vector")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        if self.uninformative:
            object.__setattr__(self, "covariance", None)
            return
        if self.covariance is None:
            raise PriorError("informative prior needs a covariance")
        cov = np.array(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise PriorError(f"covariance shape {cov.shape} does not match {mean.size} arms")
        _check_spd(cov)
        cov = 0.5 * (cov + cov.T)
        cov.setflags(write=False)
        object.__setattr__(self, "covariance", cov)

    @classmethod
    def uninformative_prior(cls, n_arms: int) -> "GaussianPrior":
        return cls(mean=np.zeros(n_arms), uninformative=True)

    @classmethod
    def diagonal(cls, mean, variance: float) -> "GaussianPrior":
        mean = np.asarray(mean, dtype=float).reshape(-1)
        if not variance > 0:
            raise PriorError("prior variance must be positive")
        return cls(mean=mean, covariance=variance * np.eye(mean.size))

    @property
    def n_arms(self) -> int:
        return self.mean.size

    @cached_property
    def precision(self) -> np.ndarray:
        if self.uninformative:
            raise PriorError("uninformative prior has no precision matrix")
        lam = np.linalg.inv(self.covariance)
        return 0.5 * (lam + lam.T)

    @property
    def is_diagonal(self) -> bool:
        if self.uninformative:
            return True
        off = self.covariance - np.diag(np.diag(self.covariance))
        return not np.any(off)

    def common_variance(self) -> float:
        """The shared prior variance of a diagonal prior (sigma0^2)."""
        if self.uninformative:
            return math.inf
        d = np.diag(self.covariance)
        if not self.is_diagonal or not np.all(d == d[0]):
            raise PriorError("uncorrelated path needs a diagonal covariance with a common variance")
        return float(d[0])

    def confidence(self, sampling_variance: float) -> float:
        """delta^2 = sigma_s^2 / sigma0^2 (zero for the uninformative prior)."""
        return sampling_variance / self.common_variance()


@dataclass
class PosteriorState:
    """Running posterior for one episode. Owned by a single episode.

    ``mode`` is ``"full"`` (dense covariance), ``"diagonal"`` (uncorrelated
    prior with common variance, closed forms) or ``"uninformative"``. In the
    two non-full modes ``Sigma`` and ``Lambda`` are built on demand from the
    per-arm variances.
    """

    mode: str
    sampling_variance: float
    prior_mean: np.ndarray
    counts: np.ndarray
    sums: np.ndarray
    mu: np.ndarray
    variances: np.ndarray
    q: np.ndarray | None = None
    Sigma_full: np.ndarray | None = None
    Lambda_full: np.ndarray | None = None
    delta_sq: float = 0.0
    t: int = 0
    resync_log: list = field(default_factory=list)

    @property
    def n_arms(self) -> int:
        return self.counts.size

    @property
    def visited(self) -> np.ndarray:
        return self.counts > 0

    @property
    def empirical_means(self) -> np.ndarray:
        out = np.zeros(self.n_arms)
        np.divide(self.sums, self.counts, out=out, where=self.counts > 0)
        return out

    @property
    def Sigma(self) -> np.ndarray:
        if self.mode == "full":
            return self.Sigma_full
        return np.diag(self.variances)

    @property
    def Lambda(self) -> np.ndarray:
        if self.mode == "full":
            return self.Lambda_full
        with np.errstate(divide="ignore"):
            return np.diag(1.0 / self.variances)

    def unbounded(self) -> np.ndarray:
        """Arms whose variance is the infinite marker (uninformative, unvisited)."""
        if self.mode == "uninformative":
            return self.counts == 0
        return np.zeros(self.n_arms, dtype=bool)

    def resync(self) -> float:
        """Recompute Sigma from Lambda by a direct solve.

        Returns the relative disagreement between the Sherman-Morrison
        covariance and the solved one; the solved value replaces the stored
        one.
        """
        if self.mode != "full":
            return 0.0
        solved = np.linalg.solve(self.Lambda_full, np.eye(self.n_arms))
        solved = 0.5 * (solved + solved.T)
        err = float(np.max(np.abs(solved - self.Sigma_full)) / np.max(np.abs(solved)))
        self.Sigma_full = solved
        self.variances = np.diag(solved).copy()
        self.mu = solved @ self.q
        self.resync_log.append((self.t, err))
        return err


def init_state(prior: GaussianPrior, sampling_variance: float, diagonal: bool = False) -> PosteriorState:
    """Posterior at t = 0.

    ``diagonal=True`` selects the closed-form uncorrelated path, which needs a
    diagonal prior with a common variance. Uninformative priors always take
    their own path.
    """
    if not (math.isfinite(sampling_variance) and sampling_variance > 0):
        raise PriorError("sampling_variance must be positive")
    n = prior.n_arms
    base = dict(
        sampling_variance=float(sampling_variance),
        prior_mean=prior.mean,
        counts=np.zeros(n, dtype=np.int64),
        sums=np.zeros(n),
    )
    if prior.uninformative:
        return PosteriorState(
            mode="uninformative", mu=np.zeros(n), variances=np.full(n, np.inf), delta_sq=0.0, **base
        )
    if diagonal:
        s0 = prior.common_variance()
        return PosteriorState(
            mode="diagonal",
            mu=prior.mean.copy(),
            variances=np.full(n, s0),
            delta_sq=sampling_variance / s0,
            **base,
        )
    sigma = np.array(prior.covariance, dtype=float)
    lam = prior.precision.copy()
    return PosteriorState(
        mode="full",
        mu=prior.mean.copy(),
        variances=np.diag(sigma).copy(),
        q=lam @ prior.mean,
        Sigma_full=sigma,
        Lambda_full=lam,
        **base,
    )


def covariance_rank1_update(Sigma: np.ndarray, arm: int, sampling_variance: float) -> np.ndarray:
    """Sherman-Morrison update of ``Sigma`` after one observation of ``arm``."""
    col = Sigma[:, arm]
    denom = sampling_variance + col[arm]
    out = Sigma - np.outer(col, col) / denom
    out = 0.5 * (out + out.T)
    if not np.all(np.isfinite(out)):
        raise NumericError("non-finite covariance after rank-1 update")
    return out


def information_update(state: PosteriorState, arm: int, reward: float) -> PosteriorState:
    """Fold one reward into ``state`` in place and return it."""
    if not 0 <= arm < state.n_arms:
        raise IndexError(f"arm {arm} out of range for {state.n_arms} arms")
    sv = state.sampling_variance
    state.counts[arm] += 1
    state.sums[arm] += reward
    state.t += 1
    n = state.counts[arm]

    if state.mode == "uninformative":
        state.mu[arm] = state.sums[arm] / n
        state.variances[arm] = sv / n
    elif state.mode == "diagonal":
        d2 = state.delta_sq
        state.mu[arm] = (d2 * state.prior_mean[arm] + state.sums[arm]) / (d2 + n)
        state.variances[arm] = sv / (d2 + n)
    else:
        # q(t-1) == Lambda(t-1) mu(t-1) exactly, so accumulate q directly.
        state.q[arm] += reward / sv
        state.Lambda_full[arm, arm] += 1.0 / sv
        state.Sigma_full = covariance_rank1_update(state.Sigma_full, arm, sv)
        state.variances = np.diag(state.Sigma_full).copy()
        state.mu = state.Sigma_full @ state.q
        if state.t % RESYNC_INTERVAL == 0:
            state.resync()
    return state


def batch_posterior(prior: GaussianPrior, counts, empirical_means, sampling_variance: float):
    """Closed-form posterior ``(mu, Lambda)`` from counts and empirical means."""
    counts = np.asarray(counts)
    mbar = np.asarray(empirical_means, dtype=float)
    if np.any(counts < 0):
        raise ValueError("counts must be non-negative")
    if counts.shape != prior.mean.shape or mbar.shape != prior.mean.shape:
        raise ValueError("counts and empirical_means must have one entry per arm")
    p_inv = counts / sampling_variance
    lam = prior.precision + np.diag(p_inv)
    rhs = p_inv * np.where(counts > 0, mbar, 0.0) + prior.precision @ prior.mean
    mu = np.linalg.solve(lam, rhs)
    return mu, lam


def correlation_profile(state: PosteriorState, arm: int):
    """Row ``rho_arm,j`` of the posterior correlation and its Euclidean norm."""
    sigma = state.Sigma
    sd = np.sqrt(np.diag(sigma))
    if np.any(sd <= 0) or not np.all(np.isfinite(sd)):
        raise NumericError("correlation undefined for zero or infinite variance")
    rho = sigma[arm] / (sd[arm] * sd)
    return rho, float(np.sqrt(np.sum(rho * rho)))


def conditional_variance(Sigma0: np.ndarray, arm: int) -> float:
    """Variance of ``arm`` given the means of every other arm (Schur complement)."""
    s = np.asarray(Sigma0, dtype=float)
    n = s.shape[0]
    if n == 1:
        return float(s[0, 0])
    rest = np.delete(np.arange(n), arm)
    cross = s[arm, rest]
    try:
        val = s[arm, arm] - cross @ np.linalg.solve(s[np.ix_(rest, rest)], cross)
    except np.linalg.LinAlgError:
        raise NumericError("singular covariance block") from None
    if not val > 0:
        raise NumericError(f"non-positive conditional variance at arm {arm}")
    return float(val)


def conditional_confidence(Sigma0: np.ndarray, arm: int, sampling_variance: float) -> float:
    """delta^2_{i-cond} = sigma_s^2 / sigma^2_{i-cond}."""
    return sampling_variance / conditional_variance(Sigma0, arm)


@dataclass(frozen=True)
class EstimatorMoments:
    bias: np.ndarray
    covariance: np.ndarray


def estimator_moments(prior: GaussianPrior, counts, true_means, sampling_variance: float) -> EstimatorMoments:
    """Bias and covariance of the posterior mean as an estimator of the true means."""
    if prior.uninformative:
        raise PriorError("estimator moments need an informative prior")
    counts = np.asarray(counts)
    m = np.asarray(true_means, dtype=float)
    p_inv = np.diag(counts / sampling_variance)
    a = np.linalg.inv(prior.precision + p_inv)
    bias = a @ prior.precision @ (prior.mean - m)
    cov = a @ p_inv @ a
    return EstimatorMoments(bias=bias, covariance=0.5 * (cov + cov.T))
