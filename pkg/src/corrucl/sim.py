"""Seeded episodes, ensembles and runtime invariant checks."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundReport
from .env import BanditInstance, sample_reward
from .errors import ConfigError
from .inference import RESYNC_RTOL, GaussianPrior, PosteriorState, information_update, init_state
from .policy import PolicyParams, select_arm

__all__ = [
    "Violation",
    "EpisodeResult",
    "Experiment",
    "EnsembleResult",
    "VerificationRow",
    "VerificationTable",
    "run_episode",
    "run_ensemble",
    "verify_bounds",
]

# Slack for floating-point comparisons in the runtime inequality checks.
_CHECK_RTOL = 1e-9


@dataclass(frozen=True)
class Violation:
    step: int
    kind: str
    detail: str


@dataclass
class EpisodeResult:
    arms: np.ndarray
    regret: np.ndarray
    cumulative_regret: np.ndarray
    counts: np.ndarray
    post_init_counts: np.ndarray
    t_init: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return self.arms.size


def _check_config(instance: BanditInstance, prior: GaussianPrior, params: PolicyParams):
    if prior.n_arms != instance.n_arms:
        raise ConfigError("prior", f"prior has {prior.n_arms} arms, instance has {instance.n_arms}")
    if params.variant == "uninformative" and not prior.uninformative:
        raise ConfigError("prior.variant", "uninformative policy needs an uninformative prior")
    if params.variant != "uninformative" and prior.uninformative:
        raise ConfigError("prior.variant", f"{params.variant} policy needs an informative prior")
    if params.variant == "uncorrelated":
        try:
            prior.common_variance()
        except ValueError as exc:
            raise ConfigError("prior.covariance", str(exc)) from None


class _InvariantMonitor:
    """Per-step checks of the variance bounds for correlated episodes.

    Cheap diagonal checks run every step; the estimator-covariance bounds need
    the full matrix and run at re-sync points and at the end.
    """

    def __init__(self, state: PosteriorState, prior: GaussianPrior, params: PolicyParams):
        self.sv = state.sampling_variance
        self.nu = params.nu
        self.n = state.n_arms
        self.cond_delta_sq = self.sv * np.diag(prior.precision)
        self.prev_var = state.variances.copy()
        self.violations: list[Violation] = []
        self.seen_resyncs = 0

    def _flag(self, step, kind, mask, values):
        for i in np.flatnonzero(mask)[:5]:
            self.violations.append(Violation(step, kind, f"arm {i}: {values(i)}"))

    def after_update(self, step: int, state: PosteriorState, post_counts: np.ndarray, in_init: bool):
        var = state.variances
        tol = _CHECK_RTOL
        self._flag(
            step, "variance-increase", var > self.prev_var * (1 + tol),
            lambda i: f"{self.prev_var[i]!r} -> {var[i]!r}",
        )
        self.prev_var = var.copy()
        lower = self.sv / (self.cond_delta_sq + state.counts)
        self._flag(step, "variance-lower-bound", var < lower * (1 - tol), lambda i: f"{var[i]!r} < {lower[i]!r}")
        if not in_init:
            upper = self.sv / (self.nu + post_counts)
            self._flag(
                step, "variance-upper-bound", var > upper * (1 + tol), lambda i: f"{var[i]!r} > {upper[i]!r}"
            )
        while self.seen_resyncs < len(state.resync_log):
            t, err = state.resync_log[self.seen_resyncs]
            self.seen_resyncs += 1
            if err > RESYNC_RTOL:
                self.violations.append(Violation(t, "resync-drift", f"relative error {err:.3e}"))
            self.full_check(step, state)

    def full_check(self, step: int, state: PosteriorState):
        s = state.Sigma_full
        var = state.variances
        s2 = s * s
        est_var = s2 @ state.counts / self.sv
        lo = state.counts * var**2 / self.sv
        hi = s2 @ (1.0 / var)  # sigma_i^2 * sum_j rho_ij^2
        slack = _CHECK_RTOL * hi
        self._flag(step, "estimator-variance-lower", est_var < lo - slack, lambda i: f"{est_var[i]!r} < {lo[i]!r}")
        self._flag(step, "estimator-variance-upper", est_var > hi + slack, lambda i: f"{est_var[i]!r} > {hi[i]!r}")
        eig = np.linalg.eigvalsh(s)
        if eig[0] <= 0:
            self.violations.append(Violation(step, "covariance-not-spd", f"min eigenvalue {eig[0]!r}"))
        resid = np.max(np.abs(s @ state.Lambda_full - np.eye(self.n)))
        if resid > RESYNC_RTOL:
            self.violations.append(Violation(step, "sigma-lambda-inverse", f"residual {resid:.3e}"))


def run_episode(
    instance: BanditInstance,
    prior: GaussianPrior,
    params: PolicyParams,
    T: int,
    seed: int,
    check_invariants: bool = True,
) -> EpisodeResult:
    """Play ``T`` steps of the configured policy against ``instance``.

    Only the reward stream consumes randomness, so ``seed`` fixes every
    recorded value. Invariant violations are logged, not raised.
    """
    if T < 1:
        raise ConfigError("run.T", "horizon must be >= 1")
    _check_config(instance, prior, params)
    rng = np.random.default_rng(seed)
    state = init_state(prior, instance.sampling_variance, diagonal=params.variant == "uncorrelated")
    correlated = params.variant == "correlated"
    monitor = _InvariantMonitor(state, prior, params) if (correlated and check_invariants) else None

    n = instance.n_arms
    arms = np.empty(T, dtype=np.int64)
    post_counts = np.zeros(n, dtype=np.int64)
    t_init = 0
    in_init = correlated
    for t in range(1, T + 1):
        decision = select_arm(state, t, params)
        if decision.phase == "initialization":
            t_init += 1
        else:
            if in_init and monitor is not None:
                _check_initialization(monitor, state, t_init, params)
            in_init = False
            post_counts[decision.arm] += 1
        arm = decision.arm
        arms[t - 1] = arm
        information_update(state, arm, sample_reward(instance, arm, rng))
        if monitor is not None:
            monitor.after_update(t, state, post_counts, in_init)

    if monitor is not None:
        if in_init:
            _check_initialization(monitor, state, t_init, params, finished=False)
        err = state.resync()
        if err > RESYNC_RTOL:
            monitor.violations.append(Violation(T, "resync-drift", f"relative error {err:.3e}"))
        monitor.seen_resyncs = len(state.resync_log)
        monitor.full_check(T, state)

    gaps = instance.gaps
    regret = gaps[arms]
    cumulative = np.cumsum(regret)
    counts = state.counts.copy()
    violations = monitor.violations if monitor is not None else []
    if not math.isclose(cumulative[-1], float(gaps @ counts), rel_tol=1e-12, abs_tol=1e-9):
        violations.append(Violation(T, "regret-identity", f"{cumulative[-1]!r} != {gaps @ counts!r}"))
    return EpisodeResult(
        arms=arms,
        regret=regret,
        cumulative_regret=cumulative,
        counts=counts,
        post_init_counts=post_counts,
        t_init=t_init,
        violations=violations,
    )


def _check_initialization(monitor, state, t_init, params, finished=True):
    if t_init > state.n_arms:
        monitor.violations.append(Violation(t_init, "initialization-length", f"t_init={t_init} > N={state.n_arms}"))
    if finished:
        worst = float(state.variances.max())
        limit = state.sampling_variance / params.nu
        if worst > limit * (1 + _CHECK_RTOL):
            monitor.violations.append(Violation(t_init, "initialization-variance", f"{worst!r} > {limit!r}"))


@dataclass(frozen=True)
class Experiment:
    """Fully resolved ensemble specification."""

    instance: BanditInstance
    prior: GaussianPrior
    policy: PolicyParams
    T: int
    runs: int
    seed: int = 42
    check_invariants: bool = True


@dataclass
class EnsembleResult:
    seeds: np.ndarray
    curves: np.ndarray  # (runs, T) cumulative regret
    counts: np.ndarray  # (runs, N)
    post_init_counts: np.ndarray  # (runs, N)
    t_init: np.ndarray  # (runs,)
    violations: list[tuple[int, Violation]]

    @property
    def runs(self) -> int:
        return self.curves.shape[0]

    @property
    def horizon(self) -> int:
        return self.curves.shape[1]

    @property
    def mean_cum_regret(self) -> np.ndarray:
        return self.curves.mean(axis=0)

    @property
    def sem(self) -> np.ndarray:
        if self.runs < 2:
            return np.zeros(self.horizon)
        return self.curves.std(axis=0, ddof=1) / math.sqrt(self.runs)

    @property
    def mean_counts(self) -> np.ndarray:
        return self.counts.mean(axis=0)


def _episode_job(args):
    exp, seed = args
    return run_episode(exp.instance, exp.prior, exp.policy, exp.T, seed, exp.check_invariants)


def run_ensemble(exp: Experiment, workers: int | None = 1) -> EnsembleResult:
    """Run ``exp.runs`` episodes with seeds ``seed, seed + 1, ...``.

    Results do not depend on ``workers``; episodes are collected in seed order.
    """
    if exp.runs < 1:
        raise ConfigError("run.runs", "need at least one run")
    seeds = exp.seed + np.arange(exp.runs)
    jobs = [(exp, int(s)) for s in seeds]
    if workers is None:
        workers = os.cpu_count() or 1
    if workers > 1 and exp.runs > 1:
        with ProcessPoolExecutor(max_workers=min(workers, exp.runs)) as pool:
            episodes = list(pool.map(_episode_job, jobs))
    else:
        episodes = [_episode_job(j) for j in jobs]
    return EnsembleResult(
        seeds=seeds,
        curves=np.stack([e.cumulative_regret for e in episodes]),
        counts=np.stack([e.counts for e in episodes]),
        post_init_counts=np.stack([e.post_init_counts for e in episodes]),
        t_init=np.array([e.t_init for e in episodes]),
        violations=[(int(s), v) for s, e in zip(seeds, episodes) for v in e.violations],
    )


@dataclass(frozen=True)
class VerificationRow:
    arm: int
    empirical_n: float
    sem: float
    bound: float

    @property
    def satisfied(self) -> bool:
        return self.empirical_n - 3 * self.sem <= self.bound


@dataclass
class VerificationTable:
    rows: list[VerificationRow]

    @property
    def passed(self) -> bool:
        return all(r.satisfied for r in self.rows)


def verify_bounds(ensemble: EnsembleResult, report: BoundReport) -> VerificationTable:
    """Compare ensemble-mean selection counts with the per-arm bounds."""
    counts = ensemble.post_init_counts if report.after_initialization else ensemble.counts
    if report.horizon != ensemble.horizon:
        raise ConfigError("run.T", f"bound horizon {report.horizon} != ensemble horizon {ensemble.horizon}")
    rows = []
    for r in report.rows:
        if not 0 <= r.arm < counts.shape[1]:
            raise ConfigError("bounds", f"arm {r.arm} not in ensemble")
        col = counts[:, r.arm].astype(float)
        sem = col.std(ddof=1) / math.sqrt(col.size) if col.size > 1 else 0.0
        rows.append(VerificationRow(r.arm, float(col.mean()), float(sem), r.bound))
    return VerificationTable(rows)
