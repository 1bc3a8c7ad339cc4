"""Regret upper bounds for the UCL policies, the Lai-Robbins lower bound, and
numeric sweeps of the supporting inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .env import BanditInstance
from .errors import BoundParameterError, DegenerateGapError, PriorError
from .inference import GaussianPrior, conditional_confidence
from .policy import DEFAULT_K, inv_norm_cdf, norm_sf

__all__ = [
    "BoundParams",
    "ArmBound",
    "BoundReport",
    "CheckReport",
    "theorem1_bound",
    "theorem2_bound",
    "beta_coefficients",
    "lai_robbins_coefficient",
    "lai_robbins_lower_bound",
    "check_lemma1",
    "check_lemma2",
    "admissible",
    "admissible_pairs",
]


def _exp(x: float) -> float:
    """exp that saturates to inf; bounds with badly wrong priors are huge."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class BoundParams:
    epsilon: float = 1 / math.sqrt(10)
    a: float = 2.0
    K: float = DEFAULT_K

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise BoundParameterError("epsilon must lie in (0, 1)")
        if not self.a > 0:
            raise BoundParameterError("a must be positive")
        if not self.K > 0:
            raise BoundParameterError("K must be positive")

    def c1(self, delta_sq: float) -> float:
        e = self.epsilon
        return (1 - e) / (1 + delta_sq - e)

    def c2(self, delta_sq: float) -> float:
        return (1 - self.epsilon) / delta_sq

    def minimal_a(self, delta_sq: float) -> float:
        """Infimum of admissible a; also the point where 3 a c1 = 4."""
        return 4.0 / 3.0 * (1 + delta_sq / (1 - self.epsilon))

    def check(self, delta_sq: float) -> None:
        if not delta_sq > 0:
            raise BoundParameterError("regret bounds need an informative prior (delta^2 > 0)")
        a_min = self.minimal_a(delta_sq)
        if not (self.a > a_min and 3 * self.a * self.c1(delta_sq) > 4):
            raise BoundParameterError(
                f"a = {self.a} is not admissible for delta^2 = {delta_sq:.6g}; need a > {a_min:.6g}"
            )

    def tail_factor(self, delta_sq: float) -> float:
        """3 a c1 / (2 (3 a c1 - 4))."""
        x = 3 * self.a * self.c1(delta_sq)
        return x / (2 * (x - 4))


@dataclass(frozen=True)
class ArmBound:
    arm: int
    gap: float
    prior_error: float  # m_i - mu0_i
    case: int
    eta: int
    nhat: float

    @property
    def bound(self) -> float:
        return self.eta + self.nhat


@dataclass
class BoundReport:
    """Per-suboptimal-arm bounds on E[n_i(T)].

    ``after_initialization`` marks bounds that only count selections made
    after the correlated initialization phase.
    """

    horizon: int
    rows: list[ArmBound]
    lai_robbins_coeff: float
    theorem: int
    after_initialization: bool = False
    delta_sq: float = math.nan

    @property
    def total(self) -> float:
        """Upper bound on cumulative regret: sum of gap * (eta + nhat)."""
        return float(sum(r.gap * r.bound for r in self.rows))

    def lower_bound_curve(self, t) -> np.ndarray:
        return self.lai_robbins_coeff * np.log(np.asarray(t, dtype=float))

    def by_arm(self) -> dict[int, ArmBound]:
        return {r.arm: r for r in self.rows}


def _require_unique_optimum(instance: BanditInstance) -> int:
    if not instance.has_unique_optimum():
        raise DegenerateGapError(
            f"bounds need a unique optimal arm; arms {instance.optimal_arms.tolist()} tie"
        )
    return instance.best_arm


def _eta(gap: float, sampling_variance: float, params: BoundParams, T: int, offset: float) -> int:
    log_term = 2 * math.log(params.K) + 2 * params.a * math.log(T)
    return max(1, math.ceil(4 * sampling_variance / gap**2 * log_term - offset))


def _case(dm_best: float, dm_i: float) -> int:
    if dm_best > 0:
        return 1 if dm_i < 0 else 2
    return 3 if dm_i < 0 else 4


def theorem1_bound(instance: BanditInstance, prior: GaussianPrior, params: BoundParams, T: int) -> BoundReport:
    """Bound on E[n_i(T)] for the uncorrelated UCL policy with a diagonal prior.

    Every branch of the four-way case split on the signs of the prior errors
    at the optimal arm and at arm i is implemented as printed, including the
    boundary value 0 going to the cheaper branch.
    """
    if T < 1:
        raise BoundParameterError("horizon T must be >= 1")
    if prior.uninformative:
        raise PriorError("theorem1_bound needs an informative diagonal prior")
    s0 = prior.common_variance()
    sv = instance.sampling_variance
    d2 = sv / s0
    params.check(d2)
    best = _require_unique_optimum(instance)
    a, K = params.a, params.K
    c2 = params.c2(d2)
    tail = params.tail_factor(d2)
    dm = instance.means - prior.mean
    dmb = dm[best]

    best_part = max(
        _exp(2 * d2 * dmb**2 / (3 * a * s0)),
        _exp(2 * dmb**2 / (3 * a * s0)),
    ) + tail * _exp(c2 * d2 * dmb**2 / (2 * s0))
    cheap = a / (K * (a - 1))

    rows = []
    for i in range(instance.n_arms):
        if i == best:
            continue
        gap = float(instance.gaps[i])
        eta = _eta(gap, sv, params, T, d2)
        arm_part = _exp(2 * d2 * dm[i] ** 2 / (3 * a * s0 * eta)) + tail * _exp(
            c2 * d2 * dm[i] ** 2 / (2 * s0 * eta)
        )
        case = _case(dmb, dm[i])
        nhat = {
            1: best_part + arm_part,
            2: best_part + cheap,
            3: arm_part + cheap,
            4: 2 * cheap,
        }[case]
        rows.append(ArmBound(i, gap, float(dm[i]), case, eta, float(nhat)))
    return BoundReport(
        horizon=T,
        rows=rows,
        lai_robbins_coeff=lai_robbins_coefficient(instance),
        theorem=1,
        delta_sq=d2,
    )


def beta_coefficients(prior: GaussianPrior, true_means, sampling_variance: float, nu: float) -> np.ndarray:
    if prior.uninformative:
        raise PriorError("beta coefficients need an informative prior")
    m = np.asarray(true_means, dtype=float)
    # sum_j sum_k |lambda0_kj| |mu0_j - m_j|
    spread = float(np.abs(prior.precision).sum(axis=0) @ np.abs(prior.mean - m))
    d2c = np.array(
        [conditional_confidence(prior.covariance, i, sampling_variance) for i in range(prior.n_arms)]
    )
    return np.sqrt(sampling_variance * (1 + d2c) / nu) * spread


def theorem2_bound(
    instance: BanditInstance, prior: GaussianPrior, params: BoundParams, nu: float, T: int
) -> BoundReport:
    """Bound on post-initialization selections for the correlated UCL policy.

    ``c1``, ``c2`` and the admissibility of ``a`` use the largest conditional
    confidence over all arms.
    """
    if T < 1:
        raise BoundParameterError("horizon T must be >= 1")
    if not 0 < nu <= 1:
        raise BoundParameterError("nu must lie in (0, 1]")
    if prior.uninformative:
        raise PriorError("theorem2_bound needs an informative prior")
    sv = instance.sampling_variance
    d2c = np.array([conditional_confidence(prior.covariance, i, sv) for i in range(instance.n_arms)])
    d2 = float(d2c.max())
    params.check(d2)
    best = _require_unique_optimum(instance)
    a = params.a
    c2 = params.c2(d2)
    tail = params.tail_factor(d2)
    beta = beta_coefficients(prior, instance.means, sv, nu)
    bb, db = beta[best], d2c[best]
    best_part = max(
        _exp(2 * bb**2 * db / (3 * a * nu * (1 + db))),
        _exp(2 * bb**2 / (3 * a)),
    ) + tail * _exp(c2 * bb**2 / 2)
    dm = instance.means - prior.mean
    rows = []
    for i in range(instance.n_arms):
        if i == best:
            continue
        gap = float(instance.gaps[i])
        eta = _eta(gap, sv, params, T, nu)
        nhat = best_part + _exp(2 * beta[i] ** 2 / (3 * a)) + tail * _exp(c2 * beta[i] ** 2 / 2)
        rows.append(ArmBound(i, gap, float(dm[i]), 1, eta, float(nhat)))
    return BoundReport(
        horizon=T,
        rows=rows,
        lai_robbins_coeff=lai_robbins_coefficient(instance),
        theorem=2,
        after_initialization=True,
        delta_sq=d2,
    )


def lai_robbins_coefficient(instance: BanditInstance) -> float:
    """sum over suboptimal arms of 2 sigma_s^2 / gap_i.

    Arms tied with the best mean carry no regret and are skipped.
    """
    gaps = instance.gaps
    sub = gaps > 0
    return float(np.sum(2 * instance.sampling_variance / gaps[sub]))


def lai_robbins_lower_bound(instance: BanditInstance, T: int) -> np.ndarray:
    """Asymptotic lower bound on cumulative regret at t = 1..T."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return lai_robbins_coefficient(instance) * np.log(np.arange(1, T + 1, dtype=float))


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    per_inequality: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, label: str, ok: np.ndarray, points: np.ndarray, limit: int = 20):
        ok = np.asarray(ok, dtype=bool)
        bad = points[~ok]
        self.checked += ok.size
        self.per_inequality[label] = (int(ok.size), int(bad.size))
        self.failures.extend((label, float(p)) for p in bad[:limit])

    def summary(self) -> str:
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'} ({self.checked} points)"]
        for label, (n, nbad) in self.per_inequality.items():
            lines.append(f"  {label}: {n - nbad}/{n} hold")
        for label, p in self.failures:
            lines.append(f"  violated: {label} at {p!r}")
        return "\n".join(lines)


_REL = 1e-12


def check_lemma1(points: int = 10_000, a_values=(1.5, 2.0, 3.0), t_max: int = 10_000) -> CheckReport:
    """Sweep the Gaussian tail and quantile inequalities on fixed grids."""
    rep = CheckReport("tail-quantile")
    w = np.linspace(0.0, 10.0, points)
    tail = np.array([norm_sf(x) for x in w])
    g = np.exp(-(w**2) / 2)
    upper = 2 * g / (math.sqrt(2 * math.pi) * (w + np.sqrt(w**2 + 8 / math.pi)))
    half = 0.5 * g
    lower = math.sqrt(2 / math.pi) * g / (w + np.sqrt(w**2 + 4))
    rep.record("tail <= 2e^{-w^2/2}/(sqrt(2pi)(w+sqrt(w^2+8/pi)))", tail <= upper * (1 + _REL), w)
    rep.record("2e^{-w^2/2}/(sqrt(2pi)(w+sqrt(w^2+8/pi))) <= e^{-w^2/2}/2", upper <= half * (1 + _REL), w)
    rep.record("tail >= sqrt(2/pi)e^{-w^2/2}/(w+sqrt(w^2+4))", tail >= lower * (1 - _REL), w)

    alpha = np.geomspace(1e-9, 0.5, points)
    z = np.array([-inv_norm_cdf(x) for x in alpha])
    rep.record("quantile <= sqrt(-2 log alpha)", z <= np.sqrt(-2 * np.log(alpha)) * (1 + _REL), alpha)
    x = 2 * math.pi * alpha**2
    radicand = -np.log(x * (1 - np.log(x)))
    pos = radicand > 0
    rep.record(
        "quantile > sqrt(-log(2pi alpha^2 (1 - log(2pi alpha^2))))",
        z[pos] > np.sqrt(radicand[pos]),
        alpha[pos],
    )

    t = np.arange(1, t_max + 1, dtype=float)
    k = math.sqrt(2 * math.pi * math.e)
    for a in a_values:
        za = np.array([-inv_norm_cdf(1 / (k * ti**a)) for ti in t])
        rhs = np.sqrt(1.5 * a * np.log(t))
        # t = 1: both sides reduce to the degenerate comparison at zero.
        ok = np.where(t >= 2, za > rhs, za >= 0)
        rep.record(f"quantile(1-1/(sqrt(2pi e) t^{a})) > sqrt(1.5 a log t)", ok, t)
    return rep


def admissible(c1, c2):
    """Precondition of the difference-of-squares inequality: c2 > -1 and
    (1 - c1)(1 + c2) >= 1."""
    c1, c2 = np.asarray(c1, dtype=float), np.asarray(c2, dtype=float)
    return (c2 > -1) & ((1 - c1) * (1 + c2) >= 1 - 1e-12)


def admissible_pairs(n: int, rng: np.random.Generator):
    """Random (c1, c2) with c2 > -1 and (1 - c1)(1 + c2) >= 1."""
    c2 = np.where(rng.random(n) < 0.2, rng.uniform(-0.999, 0.0, n), rng.exponential(5.0, n))
    c1_max = 1 - 1 / (1 + c2)
    c1 = c1_max - np.where(rng.random(n) < 0.3, 0.0, rng.exponential(2.0, n))
    return c1, c2


def check_lemma2(samples: int = 1_000_000, rng: np.random.Generator | None = None) -> CheckReport:
    """Random sweep of (x - y)^2 >= c1 x^2 - c2 y^2 over admissible (c1, c2)."""
    rng = np.random.default_rng(0) if rng is None else rng
    rep = CheckReport("difference-of-squares")
    c1, c2 = admissible_pairs(samples, rng)
    if not np.all(admissible(c1, c2)):
        raise RuntimeError("sampler produced an inadmissible (c1, c2) pair")
    x = rng.uniform(-1e6, 1e6, samples)
    y = rng.uniform(-1e6, 1e6, samples)
    lhs = (x - y) ** 2
    rhs = c1 * x**2 - c2 * y**2
    scale = (1 + np.abs(c1) + np.abs(c2)) * (x**2 + y**2)
    ok = lhs - rhs >= -1e-12 * scale
    rep.record("(x-y)^2 >= c1 x^2 - c2 y^2", ok, np.arange(samples, dtype=float))
    for j in np.flatnonzero(~ok)[:20]:
        rep.failures.append(("witness", (float(c1[j]), float(c2[j]), float(x[j]), float(y[j]))))
    # x = y needs c1 <= c2, implied by admissibility.
    rep.record("admissible pairs satisfy c1 <= c2", c1 <= c2 + 1e-12, np.arange(samples, dtype=float))
    return rep
