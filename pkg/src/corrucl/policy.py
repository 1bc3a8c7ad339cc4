"""Upper-credible-limit arm selection and the Gaussian quantile it needs."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .inference import PosteriorState, correlation_profile

__all__ = [
    "DEFAULT_K",
    "UNBOUNDED",
    "VARIANTS",
    "PolicyParams",
    "Decision",
    "norm_cdf",
    "norm_sf",
    "inv_norm_cdf",
    "alpha_t",
    "credible_multiplier",
    "ucl_index",
    "correlated_ucl_index",
    "initialization_step",
    "select_arm",
]

DEFAULT_K = math.sqrt(2 * math.pi * math.e)
# Index value reported for arms with no information at all. Never used in
# arithmetic; such arms are compared before any finite index.
UNBOUNDED = math.inf
VARIANTS = ("uninformative", "uncorrelated", "correlated")


def norm_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def norm_sf(z: float) -> float:
    """P(Z >= z) for standard normal Z."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


# Acklam's rational approximation, |rel err| < 1.2e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2 * math.log(p))
        return (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1
        )
    if p > 1 - _P_LOW:
        return -_acklam(1 - p)
    q = p - 0.5
    r = q * q
    return (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
        ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1
    )


def inv_norm_cdf(p: float) -> float:
    """Standard normal quantile, refined by two Newton steps on the erf CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"inv_norm_cdf needs 0 < p < 1, got {p}")
    if p == 0.5:
        return 0.0
    if p > 0.5:
        # Work in the lower tail where p is represented without cancellation.
        q = 1.0 - p
        return -inv_norm_cdf(q) if q < 0.5 else 0.0
    z = _acklam(p)
    for _ in range(2):
        pdf = math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        z -= (norm_cdf(z) - p) / pdf
    return z


@dataclass(frozen=True)
class PolicyParams:
    K: float = DEFAULT_K
    a: float = 1.0
    nu: float = 1.0
    variant: str = "correlated"

    def __post_init__(self):
        if not (self.K > 0 and math.isfinite(self.K)):
            raise ValueError("K must be positive")
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError("a must be positive")
        if not 0 < self.nu <= 1:
            raise ValueError("nu must lie in (0, 1]")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")


@dataclass(frozen=True)
class Decision:
    arm: int
    indices: np.ndarray
    phase: str  # "initialization" or "ucb"


def alpha_t(t: int, params: PolicyParams) -> float:
    """Credible-level tail 1/(K t^a), clamped to at most 0.5."""
    return min(1.0 / (params.K * t ** params.a), 0.5)


def credible_multiplier(t: int, params: PolicyParams) -> float:
    """Phi^{-1}(1 - alpha_t), evaluated in the lower tail."""
    return -inv_norm_cdf(alpha_t(t, params))


def _check_t(t):
    if t < 1:
        raise ValueError("t must be >= 1")


def ucl_index(state: PosteriorState, arm: int, t: int, params: PolicyParams) -> float:
    _check_t(t)
    if state.unbounded()[arm]:
        return UNBOUNDED
    return float(state.mu[arm] + math.sqrt(state.variances[arm]) * credible_multiplier(t, params))


def _rho_norms(state: PosteriorState) -> np.ndarray:
    """sqrt(sum_j rho_ij^2) for every arm at once."""
    if state.mode != "full":
        return np.ones(state.n_arms)
    s = state.Sigma_full
    var = state.variances
    return np.sqrt((s * s) @ (1.0 / var) / var)


def correlated_ucl_index(state: PosteriorState, arm: int, t: int, params: PolicyParams) -> float:
    _check_t(t)
    _, rho_norm = correlation_profile(state, arm)
    return float(state.mu[arm] + math.sqrt(state.variances[arm]) * rho_norm * credible_multiplier(t, params))


def initialization_step(state: PosteriorState, params: PolicyParams) -> int | None:
    """Highest-variance arm above sigma_s^2/nu, or None once none is left."""
    var = state.variances
    eligible = var > state.sampling_variance / params.nu
    if not eligible.any():
        return None
    return int(np.argmax(np.where(eligible, var, -np.inf)))


def _all_indices(state: PosteriorState, t: int, params: PolicyParams) -> np.ndarray:
    z = credible_multiplier(t, params)
    open_ = state.unbounded()
    idx = np.full(state.n_arms, UNBOUNDED)
    known = ~open_
    spread = np.sqrt(state.variances[known]) * z
    if params.variant == "correlated":
        spread = spread * _rho_norms(state)[known]
    idx[known] = state.mu[known] + spread
    return idx


def select_arm(state: PosteriorState, t: int, params: PolicyParams) -> Decision:
    _check_t(t)
    if params.variant == "correlated":
        arm = initialization_step(state, params)
        if arm is not None:
            return Decision(arm=arm, indices=_all_indices(state, t, params), phase="initialization")
    indices = _all_indices(state, t, params)
    open_ = state.unbounded()
    if open_.any():
        arm = int(np.argmax(open_))
    else:
        arm = int(np.argmax(indices))  # argmax returns the first maximiser
    return Decision(arm=arm, indices=indices, phase="ucb")
