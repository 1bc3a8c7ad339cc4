"""Bandit instances, spatial reward surfaces and exponential kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SpecError

__all__ = [
    "BanditInstance",
    "PROFILES",
    "Patch",
    "RewardSurfaceSpec",
    "default_surface_spec",
    "make_grid_surface",
    "sample_reward",
    "exponential_kernel",
    "KERNEL_JITTER",
]

# Relative shrinkage of kernel off-diagonals (eigenvalue floor).
KERNEL_JITTER = 1e-8


@dataclass(frozen=True)
class BanditInstance:
    """Gaussian bandit with known common sampling variance.

    ``coords`` is an optional ``(N, 2)`` array of grid positions used to build
    spatial priors.
    """

    means: np.ndarray
    sampling_variance: float
    coords: np.ndarray | None = None

    def __post_init__(self):
        means = np.array(self.means, dtype=float).reshape(-1)
        if means.size < 1:
            raise SpecError("instance needs at least one arm")
        if not np.all(np.isfinite(means)):
            raise SpecError("means must be finite")
        sv = float(self.sampling_variance)
        if not (math.isfinite(sv) and sv > 0):
            raise SpecError("sampling_variance must be positive")
        means.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "sampling_variance", sv)
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float).reshape(-1, 2)
            if coords.shape[0] != means.size:
                raise SpecError("coords must have one entry per arm")
            if len({tuple(c) for c in coords.tolist()}) != coords.shape[0]:
                raise SpecError("coords must be distinct")
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)

    @property
    def n_arms(self) -> int:
        return self.means.size

    @property
    def best_arm(self) -> int:
        return int(np.argmax(self.means))

    @property
    def best_mean(self) -> float:
        return float(self.means.max())

    @property
    def gaps(self) -> np.ndarray:
        return self.best_mean - self.means

    @property
    def optimal_arms(self) -> np.ndarray:
        return np.flatnonzero(self.means == self.best_mean)

    def has_unique_optimum(self) -> bool:
        return self.optimal_arms.size == 1


PROFILES = ("flat", "cone")


@dataclass(frozen=True)
class Patch:
    """Disc of cells around ``center``.

    ``flat`` patches set every covered cell to ``value``. ``cone`` patches
    interpolate linearly from ``value`` at the center to the surface base
    value at distance ``radius``.
    """

    center: tuple[float, float]
    radius: float
    value: float
    profile: str = "flat"


@dataclass(frozen=True)
class RewardSurfaceSpec:
    rows: int
    cols: int
    base_value: float
    patches: tuple[Patch, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "patches", tuple(self.patches))

    def validate(self):
        if int(self.rows) != self.rows or int(self.cols) != self.cols:
            raise SpecError("rows and cols must be integers")
        if self.rows <= 0 or self.cols <= 0:
            raise SpecError(f"grid {self.rows}x{self.cols} has zero area")
        if not math.isfinite(self.base_value):
            raise SpecError("base_value must be finite")
        for p in self.patches:
            if not (p.radius > 0 and math.isfinite(p.radius)):
                raise SpecError(f"patch radius must be positive, got {p.radius}")
            if not math.isfinite(p.value) or not all(math.isfinite(c) for c in p.center):
                raise SpecError("patch center and value must be finite")
            if p.profile not in PROFILES:
                raise SpecError(f"patch profile must be one of {PROFILES}, got {p.profile!r}")

    @property
    def n_arms(self) -> int:
        return self.rows * self.cols

    def grid_coords(self) -> np.ndarray:
        r, c = np.divmod(np.arange(self.n_arms), self.cols)
        return np.column_stack([r, c]).astype(float)

    def patch_assignment(self) -> tuple[np.ndarray, np.ndarray]:
        """Owning patch index per cell (-1 for background) and its distance.

        A cell belongs to the nearest patch whose disc contains it; ties go to
        the earlier patch.
        """
        self.validate()
        coords = self.grid_coords()
        owner = np.full(self.n_arms, -1, dtype=int)
        best = np.full(self.n_arms, np.inf)
        for k, p in enumerate(self.patches):
            d = np.hypot(coords[:, 0] - p.center[0], coords[:, 1] - p.center[1])
            take = (d <= p.radius) & (d < best)
            owner[take] = k
            best[take] = d[take]
        return owner, best

    def high_region(self) -> np.ndarray:
        """Cells owned by a patch whose value exceeds the base value."""
        owner, _ = self.patch_assignment()
        high = np.array([p.value > self.base_value for p in self.patches] + [False])
        return high[owner]


def default_surface_spec() -> RewardSurfaceSpec:
    """10x10 grid at 30 with a cone-shaped high patch (peak 60 at (2, 2)) and
    a cone-shaped low patch (trough 5 at (7, 7)), both of radius 3."""
    return RewardSurfaceSpec(
        rows=10,
        cols=10,
        base_value=30.0,
        patches=(
            Patch(center=(2.0, 2.0), radius=3.0, value=60.0, profile="cone"),
            Patch(center=(7.0, 7.0), radius=3.0, value=5.0, profile="cone"),
        ),
    )


def make_grid_surface(spec: RewardSurfaceSpec, sampling_variance: float) -> BanditInstance:
    owner, dist = spec.patch_assignment()
    means = np.full(spec.n_arms, float(spec.base_value))
    for k, p in enumerate(spec.patches):
        cells = owner == k
        if p.profile == "cone":
            weight = 1.0 - dist[cells] / p.radius
            means[cells] = spec.base_value + (p.value - spec.base_value) * weight
        else:
            means[cells] = p.value
    return BanditInstance(means=means, sampling_variance=sampling_variance, coords=spec.grid_coords())


def sample_reward(instance: BanditInstance, arm: int, rng: np.random.Generator) -> float:
    if not 0 <= arm < instance.n_arms:
        raise IndexError(f"arm {arm} out of range for {instance.n_arms} arms")
    return float(rng.normal(instance.means[arm], math.sqrt(instance.sampling_variance)))


def exponential_kernel(
    coords: Sequence[Sequence[float]] | np.ndarray,
    prior_variance: float,
    length_scale: float,
) -> np.ndarray:
    """Covariance ``prior_variance * exp(-d_ij / length_scale)``.

    ``d_ij`` is the Euclidean distance between grid coordinates. Off-diagonal
    entries are shrunk by a factor ``1 - KERNEL_JITTER``, which lifts every
    eigenvalue by ``KERNEL_JITTER * prior_variance`` while keeping the diagonal
    exactly at ``prior_variance``.
    """
    x = np.asarray(coords, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if not np.all(np.isfinite(x)):
        raise SpecError("kernel coordinates must be finite")
    if not (math.isfinite(prior_variance) and prior_variance > 0):
        raise SpecError("prior_variance must be positive")
    if not (math.isfinite(length_scale) and length_scale > 0):
        raise SpecError("length_scale must be positive")
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=-1))
    cov = prior_variance * np.exp(-dist / length_scale)
    cov = 0.5 * (cov + cov.T) * (1.0 - KERNEL_JITTER)
    cov[np.diag_indices_from(cov)] = prior_variance
    return cov
