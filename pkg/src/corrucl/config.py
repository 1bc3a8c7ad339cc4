"""JSON experiment configuration: parsing, defaults, presets and resolution
into concrete instances, priors and policy parameters.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .bounds import BoundParams
from .env import (
    PROFILES,
    BanditInstance,
    Patch,
    RewardSurfaceSpec,
    exponential_kernel,
    make_grid_surface,
)
from .errors import BanditError, ConfigError
from .inference import GaussianPrior
from .policy import DEFAULT_K, VARIANTS, PolicyParams
from .sim import Experiment

__all__ = [
    "PRESETS",
    "SurfaceConfig",
    "PriorConfig",
    "PolicyConfig",
    "BoundsConfig",
    "RunConfig",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "serialize_config",
    "apply_preset",
]

PRESETS = ("well-informed", "ill-informed", "uninformative")


@dataclass(frozen=True)
class PatchConfig:
    center: tuple[float, float]
    radius: float
    value: float
    profile: str = "flat"


@dataclass(frozen=True)
class SurfaceConfig:
    rows: int = 10
    cols: int = 10
    base: float = 30.0
    patches: tuple[PatchConfig, ...] = (
        PatchConfig((2.0, 2.0), 3.0, 60.0, "cone"),
        PatchConfig((7.0, 7.0), 3.0, 5.0, "cone"),
    )

    def spec(self) -> RewardSurfaceSpec:
        return RewardSurfaceSpec(
            rows=self.rows,
            cols=self.cols,
            base_value=self.base,
            patches=tuple(Patch(tuple(p.center), p.radius, p.value, p.profile) for p in self.patches),
        )


@dataclass(frozen=True)
class Mu0Config:
    """Prior mean: ``uniform`` (one value), ``patch_aligned`` (``high`` on
    above-base patches, ``other`` elsewhere) or ``explicit`` (``values``)."""

    kind: str = "patch_aligned"
    value: float = 30.0
    high: float = 100.0
    other: float = 0.0
    values: tuple[float, ...] | None = None


@dataclass(frozen=True)
class PriorConfig:
    variant: str = "correlated"
    mu0: Mu0Config = field(default_factory=Mu0Config)
    sigma0_sq: float = 10.0
    length_scale: float = 2.0


@dataclass(frozen=True)
class PolicyConfig:
    K: float = DEFAULT_K
    a: float = 1.0
    nu: float = 1.0


@dataclass(frozen=True)
class BoundsConfig:
    epsilon: float = 1 / math.sqrt(10)
    a: float = 2.0


@dataclass(frozen=True)
class RunConfig:
    T: int = 5000
    runs: int = 100
    seed: int = 42


@dataclass(frozen=True)
class ExperimentConfig:
    surface: SurfaceConfig = field(default_factory=SurfaceConfig)
    means: tuple[float, ...] | None = None
    coords: tuple[tuple[float, float], ...] | None = None
    sampling_variance: float = 10.0
    prior: PriorConfig = field(default_factory=PriorConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    bounds: BoundsConfig = field(default_factory=BoundsConfig)
    run: RunConfig = field(default_factory=RunConfig)

    # -- resolution -------------------------------------------------------

    def instance(self) -> BanditInstance:
        try:
            if self.means is not None:
                coords = self.coords
                if coords is None:
                    coords = [(float(i), 0.0) for i in range(len(self.means))]
                return BanditInstance(np.array(self.means), self.sampling_variance, np.array(coords))
            return make_grid_surface(self.surface.spec(), self.sampling_variance)
        except BanditError as exc:
            raise ConfigError("means" if self.means is not None else "surface", str(exc)) from None

    def prior_mean(self, instance: BanditInstance) -> np.ndarray:
        mu0 = self.prior.mu0
        n = instance.n_arms
        if mu0.kind == "uniform":
            return np.full(n, float(mu0.value))
        if mu0.kind == "explicit":
            if mu0.values is None or len(mu0.values) != n:
                raise ConfigError("prior.mu0.values", f"need exactly {n} values")
            return np.array(mu0.values, dtype=float)
        if self.means is not None:
            raise ConfigError("prior.mu0.kind", "patch_aligned needs a surface, not explicit means")
        high = self.surface.spec().high_region()
        return np.where(high, float(mu0.high), float(mu0.other))

    def gaussian_prior(self, instance: BanditInstance) -> GaussianPrior:
        p = self.prior
        if p.variant == "uninformative":
            return GaussianPrior.uninformative_prior(instance.n_arms)
        mean = self.prior_mean(instance)
        if p.variant == "uncorrelated":
            return GaussianPrior.diagonal(mean, p.sigma0_sq)
        cov = exponential_kernel(instance.coords, p.sigma0_sq, p.length_scale)
        try:
            return GaussianPrior(mean, cov)
        except BanditError as exc:
            raise ConfigError("prior", str(exc)) from None

    def policy_params(self) -> PolicyParams:
        return PolicyParams(K=self.policy.K, a=self.policy.a, nu=self.policy.nu, variant=self.prior.variant)

    def bound_params(self) -> BoundParams:
        return BoundParams(epsilon=self.bounds.epsilon, a=self.bounds.a, K=self.policy.K)

    def experiment(self, policy_a: float | None = None) -> Experiment:
        inst = self.instance()
        params = self.policy_params()
        if policy_a is not None:
            params = replace(params, a=policy_a)
        return Experiment(
            instance=inst,
            prior=self.gaussian_prior(inst),
            policy=params,
            T=self.run.T,
            runs=self.run.runs,
            seed=self.run.seed,
        )


# -- parsing -------------------------------------------------------------


def _positive(key, x, integer=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(key, f"expected a number, got {x!r}")
    if integer and int(x) != x:
        raise ConfigError(key, f"expected an integer, got {x!r}")
    if not (math.isfinite(x) and x > 0):
        raise ConfigError(key, f"must be positive, got {x!r}")
    return int(x) if integer else float(x)


def _number(key, x):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(key, f"expected a finite number, got {x!r}")
    return float(x)


def _obj(key, x):
    if not isinstance(x, dict):
        raise ConfigError(key, f"expected an object, got {type(x).__name__}")
    return x


def _reject_unknown(key, data, allowed):
    for k in data:
        if k not in allowed:
            raise ConfigError(f"{key}.{k}" if key else k, "unknown key")


def _pair(key, x):
    if not isinstance(x, (list, tuple)) or len(x) != 2:
        raise ConfigError(key, "expected a pair [row, col]")
    return (_number(f"{key}[0]", x[0]), _number(f"{key}[1]", x[1]))


def _profile(key, x):
    if x not in PROFILES:
        raise ConfigError(key, f"must be one of {list(PROFILES)}, got {x!r}")
    return x


def _parse_surface(d) -> SurfaceConfig:
    d = _obj("surface", d)
    _reject_unknown("surface", d, {"rows", "cols", "base", "patches"})
    out = SurfaceConfig()
    kw = {}
    if "rows" in d:
        kw["rows"] = _positive("surface.rows", d["rows"], integer=True)
    if "cols" in d:
        kw["cols"] = _positive("surface.cols", d["cols"], integer=True)
    if "base" in d:
        kw["base"] = _number("surface.base", d["base"])
    if "patches" in d:
        if not isinstance(d["patches"], list):
            raise ConfigError("surface.patches", "expected a list")
        patches = []
        for j, p in enumerate(d["patches"]):
            k = f"surface.patches[{j}]"
            p = _obj(k, p)
            _reject_unknown(k, p, {"center", "radius", "value", "profile"})
            for req in ("center", "radius", "value"):
                if req not in p:
                    raise ConfigError(f"{k}.{req}", "missing")
            patches.append(
                PatchConfig(
                    _pair(f"{k}.center", p["center"]),
                    _positive(f"{k}.radius", p["radius"]),
                    _number(f"{k}.value", p["value"]),
                    _profile(f"{k}.profile", p.get("profile", "flat")),
                )
            )
        kw["patches"] = tuple(patches)
    return replace(out, **kw)


def _parse_mu0(d) -> Mu0Config:
    d = _obj("prior.mu0", d)
    _reject_unknown("prior.mu0", d, {"kind", "value", "high", "other", "values"})
    kw = {}
    kind = d.get("kind", "patch_aligned")
    if kind not in ("uniform", "patch_aligned", "explicit"):
        raise ConfigError("prior.mu0.kind", f"unknown kind {kind!r}")
    kw["kind"] = kind
    for k in ("value", "high", "other"):
        if k in d:
            kw[k] = _number(f"prior.mu0.{k}", d[k])
    if "values" in d:
        if d["values"] is not None:
            if not isinstance(d["values"], list):
                raise ConfigError("prior.mu0.values", "expected a list")
            kw["values"] = tuple(_number(f"prior.mu0.values[{j}]", v) for j, v in enumerate(d["values"]))
    if kind == "explicit" and "values" not in kw:
        raise ConfigError("prior.mu0.values", "explicit prior mean needs values")
    return Mu0Config(**kw)


def _parse_section(key, d, cls, spec):
    d = _obj(key, d)
    _reject_unknown(key, d, set(spec))
    kw = {}
    for k, conv in spec.items():
        if k in d:
            kw[k] = conv(f"{key}.{k}", d[k])
    return cls(**kw)


def _variant(key, x):
    if x not in VARIANTS:
        raise ConfigError(key, f"must be one of {list(VARIANTS)}, got {x!r}")
    return x


def _nu(key, x):
    x = _positive(key, x)
    if x > 1:
        raise ConfigError(key, f"must lie in (0, 1], got {x!r}")
    return x


def _epsilon(key, x):
    x = _positive(key, x)
    if x >= 1:
        raise ConfigError(key, f"must lie in (0, 1), got {x!r}")
    return x


def _seed(key, x):
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise ConfigError(key, f"expected a non-negative integer, got {x!r}")
    return x


def _parse_prior(d) -> PriorConfig:
    d = _obj("prior", d)
    _reject_unknown("prior", d, {"variant", "mu0", "sigma0_sq", "length_scale"})
    kw = {}
    if "variant" in d:
        kw["variant"] = _variant("prior.variant", d["variant"])
    if "mu0" in d:
        kw["mu0"] = _parse_mu0(d["mu0"])
    if "sigma0_sq" in d:
        kw["sigma0_sq"] = _positive("prior.sigma0_sq", d["sigma0_sq"])
    if "length_scale" in d:
        kw["length_scale"] = _positive("prior.length_scale", d["length_scale"])
    return PriorConfig(**kw)


def parse_config(source: str | dict | None = None) -> ExperimentConfig:
    """Parse JSON text (or an already-decoded dict) into a validated config.

    Missing keys take their defaults; unknown keys are rejected.
    """
    if source is None:
        data: Any = {}
    elif isinstance(source, dict):
        data = source
    else:
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ConfigError("<json>", f"malformed JSON: {exc}") from None
    data = _obj("<root>", data)
    top = {"surface", "means", "coords", "sampling_variance", "prior", "policy", "bounds", "run"}
    _reject_unknown("", data, top)
    kw: dict[str, Any] = {}
    if "surface" in data:
        kw["surface"] = _parse_surface(data["surface"])
    if data.get("means") is not None:
        if not isinstance(data["means"], list) or not data["means"]:
            raise ConfigError("means", "expected a non-empty list")
        kw["means"] = tuple(_number(f"means[{j}]", v) for j, v in enumerate(data["means"]))
    if data.get("coords") is not None:
        if not isinstance(data["coords"], list):
            raise ConfigError("coords", "expected a list of pairs")
        kw["coords"] = tuple(_pair(f"coords[{j}]", c) for j, c in enumerate(data["coords"]))
    if "sampling_variance" in data:
        kw["sampling_variance"] = _positive("sampling_variance", data["sampling_variance"])
    if "prior" in data:
        kw["prior"] = _parse_prior(data["prior"])
    if "policy" in data:
        kw["policy"] = _parse_section(
            "policy", data["policy"], PolicyConfig, {"K": _positive, "a": _positive, "nu": _nu}
        )
    if "bounds" in data:
        kw["bounds"] = _parse_section("bounds", data["bounds"], BoundsConfig, {"epsilon": _epsilon, "a": _positive})
    if "run" in data:
        kw["run"] = _parse_section(
            "run",
            data["run"],
            RunConfig,
            {"T": lambda k, x: _positive(k, x, True), "runs": lambda k, x: _positive(k, x, True), "seed": _seed},
        )
    cfg = ExperimentConfig(**kw)
    _cross_validate(cfg)
    return cfg


def _cross_validate(cfg: ExperimentConfig):
    if cfg.coords is not None:
        if cfg.means is None:
            raise ConfigError("coords", "coords only apply together with explicit means")
        if len(cfg.coords) != len(cfg.means):
            raise ConfigError("coords", "need one coordinate per mean")
    if cfg.prior.mu0.kind == "patch_aligned" and cfg.means is not None and cfg.prior.variant != "uninformative":
        raise ConfigError("prior.mu0.kind", "patch_aligned needs a surface, not explicit means")
    if cfg.means is None:
        try:
            cfg.surface.spec().validate()
        except BanditError as exc:
            raise ConfigError("surface", str(exc)) from None


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return parse_config({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from None
    return parse_config(text)


def _to_jsonable(x):
    if isinstance(x, tuple):
        return [_to_jsonable(v) for v in x]
    if isinstance(x, dict):
        return {k: _to_jsonable(v) for k, v in x.items()}
    return x


def serialize_config(cfg: ExperimentConfig) -> str:
    d = _to_jsonable(asdict(cfg))
    if d["prior"]["mu0"]["values"] is None:
        del d["prior"]["mu0"]["values"]
    for k in ("means", "coords"):
        if d[k] is None:
            del d[k]
    return json.dumps(d, indent=2, sort_keys=True)


def apply_preset(cfg: ExperimentConfig, preset: str | None) -> ExperimentConfig:
    """Override the prior block with one of the three standard scenarios."""
    if preset is None:
        return cfg
    if preset == "well-informed":
        prior = replace(cfg.prior, mu0=Mu0Config(kind="patch_aligned", high=100.0, other=0.0), length_scale=2.0)
    elif preset == "ill-informed":
        prior = replace(cfg.prior, mu0=Mu0Config(kind="uniform", value=30.0), length_scale=4.0)
    elif preset == "uninformative":
        prior = replace(cfg.prior, variant="uninformative")
    else:
        raise ConfigError("--preset", f"unknown preset {preset!r}; choose from {list(PRESETS)}")
    return replace(cfg, prior=prior)


def with_variant(cfg: ExperimentConfig, variant: str) -> ExperimentConfig:
    return replace(cfg, prior=replace(cfg.prior, variant=_variant("prior.variant", variant)))

