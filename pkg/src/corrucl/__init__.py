"""Upper-credible-limit bandit policies with correlated Gaussian priors.

Simulates the uninformative, uncorrelated and correlated UCL policies on
spatial Gaussian bandits and evaluates their finite-horizon regret bounds.
"""

from .bounds import (
    BoundParams,
    BoundReport,
    check_lemma1,
    check_lemma2,
    lai_robbins_lower_bound,
    theorem1_bound,
    theorem2_bound,
)
from .config import ExperimentConfig, apply_preset, load_config, parse_config, serialize_config
from .env import BanditInstance, RewardSurfaceSpec, exponential_kernel, make_grid_surface
from .errors import BanditError, ConfigError
from .inference import GaussianPrior, batch_posterior, information_update, init_state
from .policy import PolicyParams, select_arm
from .sim import Experiment, run_ensemble, run_episode, verify_bounds

__version__ = "0.1.0"

__all__ = [
    "BanditError",
    "BanditInstance",
    "BoundParams",
    "BoundReport",
    "ConfigError",
    "Experiment",
    "ExperimentConfig",
    "GaussianPrior",
    "PolicyParams",
    "RewardSurfaceSpec",
    "apply_preset",
    "batch_posterior",
    "check_lemma1",
    "check_lemma2",
    "exponential_kernel",
    "information_update",
    "init_state",
    "lai_robbins_lower_bound",
    "load_config",
    "make_grid_surface",
    "parse_config",
    "run_ensemble",
    "run_episode",
    "select_arm",
    "serialize_config",
    "theorem1_bound",
    "theorem2_bound",
    "verify_bounds",
]
