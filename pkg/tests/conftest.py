import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


def random_spd(rng: np.random.Generator, n: int, scale: float = 10.0) -> np.ndarray:
    """Well-conditioned random SPD matrix."""
    a = rng.normal(size=(n, n))
    m = a @ a.T / n + 0.5 * np.eye(n)
    return scale * m / np.mean(np.diag(m))


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)
