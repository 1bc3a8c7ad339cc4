import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrucl.config import (
    ExperimentConfig,
    apply_preset,
    load_config,
    parse_config,
    serialize_config,
    with_variant,
)
from corrucl.errors import ConfigError
from corrucl.policy import DEFAULT_K


def test_empty_object_gives_defaults():
    cfg = parse_config("{}")
    assert cfg == ExperimentConfig()
    assert cfg.sampling_variance == 10.0
    assert cfg.prior.variant == "correlated"
    assert cfg.prior.mu0.kind == "patch_aligned" and cfg.prior.mu0.high == 100.0 and cfg.prior.mu0.other == 0.0
    assert cfg.prior.sigma0_sq == 10.0 and cfg.prior.length_scale == 2.0
    assert cfg.policy.K == DEFAULT_K and cfg.policy.a == 1.0 and cfg.policy.nu == 1.0
    assert cfg.bounds.a == 2.0 and cfg.bounds.epsilon == pytest.approx(1 / math.sqrt(10))
    assert (cfg.run.T, cfg.run.runs, cfg.run.seed) == (5000, 100, 42)


def test_default_resolution():
    cfg = parse_config({})
    inst = cfg.instance()
    prior = cfg.gaussian_prior(inst)
    assert inst.n_arms == 100
    assert set(np.unique(prior.mean)) == {0.0, 100.0}
    assert np.all(prior.mean[inst.means > 30.0] == 100.0)
    assert np.all(np.diag(prior.covariance) == 10.0)


@pytest.mark.parametrize(
    "text, key",
    [
        ('{"policy": {"K": 0}}', "policy.K"),
        ('{"policy": {"nu": 1.5}}', "policy.nu"),
        ('{"bounds": {"epsilon": 1}}', "bounds.epsilon"),
        ('{"run": {"T": 2.5}}', "run.T"),
        ('{"run": {"seed": -1}}', "run.seed"),
        ('{"sampling_variance": -1}', "sampling_variance"),
        ('{"prior": {"variant": "bayes"}}', "prior.variant"),
        ('{"prior": {"sigma0_sq": 0}}', "prior.sigma0_sq"),
        ('{"prior": {"mu0": {"kind": "wild"}}}', "prior.mu0.kind"),
        ('{"prior": {"colour": 1}}', "prior.colour"),
        ('{"bogus": 1}', "bogus"),
        ('{"surface": {"rows": 0}}', "surface.rows"),
        ('{"surface": {"patches": [{"center": [0, 0], "radius": -1, "value": 1}]}}', "surface.patches[0].radius"),
        ('{"surface": {"patches": [{"center": [0, 0], "radius": 1}]}}', "surface.patches[0].value"),
        ('{"means": [1, 2], "coords": [[0, 0]]}', "coords"),
        ('{"means": [1, 2]}', "prior.mu0.kind"),
        ("{not json", "<json>"),
        ("[1, 2]", "<root>"),
    ],
)
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.key == key
    assert str(info.value).startswith(key)


def test_confidence_from_sigma0():
    cfg = parse_config({"prior": {"variant": "uncorrelated", "sigma0_sq": 10}})
    prior = cfg.gaussian_prior(cfg.instance())
    assert prior.confidence(cfg.sampling_variance) == 1.0


def test_explicit_means_and_mu0():
    cfg = parse_config(
        {"means": [10, 8, 5], "prior": {"variant": "uncorrelated", "mu0": {"kind": "explicit", "values": [7, 11, 8]}}}
    )
    inst = cfg.instance()
    assert inst.means.tolist() == [10, 8, 5]
    assert cfg.gaussian_prior(inst).mean.tolist() == [7, 11, 8]
    with pytest.raises(ConfigError):
        parse_config({"means": [1, 2], "prior": {"mu0": {"kind": "explicit", "values": [1]}}}).gaussian_prior(
            inst
        )


def test_presets():
    base = parse_config({})
    well = apply_preset(base, "well-informed")
    assert well.prior.mu0.kind == "patch_aligned" and well.prior.length_scale == 2.0
    ill = apply_preset(base, "ill-informed")
    assert ill.prior.mu0.kind == "uniform" and ill.prior.mu0.value == 30.0 and ill.prior.length_scale == 4.0
    assert np.all(ill.gaussian_prior(ill.instance()).mean == 30.0)
    assert apply_preset(base, "uninformative").prior.variant == "uninformative"
    assert apply_preset(base, None) is base
    with pytest.raises(ConfigError):
        apply_preset(base, "lucky")
    assert with_variant(base, "uncorrelated").gaussian_prior(base.instance()).is_diagonal


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{"run": {"T": 7}}')
    assert load_config(p).run.T == 7
    assert load_config(None) == ExperimentConfig()
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_round_trip_defaults():
    cfg = parse_config({})
    assert parse_config(serialize_config(cfg)) == cfg
    assert json.loads(serialize_config(cfg))["run"]["seed"] == 42


@given(
    T=st.integers(1, 10**6),
    runs=st.integers(1, 1000),
    seed=st.integers(0, 2**32),
    nu=st.floats(0.01, 1.0),
    eps=st.floats(0.01, 0.99),
    length=st.floats(0.1, 100),
    variant=st.sampled_from(["uninformative", "uncorrelated", "correlated"]),
    base=st.floats(-100, 100),
    profile=st.sampled_from(["flat", "cone"]),
)
def test_round_trip_property(T, runs, seed, nu, eps, length, variant, base, profile):
    cfg = parse_config(
        {
            "surface": {"rows": 3, "cols": 4, "base": base, "patches": [
                {"center": [1, 1], "radius": 1.5, "value": base + 1, "profile": profile}
            ]},
            "prior": {"variant": variant, "length_scale": length, "mu0": {"kind": "uniform", "value": base}},
            "policy": {"nu": nu},
            "bounds": {"epsilon": eps},
            "run": {"T": T, "runs": runs, "seed": seed},
        }
    )
    assert parse_config(serialize_config(cfg)) == cfg


def test_round_trip_explicit():
    cfg = parse_config(
        {
            "means": [1.5, 2.0],
            "coords": [[0, 0], [3, 4]],
            "prior": {"variant": "uncorrelated", "mu0": {"kind": "explicit", "values": [0, 1]}},
        }
    )
    assert parse_config(serialize_config(cfg)) == cfg


def test_experiment_policy_override():
    cfg = parse_config({"run": {"T": 3, "runs": 2}})
    assert cfg.experiment().policy.a == 1.0
    assert cfg.experiment(policy_a=4.0).policy.a == 4.0
