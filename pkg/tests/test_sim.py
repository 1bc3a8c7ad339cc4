import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from corrucl.bounds import BoundParams, theorem1_bound
from corrucl.env import BanditInstance, default_surface_spec, exponential_kernel, make_grid_surface
from corrucl.errors import ConfigError
from corrucl.inference import GaussianPrior, init_state
from corrucl.policy import PolicyParams
from corrucl.sim import (
    EnsembleResult,
    Experiment,
    _InvariantMonitor,
    run_ensemble,
    run_episode,
    verify_bounds,
)

THREE = BanditInstance([10.0, 8.0, 5.0], 10.0)


def correlated_line(n=5, lam=2.0):
    coords = [(0.0, float(i)) for i in range(n)]
    return exponential_kernel(coords, 10.0, lam)


class TestEpisode:
    def test_single_arm_zero_regret(self):
        inst = BanditInstance([3.0], 10.0)
        for variant, prior in [
            ("uninformative", GaussianPrior.uninformative_prior(1)),
            ("uncorrelated", GaussianPrior.diagonal([0.0], 10.0)),
            ("correlated", GaussianPrior.diagonal([0.0], 10.0)),
        ]:
            ep = run_episode(inst, prior, PolicyParams(variant=variant), 50, seed=1)
            assert ep.cumulative_regret[-1] == 0.0
            assert ep.counts.tolist() == [50]

    def test_uninformative_samples_each_arm_first(self):
        inst = make_grid_surface(default_surface_spec(), 10.0)
        ep = run_episode(inst, GaussianPrior.uninformative_prior(100), PolicyParams(variant="uninformative"), 120, 3)
        assert sorted(ep.arms[:100].tolist()) == list(range(100))

    @given(seed=st.integers(0, 2**31), variant=st.sampled_from(["uncorrelated", "correlated"]))
    def test_bookkeeping(self, seed, variant):
        prior = GaussianPrior.diagonal([9.0, 9.0, 9.0], 10.0) if variant == "uncorrelated" else GaussianPrior(
            [9.0, 9.0, 9.0], correlated_line(3)
        )
        ep = run_episode(THREE, prior, PolicyParams(variant=variant), 200, seed)
        assert ep.counts.sum() == 200
        np.testing.assert_array_equal(np.bincount(ep.arms, minlength=3), ep.counts)
        assert ep.cumulative_regret[-1] == pytest.approx(float(THREE.gaps @ ep.counts), rel=1e-12)
        np.testing.assert_array_equal(ep.regret, THREE.gaps[ep.arms])
        assert not ep.violations

    def test_deterministic(self):
        prior = GaussianPrior([0.0] * 5, correlated_line())
        inst = BanditInstance([1.0, 2.0, 5.0, 2.0, 0.0], 10.0)
        a = run_episode(inst, prior, PolicyParams(), 300, 11)
        b = run_episode(inst, prior, PolicyParams(), 300, 11)
        np.testing.assert_array_equal(a.arms, b.arms)
        c = run_episode(inst, prior, PolicyParams(), 300, 12)
        assert not np.array_equal(a.arms, c.arms)

    def test_initialization_counted_in_horizon(self):
        ones = np.ones((3, 3))
        block = 100.0 * (ones - 0.0025 * (ones - np.eye(3)))
        cov = np.kron(np.eye(2), block)
        inst = BanditInstance([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 10.0)
        ep = run_episode(inst, GaussianPrior(np.zeros(6), cov), PolicyParams(), 40, 0)
        assert ep.t_init == 2
        assert ep.counts.sum() == 40
        assert ep.post_init_counts.sum() == 38
        assert not ep.violations

    @pytest.mark.parametrize(
        "prior, variant",
        [
            (GaussianPrior.uninformative_prior(3), "correlated"),
            (GaussianPrior.uninformative_prior(3), "uncorrelated"),
            (GaussianPrior.diagonal([0, 0, 0], 1.0), "uninformative"),
            (GaussianPrior([0, 0, 0], np.diag([1.0, 2.0, 3.0])), "uncorrelated"),
            (GaussianPrior.diagonal([0, 0], 1.0), "correlated"),
        ],
    )
    def test_config_mismatch(self, prior, variant):
        with pytest.raises(ConfigError):
            run_episode(THREE, prior, PolicyParams(variant=variant), 10, 0)

    def test_horizon_must_be_positive(self):
        with pytest.raises(ConfigError):
            run_episode(THREE, GaussianPrior.diagonal([0, 0, 0], 1.0), PolicyParams(), 0, 0)


class TestMonitor:
    def _setup(self):
        prior = GaussianPrior([0.0] * 4, correlated_line(4))
        state = init_state(prior, 10.0)
        return state, _InvariantMonitor(state, prior, PolicyParams())

    def test_flags_variance_increase(self):
        state, mon = self._setup()
        state.variances = state.variances * 1.5
        mon.after_update(1, state, np.zeros(4, int), in_init=True)
        assert any(v.kind == "variance-increase" for v in mon.violations)

    def test_flags_upper_bound(self):
        state, mon = self._setup()
        state.counts[:] = 5
        mon.after_update(1, state, np.full(4, 5), in_init=False)
        kinds = {v.kind for v in mon.violations}
        assert "variance-upper-bound" in kinds
        v = next(v for v in mon.violations if v.kind == "variance-upper-bound")
        assert v.step == 1 and "arm" in v.detail

    def test_flags_broken_inverse(self):
        state, mon = self._setup()
        state.Lambda_full = state.Lambda_full * 2
        mon.full_check(7, state)
        assert any(v.kind == "sigma-lambda-inverse" for v in mon.violations)

    def test_clean_state_passes(self):
        state, mon = self._setup()
        mon.after_update(0, state, np.zeros(4, int), in_init=False)
        mon.full_check(0, state)
        assert mon.violations == []


class TestEnsemble:
    def test_one_run_equals_episode(self):
        prior = GaussianPrior.diagonal([9.0, 8.0, 7.0], 10.0)
        params = PolicyParams(variant="uncorrelated")
        ens = run_ensemble(Experiment(THREE, prior, params, 100, 1, seed=5))
        ep = run_episode(THREE, prior, params, 100, 5)
        np.testing.assert_array_equal(ens.mean_cum_regret, ep.cumulative_regret)
        assert np.all(ens.sem == 0)

    def test_repeatable_and_worker_independent(self):
        prior = GaussianPrior([0.0] * 5, correlated_line())
        inst = BanditInstance([1.0, 2.0, 5.0, 2.0, 0.0], 10.0)
        exp = Experiment(inst, prior, PolicyParams(), 150, 4, seed=9)
        a, b, c = run_ensemble(exp), run_ensemble(exp), run_ensemble(exp, workers=2)
        np.testing.assert_array_equal(a.curves, b.curves)
        np.testing.assert_array_equal(a.curves, c.curves)
        assert a.seeds.tolist() == [9, 10, 11, 12]

    def test_mean_and_sem(self):
        prior = GaussianPrior.diagonal([9.0, 8.0, 7.0], 10.0)
        ens = run_ensemble(Experiment(THREE, prior, PolicyParams(variant="uncorrelated"), 200, 100))
        np.testing.assert_allclose(ens.mean_cum_regret, ens.curves.mean(axis=0))
        per_run_sd = ens.curves.std(axis=0, ddof=1)
        assert np.all(ens.sem <= per_run_sd / 10 * (1 + 1e-12))
        np.testing.assert_allclose(ens.mean_counts, ens.counts.mean(axis=0))

    def test_needs_runs(self):
        with pytest.raises(ConfigError):
            run_ensemble(Experiment(THREE, GaussianPrior.uninformative_prior(3), PolicyParams(variant="uninformative"), 5, 0))


class TestVerify:
    def test_trivial_horizon_shape(self):
        prior = GaussianPrior.diagonal(THREE.means, 10.0)
        rep = theorem1_bound(THREE, prior, BoundParams(a=4.0), 1)
        ens = run_ensemble(Experiment(THREE, prior, PolicyParams(a=4.0, variant="uncorrelated"), 1, 3))
        table = verify_bounds(ens, rep)
        assert [r.arm for r in table.rows] == [1, 2]
        assert all(r.bound >= 1 >= r.empirical_n for r in table.rows)
        assert table.passed

    def test_well_informed_diagonal_dominance(self):
        prior = GaussianPrior.diagonal(THREE.means, 10.0)
        rep = theorem1_bound(THREE, prior, BoundParams(a=4.0), 2000)
        ens = run_ensemble(Experiment(THREE, prior, PolicyParams(a=4.0, variant="uncorrelated"), 2000, 500))
        table = verify_bounds(ens, rep)
        assert table.passed, table.rows

    def test_horizon_mismatch(self):
        prior = GaussianPrior.diagonal(THREE.means, 10.0)
        rep = theorem1_bound(THREE, prior, BoundParams(a=4.0), 10)
        ens = run_ensemble(Experiment(THREE, prior, PolicyParams(variant="uncorrelated"), 5, 2))
        with pytest.raises(ConfigError):
            verify_bounds(ens, rep)

    def test_satisfied_rule(self):
        from corrucl.sim import VerificationRow

        assert VerificationRow(0, empirical_n=10.0, sem=1.0, bound=7.0).satisfied
        assert not VerificationRow(0, empirical_n=10.0, sem=1.0, bound=6.9).satisfied
        assert math.isinf(VerificationRow(0, 1.0, 0.0, math.inf).bound)

    def test_ensemble_result_props(self):
        ens = EnsembleResult(np.array([0]), np.zeros((1, 3)), np.zeros((1, 2)), np.zeros((1, 2)), np.zeros(1), [])
        assert ens.runs == 1 and ens.horizon == 3
