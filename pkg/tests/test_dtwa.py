"""DTWA sampling, kick/field kernels, reduction, and determinism tests."""

import numpy as np
import pytest

from kickedspin import ModelParams
from kickedspin.classical import classical_trajectory
from kickedspin.dtwa import (dtwa_free_step, dtwa_kick, dtwa_order_parameter,
                             kick_angles, order_parameter_per_l,
                             sample_initial, smoothed_dtwa_kick)


def params_for(two_l=2, N=10, **kw):
    base = dict(h=0.1, K=0.3, tau=0.6, phi=np.pi, J=1.0)
    base.update(kw)
    return ModelParams(two_l=two_l, N=N, **base)


class TestSampling:
    def test_paired_locks_transverse_signs(self):
        spins = sample_initial(20, 3, np.random.default_rng(0), "paired")
        assert spins.shape == (20, 3, 3)
        assert np.array_equal(spins[:, :, 0], spins[:, :, 1])
        assert (spins[:, :, 2] == 1.0).all()
        assert set(np.unique(spins[:, :, 0])) == {-1.0, 1.0}

    def test_independent_draws_both_signs(self):
        spins = sample_initial(200, 2, np.random.default_rng(1), "independent")
        # with 800 spins the x and y signs cannot all coincide
        assert not np.array_equal(spins[:, :, 0], spins[:, :, 1])
        assert (np.abs(spins[:, :, :2]) == 1.0).all()

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            sample_initial(2, 2, np.random.default_rng(0), "gaussian")


class TestKick:
    def test_matches_smoothed_oracle(self):
        p = params_for(two_l=3, N=4, K=0.5, phi=0.8 * np.pi)
        spins = sample_initial(4, 3, np.random.default_rng(3), "independent")
        dev = np.abs(dtwa_kick(spins, p) - smoothed_dtwa_kick(spins, p))
        assert dev.max() < 1e-6

    def test_angles_exclude_own_site(self):
        p = params_for(two_l=1, N=2, K=1.0)
        spins = sample_initial(2, 1, np.random.default_rng(5), "paired")
        theta = kick_angles(spins, p)
        x_site = spins[:, :, 0].sum(axis=1)
        ck = p.K / (2.0 * p.N * p.two_l)
        np.testing.assert_allclose(theta, p.phi - ck * x_site[::-1])

    def test_conserves_sx(self):
        p = params_for(two_l=2, N=5, K=0.7)
        spins = sample_initial(5, 2, np.random.default_rng(8), "paired")
        out = dtwa_kick(spins, p)
        assert np.array_equal(out[:, :, 0], spins[:, :, 0])

    def test_pure_pi_kick_flips_exactly(self):
        p = params_for(K=0.0)
        spins = sample_initial(10, 2, np.random.default_rng(2), "paired")
        out = dtwa_kick(spins, p)
        assert np.array_equal(out[:, :, 2], -spins[:, :, 2])


class TestFreeStep:
    def test_preserves_spin_length(self):
        p = params_for(two_l=3, N=6)
        spins = sample_initial(6, 3, np.random.default_rng(4), "paired")
        for _ in range(50):
            spins = dtwa_free_step(spins, p, 0.006)
        np.testing.assert_allclose((spins ** 2).sum(axis=2), 3.0, atol=1e-9)

    def test_self_field_changes_dynamics_at_single_spin_sites(self):
        # two_l=1 leaves the m' != m sum empty, so the self term is the
        # whole longitudinal field
        p = params_for(two_l=1, N=3, h=0.3)
        spins = sample_initial(3, 1, np.random.default_rng(6), "paired")
        excl = dtwa_free_step(spins, p, 0.01, include_self_field=False)
        incl = dtwa_free_step(spins, p, 0.01, include_self_field=True)
        assert np.abs(excl - incl).max() > 1e-6


class TestOrderParameter:
    def test_starts_at_one(self):
        spins = sample_initial(7, 4, np.random.default_rng(0), "paired")
        assert order_parameter_per_l(spins, 0) == 1.0

    def test_alternating_sign(self):
        spins = sample_initial(7, 4, np.random.default_rng(0), "paired")
        assert order_parameter_per_l(spins, 1) == -1.0


class TestMonteCarloDriver:
    def test_trivial_flip_is_exact(self):
        # acceptance contract: the pi-aware rotation keeps the plateau
        # bit-exact, not merely within tolerance
        rec = dtwa_order_parameter(params_for(h=0.0, K=0.0), 100, n_r=50)
        assert (rec.values == 1.0).all()
        assert (rec.errors == 0.0).all()

    def test_uncoupled_precession_matches_closed_form(self):
        # J=0, K=0: every spin precesses about x; the ensemble mean of the
        # folded order parameter is cos(2 h tau n)
        p = params_for(two_l=2, N=10, J=0.0, K=0.0, h=0.2)
        rec = dtwa_order_parameter(p, 40, n_r=400, seed=9)
        n = np.arange(41)
        np.testing.assert_allclose(rec.values, np.cos(2.0 * p.h * p.tau * n),
                                   atol=0.05)

    def test_full_engine_matches_reduced(self):
        p = params_for(two_l=3, N=8, K=0.4)
        red = dtwa_order_parameter(p, 60, n_r=30, seed=11)
        full = dtwa_order_parameter(p, 60, n_r=30, seed=11, engine="full")
        np.testing.assert_allclose(full.values, red.values, atol=1e-9)

    def test_worker_count_is_bit_invariant(self):
        p = params_for(two_l=2, N=12, K=0.6)
        one = dtwa_order_parameter(p, 50, n_r=75, seed=13, workers=1)
        four = dtwa_order_parameter(p, 50, n_r=75, seed=13, workers=4)
        assert np.array_equal(one.values, four.values)
        assert np.array_equal(one.errors, four.errors)

    def test_error_bars_shrink_with_root_n(self):
        p = params_for(two_l=3, N=10, h=0.2)
        small = dtwa_order_parameter(p, 80, n_r=50, seed=17)
        big = dtwa_order_parameter(p, 80, n_r=200, seed=17)
        ratio = np.median(small.errors[1:] / big.errors[1:])
        assert 1.5 < ratio < 2.6

    def test_site_split_subsets_recombine(self):
        p = params_for(two_l=2, N=9, K=0.5)
        rec = dtwa_order_parameter(p, 30, n_r=40, seed=19, site_split=4)
        a = rec.meta["subset_a"].values
        b = rec.meta["subset_b"].values
        np.testing.assert_allclose((4 * a + 5 * b) / 9.0, rec.values,
                                   atol=1e-12)

    def test_short_time_tracks_classical_at_large_l(self):
        # the 2l -> infinity limit of the factorized equations is the
        # classical chain; at 2l=8 the first kicks already agree closely
        p = params_for(two_l=8, N=10, K=0.5)
        rec = dtwa_order_parameter(p, 10, n_r=200, seed=23)
        ref = classical_trajectory(p, 10)
        assert np.abs(rec.values - ref.values).max() < 0.05

    def test_guards(self):
        p = params_for()
        with pytest.raises(ValueError):
            dtwa_order_parameter(p, 5, n_r=1)
        with pytest.raises(ValueError):
            dtwa_order_parameter(p, 5, n_r=8, engine="magic")
        with pytest.raises(ValueError):
            dtwa_order_parameter(p, 5, n_r=8, sampling="gaussian")
        with pytest.raises(ValueError):
            dtwa_order_parameter(p, 5, n_r=8, sampling="independent")
        with pytest.raises(ValueError):
            dtwa_order_parameter(p, 5, n_r=8, site_split=11)
