"""Sampling determinism, moment estimation, and the exact moment oracle."""

import math

import numpy as np
import pytest

from qrdro.distributions import (
    Beta,
    Empirical,
    Lognormal,
    SampleSet,
    Uniform,
    estimate_moments,
    load_samples,
    sample,
    save_samples,
    solver_support,
    true_moments,
)


class TestSampling:
    def test_deterministic_under_fixed_seed(self):
        a = sample(Uniform(0, 1), 3, 42)
        b = sample(Uniform(0, 1), 3, 42)
        assert np.array_equal(a.values, b.values)

    def test_distinct_seeds_distinct_streams(self):
        a = sample(Uniform(0, 1), 100, 1)
        b = sample(Uniform(0, 1), 100, 2)
        assert not np.array_equal(a.values, b.values)

    def test_seed_paths_are_substreams(self):
        a = sample(Uniform(0, 1), 10, (7, 0, 0))
        b = sample(Uniform(0, 1), 10, (7, 1, 0))
        assert not np.array_equal(a.values, b.values)

    def test_lognormal_mean_calibration(self):
        # exact mean is exp(log_mean + log_std^2 / 2) ~ 0.4995, close to the
        # 0.5 of a uniform on [0, 1]
        s = sample(Lognormal(-0.84, 0.54), 1_000_000, 3)
        exact = math.exp(-0.84 + 0.54**2 / 2)
        se = s.values.std(ddof=1) / math.sqrt(s.values.size)
        assert abs(s.values.mean() - exact) < 3 * se
        assert exact == pytest.approx(0.4995, abs=5e-4)

    def test_lognormal_variance_calibration(self):
        # calibrated to roughly match the variance 1/12 of a uniform on [0, 1]
        m = true_moments(Lognormal(-0.84, 0.54))
        exact_mean = math.exp(-0.84 + 0.54**2 / 2)
        var = exact_mean**2 * (math.exp(0.54**2) - 1.0)
        assert var == pytest.approx(1.0 / 12.0, rel=0.02)
        assert m.mean == pytest.approx(exact_mean, abs=1e-8)

    def test_beta_mean(self):
        s = sample(Beta(2, 5), 1_000_000, 4)
        se = s.values.std(ddof=1) / math.sqrt(s.values.size)
        assert abs(s.values.mean() - 2.0 / 7.0) < 3 * se

    def test_empirical_resamples_support(self):
        s = sample(Empirical((0.25, 0.5, 1.0)), 50, 5)
        assert set(np.unique(s.values)) <= {0.25, 0.5, 1.0}

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            Uniform(1.0, 1.0)
        with pytest.raises(ValueError):
            Lognormal(0.0, 0.0)
        with pytest.raises(ValueError):
            Beta(0.0, 1.0)
        with pytest.raises(ValueError):
            Empirical(())
        with pytest.raises(ValueError):
            sample(Uniform(0, 1), 0, 1)


class TestMoments:
    def test_estimate_examples(self):
        m = estimate_moments(SampleSet(np.array([0.0, 1.0])))
        assert (m.mean, m.mad) == (0.5, 0.5)
        m = estimate_moments(SampleSet(np.array([0.3, 0.3, 0.3])))
        assert (m.mean, m.mad) == pytest.approx((0.3, 0.0), abs=1e-15)
        m = estimate_moments(SampleSet(np.array([0.0, 0.5, 1.0])))
        assert (m.mean, m.mad) == pytest.approx((0.5, 1.0 / 3.0), abs=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            estimate_moments(np.array([]))

    def test_uniform_convergence(self):
        s = sample(Uniform(0, 1), 100_000, 6)
        m = estimate_moments(s)
        n = s.values.size
        se_mean = 1.0 / math.sqrt(12.0 * n)
        # |Y - 1/2| is uniform on [0, 1/2]: sd = 1 / (4 sqrt(3))
        se_mad = 1.0 / (4.0 * math.sqrt(3.0) * math.sqrt(n))
        assert abs(m.mean - 0.5) < 3 * se_mean
        assert abs(m.mad - 0.25) < 3 * se_mad

    def test_mad_at_most_half_range(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            vals = rng.uniform(0.0, 5.0, rng.integers(2, 40))
            m = estimate_moments(SampleSet(vals))
            assert m.mad <= (vals.max() - vals.min()) / 2.0 + 1e-12


class TestTrueMoments:
    def test_uniform_closed_form(self):
        m = true_moments(Uniform(0, 1))
        assert (m.mean, m.mad) == (0.5, 0.25)

    def test_degenerate_uniform_rejected(self):
        with pytest.raises(ValueError):
            true_moments(Uniform(0.3, 0.3))

    def test_beta_closed_form_mean(self):
        m = true_moments(Beta(2, 5))
        assert m.mean == pytest.approx(2.0 / 7.0, abs=1e-10)
        # quadrature cross-check on a huge sample
        s = sample(Beta(2, 5), 400_000, 8)
        mad_hat = np.abs(s.values - s.values.mean()).mean()
        assert m.mad == pytest.approx(mad_hat, abs=3e-3)


class TestSolverSupport:
    def test_bounded_families_keep_their_support(self):
        assert solver_support(Uniform(0, 1)) == (0.0, 1.0)
        assert solver_support(Beta(2, 5)) == (0.0, 1.0)

    def test_unbounded_cap_rule(self):
        s = SampleSet(np.array([0.2, 0.9]))
        assert solver_support(Lognormal(-0.84, 0.54), s) == (0.0, pytest.approx(2.7))
        small = SampleSet(np.array([0.1, 0.2]))
        assert solver_support(Lognormal(-0.84, 0.54), small) == (0.0, 1.0)


class TestTextRoundTrip:
    def test_save_load(self, tmp_path):
        s = sample(Lognormal(-0.84, 0.54), 25, 9)
        path = tmp_path / "samples.txt"
        save_samples(s, path)
        loaded = load_samples(path)
        assert np.array_equal(loaded.values, s.values)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("\n")
        with pytest.raises(ValueError):
            load_samples(path)
