import numpy as np
import pytest
from scipy.special import ndtri
from scipy.stats import kstest

from boundaryfdr.core import ConfigurationError, ValidationError
from boundaryfdr.simgen import SimConfig, mean_vector, sample_pvalues


class TestMeanVector:
    def test_alternating(self):
        mu = mean_vector(SimConfig(m=8, pi0=0.5))
        np.testing.assert_allclose(mu, [1.25, 2.5, 3.75, 5.0, 0, 0, 0, 0])

    def test_all_at_5(self):
        mu = mean_vector(SimConfig(m=8, pi0=0.75, kind="all_at_5"))
        np.testing.assert_allclose(mu, [5.0, 5.0, 0, 0, 0, 0, 0, 0])

    def test_all_null(self):
        for kind in ("alternating", "all_at_5"):
            assert not mean_vector(SimConfig(m=6, pi0=1.0, kind=kind)).any()

    def test_alternating_cycles(self):
        mu = mean_vector(SimConfig(m=16, pi0=0.5))
        np.testing.assert_allclose(mu[:8], [1.25, 2.5, 3.75, 5.0] * 2)

    def test_non_multiple_of_four_rejected(self):
        with pytest.raises(ConfigurationError):
            mean_vector(SimConfig(m=10, pi0=0.5))

    def test_paper_grid_sizes_are_valid(self):
        for m in (16, 64, 256):
            for pi0 in (0.25, 0.5, 0.75):
                mu = mean_vector(SimConfig(m=m, pi0=pi0))
                assert np.sum(mu == 0) == round(pi0 * m)


class TestSampling:
    def test_determinism(self):
        config = SimConfig(m=32, pi0=0.75, rho=0.3, seed=99)
        a = sample_pvalues(config, 7)
        b = sample_pvalues(config, 7)
        np.testing.assert_array_equal(a.values, b.values)
        np.testing.assert_array_equal(a.truth, b.truth)

    def test_replications_differ(self):
        config = SimConfig(m=32, pi0=0.75, seed=99)
        assert not np.array_equal(
            sample_pvalues(config, 0).values, sample_pvalues(config, 1).values
        )

    def test_truth_marks_nulls(self):
        config = SimConfig(m=16, pi0=0.75)
        s = sample_pvalues(config, 0)
        assert s.truth is not None
        assert s.truth.sum() == 12
        assert not s.truth[:4].any()

    def test_rho_one_duplicates_null_pvalues(self):
        config = SimConfig(m=16, pi0=1.0, rho=1.0, seed=5)
        s = sample_pvalues(config, 3)
        assert np.unique(s.values).size == 1

    def test_null_marginals_uniform_independent(self):
        # with rho=0 all draws are i.i.d., so pooling across replications
        # gives a valid KS test on 1e5 values
        config = SimConfig(m=100, pi0=1.0, rho=0.0, seed=11)
        draws = np.concatenate(
            [sample_pvalues(config, rep).values for rep in range(1000)]
        )
        assert draws.size == 100000
        assert kstest(draws, "uniform").pvalue > 1e-3

    def test_null_marginals_uniform_correlated(self):
        # under equicorrelation only one coordinate per replication is
        # independent across replications
        config = SimConfig(m=4, pi0=1.0, rho=0.5, seed=12)
        draws = np.array(
            [sample_pvalues(config, rep).values[0] for rep in range(30000)]
        )
        assert kstest(draws, "uniform").pvalue > 1e-3

    def test_pairwise_correlation_matches_rho(self):
        config = SimConfig(m=2, pi0=1.0, rho=0.5, seed=13)
        z = np.empty((100000, 2))
        for rep in range(z.shape[0]):
            # invert the probability transform to recover the z-scores
            z[rep] = -ndtri(sample_pvalues(config, rep).values)
        corr = np.corrcoef(z[:, 0], z[:, 1])[0, 1]
        assert corr == pytest.approx(0.5, abs=0.02)

    def test_invalid_config(self):
        with pytest.raises(ValidationError):
            SimConfig(m=0, pi0=0.5)
        with pytest.raises(ValidationError):
            SimConfig(m=8, pi0=1.5)
        with pytest.raises(ValidationError):
            SimConfig(m=8, pi0=0.5, rho=2.0)
        with pytest.raises(ValidationError):
            sample_pvalues(SimConfig(m=8, pi0=0.5), -1)
