import math

import numpy as np
import pytest

from boundaryfdr.asymptotics import (
    DegenerateSolutionError,
    PopulationModel,
    avg_cdf,
    boundary_lfdr_limit,
    convergence_probe,
    empirical_two_stage_thresholds,
    population_thresholds,
)
from boundaryfdr.lfdr import AltConfig, true_lfdr
from boundaryfdr.procedures import sl, tssl
from boundaryfdr.core import PValueSample
from boundaryfdr.simgen import SimConfig, sample_pvalues

ALT_075 = PopulationModel(AltConfig("alternating", 0.75))


class TestAvgCdf:
    def test_all_null_mixture(self):
        model = PopulationModel(AltConfig("alternating", 1.0))
        for t in (0.0, 0.3, 1.0):
            F, f = avg_cdf(model, t)
            assert F == pytest.approx(t)
            assert f == 1.0

    def test_density_infinite_at_origin(self):
        F, f = avg_cdf(ALT_075, 0.0)
        assert F == 0.0
        assert f == math.inf

    def test_known_value(self):
        F, f = avg_cdf(ALT_075, 0.05)
        assert f == pytest.approx(1.1685847, abs=1e-6)

    def test_cdf_endpoints_and_monotonicity(self):
        grid = np.linspace(0, 1, 200)
        values = [ALT_075.cdf(t) for t in grid]
        assert values[0] == 0.0
        assert values[-1] == 1.0
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_cdf_matches_density_by_finite_differences(self):
        for t in (0.01, 0.05, 0.2, 0.6):
            h = 1e-7
            fd = (ALT_075.cdf(t + h) - ALT_075.cdf(t - h)) / (2 * h)
            assert fd == pytest.approx(ALT_075.pdf(t), rel=1e-5)


class TestPopulationThresholds:
    def test_degenerate_for_all_null(self):
        with pytest.raises(DegenerateSolutionError):
            population_thresholds(PopulationModel(AltConfig("alternating", 1.0)), 0.2)

    def test_stationarity_condition(self):
        for q in (0.1, 0.2, 0.3):
            t1, t2 = population_thresholds(ALT_075, q)
            assert ALT_075.pdf(t1) == pytest.approx(1 / q, abs=1e-8)
            c2 = (1 - ALT_075.cdf(t1)) / q
            assert ALT_075.pdf(t2) == pytest.approx(c2, abs=1e-8)

    def test_known_stage1_threshold(self):
        # bisection oracle on the monotone density gives 0.0039003
        t1, _ = population_thresholds(ALT_075, 0.2)
        assert t1 == pytest.approx(0.00390030, abs=1e-6)

    def test_stage2_never_smaller(self):
        for pi0 in (0.25, 0.5, 0.75):
            for q in (0.1, 0.2, 0.3):
                model = PopulationModel(AltConfig("alternating", pi0))
                t1, t2 = population_thresholds(model, q)
                assert t2 >= t1


class TestBoundaryLfdrLimit:
    def test_below_inflated_bound(self):
        for kind in ("alternating", "all_at_5"):
            for pi0 in (0.25, 0.5, 0.75):
                for q in (0.1, 0.2, 0.3):
                    model = PopulationModel(AltConfig(kind, pi0))
                    limit = boundary_lfdr_limit(model, q)
                    assert limit <= q / (1 - q)
                    assert limit >= q * pi0

    def test_vanishes_with_pi0(self):
        model = PopulationModel(AltConfig("alternating", 0.001))
        assert boundary_lfdr_limit(model, 0.2) < 0.01


class TestEmpiricalThresholds:
    def test_tau1_equals_sl_threshold(self):
        rng = np.random.default_rng(31)
        for _ in range(400):
            values = rng.uniform(size=rng.integers(1, 21))
            for q in (0.1, 0.2, 0.4):
                tau1, _ = empirical_two_stage_thresholds(values, q)
                assert tau1 == sl(PValueSample(values), q).threshold

    def test_tau2_equals_two_stage_threshold(self):
        rng = np.random.default_rng(32)
        hits = 0
        for _ in range(500):
            values = rng.uniform(size=rng.integers(2, 21)) ** 2
            outcome = tssl(PValueSample(values), 0.2)
            r1 = outcome.stage_trace["r1"]
            if 0 < r1 < values.size:
                hits += 1
                _, tau2 = empirical_two_stage_thresholds(values, 0.2)
                assert tau2 == outcome.threshold
        assert hits > 50

    def test_all_ones(self):
        assert empirical_two_stage_thresholds(np.ones(5), 0.2) == (0.0, 0.0)


class TestConvergenceProbe:
    def test_refuses_degenerate_mixture(self):
        with pytest.raises(DegenerateSolutionError):
            convergence_probe(PopulationModel(AltConfig("alternating", 1.0)), 0.2, [16], 1)

    def test_single_replication_deterministic(self):
        rows1 = convergence_probe(ALT_075, 0.2, [256], 1, seed=3)
        rows2 = convergence_probe(ALT_075, 0.2, [256], 1, seed=3)
        assert rows1 == rows2
        assert rows1[0]["m"] == 256

    def test_gap_definition(self):
        rows = convergence_probe(ALT_075, 0.2, [256], 1, seed=4)
        sim = SimConfig(m=256, pi0=0.75, kind="alternating", seed=4)
        sample = sample_pvalues(sim, 0)
        _, tau2 = empirical_two_stage_thresholds(sample.values, 0.2)
        expected = abs(
            true_lfdr(AltConfig("alternating", 0.75), tau2)
            - boundary_lfdr_limit(ALT_075, 0.2)
        )
        assert rows[0]["mean_gap"] == pytest.approx(expected)
