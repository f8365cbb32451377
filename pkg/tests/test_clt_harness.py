"""
Monte Carlo CLT harness: limit covariance, replicate statistics and diagnostics.
"""

import numpy as np
import pytest
from pydantic import ValidationError

from mmclt.analyzer import clt_harness
from mmclt.analyzer.clt_harness import (
    covariance_error_ladder,
    exact_limit_covariance,
    projection_matrix,
    run_clt_experiment,
    run_frechet_clt_experiment,
    run_sup_vs_l2_transport,
)
from mmclt.analyzer.frechet import batch_objective
from mmclt.analyzer.measure import delta_measure, uniform_measure
from mmclt.analyzer.metric_core import random_euclidean_space
from mmclt.analyzer.modified_metric import build_d_eta
from mmclt.errors import HypothesisError, PseudoMetricWarning
from mmclt.models import CltConfig
from mmclt.reporter.json_out import to_jsonable


class TestLimitCovariance:
    """Cov[s, t] of the embedded points under eta."""

    def test_two_point(self, two_point):
        cov = exact_limit_covariance(two_point, uniform_measure(two_point))
        np.testing.assert_allclose(cov, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-15)

    def test_delta_is_zero(self, collinear):
        cov = exact_limit_covariance(collinear, delta_measure(collinear, 1))
        assert np.all(cov == 0.0)

    def test_psd_and_trace(self, cloud20, uniform20):
        cov = exact_limit_covariance(cloud20, uniform20)
        assert np.array_equal(cov, cov.T)
        assert np.linalg.eigvalsh(cov)[0] >= -1e-12
        assert np.diag(cov) @ uniform20.weights <= cloud20.dist.max() ** 2

    def test_d_eta_embedding(self, cloud20, uniform20):
        mm = build_d_eta(cloud20, uniform20)
        cov = exact_limit_covariance(cloud20, uniform20, "d_eta", modified=mm)
        assert cov.shape == (20, 20)


class TestProjections:

    def test_coordinates_first(self):
        A = projection_matrix(20, 10, seed=0)
        assert A.shape == (10, 20)
        for row in A[:5]:
            assert sorted(row.tolist()).count(1.0) == 1
        np.testing.assert_allclose(np.linalg.norm(A, axis=1), 1.0, atol=1e-12)

    def test_seeded(self):
        assert np.array_equal(projection_matrix(7, 6, seed=3), projection_matrix(7, 6, seed=3))


class TestConfig:

    def test_defaults(self):
        cfg = CltConfig()
        assert cfg.n_list == [2000] and cfg.replicates == 500 and cfg.level == 0.01

    @pytest.mark.parametrize(
        "update", [{"replicates": 50}, {"n_list": [100, 50]}, {"n_list": []}, {"level": 1.5}, {"workers": 0}]
    )
    def test_invalid(self, update):
        with pytest.raises(ValidationError):
            CltConfig(**update)


class TestClt:
    """Replicate statistics Z = sqrt(n) (mean - m)."""

    def test_two_point_covariance(self, two_point):
        """n = 2000 with 500 replicates: covariance within 10%, projections pass, both statistics agree."""
        cfg = CltConfig(n_list=[2000], replicates=500, seed=1)
        measure = uniform_measure(two_point)
        plain = run_clt_experiment(two_point, measure, cfg)
        frechet = run_frechet_clt_experiment(two_point, measure, cfg)
        summary = plain.per_n[0]
        assert summary.relative_frobenius_error < 0.1, summary.relative_frobenius_error
        assert summary.fraction_passing >= 0.9, summary.p_values
        assert frechet.frechet_equals_mean_max_gap <= 1e-8, frechet.frechet_equals_mean_max_gap
        assert frechet.scaled_sum_identical is True
        assert to_jsonable(plain.per_n) == to_jsonable(frechet.per_n)

    def test_cloud_projections_pass(self, cloud20, uniform20):
        cfg = CltConfig(n_list=[2000], replicates=500, seed=0)
        summary = run_clt_experiment(cloud20, uniform20, cfg).per_n[0]
        assert summary.tested_projections == 10
        assert summary.fraction_passing >= 0.9, summary.p_values
        assert summary.centered_ok
        assert summary.min_eigenvalue >= -1e-10

    def test_delta_is_degenerate(self, collinear):
        """Every replicate is zero, so every projection is skipped."""
        cfg = CltConfig(n_list=[50], replicates=100, seed=0)
        summary = run_clt_experiment(collinear, delta_measure(collinear, 1), cfg).per_n[0]
        assert np.all(summary.empirical_covariance == 0.0)
        assert summary.relative_frobenius_error == 0.0
        assert summary.skipped_projections == len(summary.p_values)
        assert summary.fraction_passing is None
        assert summary.mean_norm == 0.0 and summary.centered_ok

    def test_deterministic(self, cloud20, uniform20):
        cfg = CltConfig(n_list=[100, 400], replicates=100, seed=5)
        a = run_clt_experiment(cloud20, uniform20, cfg)
        b = run_clt_experiment(cloud20, uniform20, cfg)
        assert to_jsonable(a) == to_jsonable(b)

    def test_workers_match_serial(self, cloud20, uniform20):
        cfg = CltConfig(n_list=[200], replicates=100, seed=2)
        serial = run_clt_experiment(cloud20, uniform20, cfg)
        threaded = run_clt_experiment(cloud20, uniform20, cfg.model_copy(update={"workers": 3}))
        assert to_jsonable(serial.per_n) == to_jsonable(threaded.per_n)

    def test_norm_choice_only_changes_norms(self, cloud20, uniform20):
        cfg = CltConfig(n_list=[200], replicates=100, seed=4)
        sup = run_clt_experiment(cloud20, uniform20, cfg).per_n[0]
        l2 = run_clt_experiment(cloud20, uniform20, cfg.model_copy(update={"norm_choice": "l2"})).per_n[0]
        assert np.array_equal(sup.empirical_covariance, l2.empirical_covariance)
        assert sup.p_values == l2.p_values
        assert l2.average_statistic_norm <= sup.average_statistic_norm + 1e-12

    def test_interpretation_recorded(self, two_point):
        cfg = CltConfig(n_list=[100], replicates=100)
        report = run_clt_experiment(two_point, uniform_measure(two_point), cfg)
        assert "sup norm" in report.interpretation


class TestFrechetClt:
    """The hull Frechet mean statistic is the scaled sum."""

    def test_matches_scaled_sum(self, cloud20, uniform20):
        cfg = CltConfig(n_list=[200, 800], replicates=100, seed=6)
        plain = run_clt_experiment(cloud20, uniform20, cfg)
        frechet = run_frechet_clt_experiment(cloud20, uniform20, cfg)
        assert to_jsonable(plain.per_n) == to_jsonable(frechet.per_n)
        assert frechet.frechet_equals_mean_max_gap <= 1e-8
        assert frechet.scaled_sum_identical is True
        assert frechet.config.statistic == "frechet_mean"

    def test_dispatch_by_statistic(self, two_point):
        cfg = CltConfig(n_list=[100], replicates=100, statistic="frechet_mean")
        report = run_clt_experiment(two_point, uniform_measure(two_point), cfg)
        assert report.frechet_equals_mean_max_gap is not None

    def test_oracle_agrees(self):
        space = random_euclidean_space(10, seed=21)
        cfg = CltConfig(n_list=[30], replicates=100, seed=1, oracle_replicates=3)
        report = run_frechet_clt_experiment(space, uniform_measure(space), cfg)
        assert -1e-8 <= report.oracle_max_gap <= 1e-8
        assert report.frechet_equals_mean_max_gap <= 1e-8

    def test_oracle_on_by_default(self, two_point):
        cfg = CltConfig(n_list=[100], replicates=100)
        assert cfg.oracle_replicates > 0
        report = run_frechet_clt_experiment(two_point, uniform_measure(two_point), cfg)
        assert report.oracle_max_gap is not None
        assert report.frechet_equals_mean_max_gap is not None

    def test_no_oracle_no_gap(self, two_point):
        cfg = CltConfig(n_list=[100], replicates=100, oracle_replicates=0)
        report = run_frechet_clt_experiment(two_point, uniform_measure(two_point), cfg)
        assert report.frechet_equals_mean_max_gap is None
        assert report.oracle_max_gap is None
        assert report.scaled_sum_identical is True

    def test_gap_follows_the_hull_search(self, cloud20, uniform20, monkeypatch):
        """A search that reports an objective 0.5 lower shows up as a 0.5 gap."""

        def lower_by_half(F, items, weights, seed=0, **_):
            return None, batch_objective(items, items.mean(axis=0), weights) - 0.5

        monkeypatch.setattr(clt_harness, "hull_oracle_matrix", lower_by_half)
        cfg = CltConfig(n_list=[50], replicates=100, seed=2, oracle_replicates=4)
        report = run_frechet_clt_experiment(cloud20, uniform20, cfg)
        assert report.frechet_equals_mean_max_gap == pytest.approx(0.5, abs=1e-9)
        assert report.oracle_max_gap == pytest.approx(0.5, abs=1e-9)


class TestTransport:
    """Moving between the d and d_eta embeddings."""

    def test_full_support(self, cloud20, uniform20):
        cfg = CltConfig(n_list=[200], replicates=100, seed=3)
        report = run_sup_vs_l2_transport(cloud20, uniform20, cfg)
        assert report.max_transport_error <= 1e-12
        assert report.pairs_checked == 190
        assert report.statistics_identical
        assert report.claimed_isometry_gap >= 0.0
        assert report.statistic_report.config.metric_choice == "d_eta"

    def test_collapsed_metric_refused(self, equilateral):
        cfg = CltConfig(n_list=[100], replicates=100)
        with pytest.warns(PseudoMetricWarning):
            with pytest.raises(HypothesisError):
                run_sup_vs_l2_transport(equilateral, delta_measure(equilateral, 0), cfg)


class TestLadder:

    def test_error_shrinks_with_replicates(self):
        """Averaged over five seeds, the Frobenius error falls at each rung."""
        space = random_euclidean_space(12, dim=5, seed=3)
        rungs = covariance_error_ladder(space, uniform_measure(space), n=50)
        assert [r for r, _ in rungs] == [100, 400, 1600, 6400]
        errors = [e for _, e in rungs]
        assert all(b < a for a, b in zip(errors, errors[1:])), errors
