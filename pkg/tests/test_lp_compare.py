"""
L^p(eta) distances between embedded points and the explicit equivalence constants.
"""

import math

import numpy as np
import pytest

from mmclt.analyzer.lp_compare import (
    check_sandwich,
    dp_distance,
    dp_matrix,
    estimate_assumption_constants,
    exceptional_set_mass,
    largest_feasible_D,
    nesting_check,
)
from mmclt.analyzer.measure import delta_measure, measure_from_weights, uniform_measure
from mmclt.analyzer.metric_core import random_euclidean_space, unit_square_grid
from mmclt.analyzer.modified_metric import build_d_eta
from mmclt.errors import HypothesisError
from mmclt.models import LpAssumptionEstimate
from mmclt.utils.rng import make_generator

INF = float("inf")


class TestDistances:
    """d_p(x, y) = ||f_x - f_y||_{L^p(eta)}."""

    def test_zero_on_diagonal(self, cloud20, uniform20):
        for p in (1.0, 2.0, 3.5, INF):
            assert dp_distance(cloud20, uniform20, p, 4, 4) == 0.0

    def test_p2_is_d_eta(self, cloud20):
        """The p = 2 matrix is bit-for-bit the modified metric."""
        measure = measure_from_weights(cloud20, make_generator(1).random(cloud20.n) + 0.1)
        assert np.array_equal(dp_matrix(cloud20, measure, 2.0), build_d_eta(cloud20, measure).dist_eta)

    def test_sup_is_d_under_full_support(self, cloud20, uniform20):
        """With full support the sup over the support recovers d."""
        np.testing.assert_allclose(dp_matrix(cloud20, uniform20, INF), cloud20.dist, atol=1e-15)

    def test_holder_monotone(self):
        """d_1 <= d_2 <= d_inf for probability measures."""
        space = random_euclidean_space(30, dim=2, seed=9)
        measure = measure_from_weights(space, make_generator(9).random(space.n) + 0.05)
        d1, d2, dinf = (dp_matrix(space, measure, p) for p in (1.0, 2.0, INF))
        assert np.all(d1 <= d2 + 1e-12)
        assert np.all(d2 <= dinf + 1e-12)

    def test_p_below_one(self, two_point):
        with pytest.raises(ValueError):
            dp_distance(two_point, uniform_measure(two_point), 0.5, 0, 1)


class TestExceptionalSet:
    """S_xy(D) = {z : |d(x,z) - d(y,z)| <= D d(x,y)}."""

    @pytest.mark.parametrize("D", [0.1, 0.5, 0.9])
    def test_two_point_empty(self, two_point, D):
        """Both points separate x and y perfectly."""
        assert exceptional_set_mass(two_point, uniform_measure(two_point), D, 0, 1) == 0.0

    def test_delta_on_equidistant_point(self, equilateral):
        """All mass sits on a point equidistant from 1 and 2."""
        assert exceptional_set_mass(equilateral, delta_measure(equilateral, 0), 0.3, 1, 2) == 1.0

    def test_limit_excludes_x_and_y(self, cloud20, uniform20):
        """As D -> 1 the set grows but never contains x or y themselves."""
        mass = exceptional_set_mass(cloud20, uniform20, 1.0 - 1e-12, 0, 1)
        assert mass <= 1.0 - uniform20.weights[0] - uniform20.weights[1] + 1e-15

    def test_collinear_middle(self, collinear):
        mass = exceptional_set_mass(collinear, uniform_measure(collinear), 0.5, 0, 2)
        assert mass == pytest.approx(1 / 3, abs=1e-15)

    @pytest.mark.parametrize("D", [0.0, 1.0, -0.2])
    def test_D_range(self, two_point, D):
        with pytest.raises(ValueError):
            exceptional_set_mass(two_point, uniform_measure(two_point), D, 0, 1)

    def test_same_point(self, two_point):
        with pytest.raises(ValueError):
            exceptional_set_mass(two_point, uniform_measure(two_point), 0.5, 1, 1)


class TestAssumptionConstants:
    """C(D) as the worst exceptional mass over pairs."""

    @pytest.fixture
    def grid40(self):
        space = unit_square_grid(8, 5)
        return space, uniform_measure(space)

    def test_two_point_holds_everywhere(self, two_point):
        for est in estimate_assumption_constants(two_point, uniform_measure(two_point)):
            assert est.C == 0.0 and est.holds

    def test_delta_fails(self, equilateral):
        for est in estimate_assumption_constants(equilateral, delta_measure(equilateral, 0)):
            assert est.C == 1.0
            assert not est.holds
            assert est.worst_pair == (1, 2)

    def test_C_non_decreasing(self, grid40):
        space, measure = grid40
        Cs = [e.C for e in estimate_assumption_constants(space, measure, [0.05, 0.1, 0.2, 0.3, 0.5, 0.8])]
        assert all(a <= b for a, b in zip(Cs, Cs[1:])), Cs

    def test_grid_has_feasible_D(self, grid40):
        space, measure = grid40
        assert any(e.holds for e in estimate_assumption_constants(space, measure))

    def test_largest_feasible_D(self, grid40):
        space, measure = grid40
        best = largest_feasible_D(space, measure, c_max=0.5)
        assert best is not None
        assert best.C <= 0.5
        above = estimate_assumption_constants(space, measure, [min(best.D + 1e-5, 1.0 - 1e-12)])[0]
        assert best.D >= 1.0 - 1e-6 or above.C > 0.5

    def test_largest_feasible_D_infeasible(self, equilateral):
        assert largest_feasible_D(equilateral, delta_measure(equilateral, 0)) is None


class TestSandwich:
    """D (1 - C)^(1/p) d_p' <= d_p <= d_p'."""

    @pytest.mark.parametrize("p,q", [(1.0, INF), (2.0, INF), (1.0, 2.0)])
    def test_grid_no_violations(self, p, q):
        space = unit_square_grid(8, 5)
        measure = uniform_measure(space)
        est = max((e for e in estimate_assumption_constants(space, measure) if e.holds), key=lambda e: e.D)
        report = check_sandwich(space, measure, p, q, est)
        assert report.ok, report.violations[:5]
        assert report.max_violation == 0.0
        assert len(report.rows) == space.n * (space.n - 1) // 2
        assert all(r.lower_bound <= r.d_p + 1e-12 for r in report.rows)

    def test_two_point(self, two_point):
        """C = 0 and D = 1/2 give d_1 >= 1/2 d_inf, with d_1 = d_inf = 1."""
        m = uniform_measure(two_point)
        est = estimate_assumption_constants(two_point, m, [0.5])[0]
        report = check_sandwich(two_point, m, 1.0, INF, est)
        assert report.lower_constant == 0.5
        assert report.rows[0].d_p == 1.0 and report.rows[0].d_p_prime == 1.0

    def test_random_measures(self):
        rng = make_generator(44)
        for s in range(5):
            space = random_euclidean_space(25, dim=2, seed=500 + s)
            measure = measure_from_weights(space, rng.random(space.n) + 0.05)
            for est in estimate_assumption_constants(space, measure):
                if est.holds:
                    assert check_sandwich(space, measure, 1.0, INF, est, keep_rows=False).ok

    def test_failed_assumption_raises(self, two_point):
        est = LpAssumptionEstimate(D=0.5, C=1.0, worst_pair=(0, 1), holds=False, margin=0.0)
        with pytest.raises(HypothesisError):
            check_sandwich(two_point, uniform_measure(two_point), 1.0, INF, est)

    def test_p_order(self, two_point):
        m = uniform_measure(two_point)
        est = estimate_assumption_constants(two_point, m, [0.5])[0]
        with pytest.raises(ValueError):
            check_sandwich(two_point, m, 2.0, 1.0, est)


class TestNesting:
    """K^p_D(x, y) against K^p'_D(x, y)."""

    def test_equal_exponents(self, cloud20, uniform20):
        assert nesting_check(cloud20, uniform20, 0.3, 2.0, 2.0) == []

    def test_two_point(self, two_point):
        assert nesting_check(two_point, uniform_measure(two_point), 0.3, 1.0, INF) == []

    def test_findings_are_triples(self):
        space = unit_square_grid(5, 4)
        for v in nesting_check(space, uniform_measure(space), 0.3, 1.0, 2.0):
            assert v.x < v.y
            assert 0 <= v.z < space.n

    def test_order(self, two_point):
        with pytest.raises(ValueError):
            nesting_check(two_point, uniform_measure(two_point), 0.3, 2.0, 1.0)
