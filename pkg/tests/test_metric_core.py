"""
Metric-axiom validation, Euclidean test spaces and the cone grid.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from mmclt.analyzer import metric_core
from mmclt.analyzer.metric_core import (
    CONE_TOTAL_ANGLE,
    cone_geodesic_distance,
    cone_grid,
    cone_rotation,
    cone_sector_coords,
    cone_surface_point,
    diameter,
    euclidean_space,
    load_space,
    make_cone_space,
    make_space,
    random_euclidean_space,
    sector_to_cone,
    space_to_json,
    unit_square_grid,
    validate_metric,
)
from mmclt.errors import MetricAxiomError, MetricInputError
from mmclt.models import ConePoint, FiniteMetricSpace


class TestValidateMetric:
    """Axiom checks on raw matrices."""

    def test_two_point_passes(self):
        """[[0,1],[1,0]] is a metric with no excess."""
        report = validate_metric([[0.0, 1.0], [1.0, 0.0]])
        assert report.ok
        assert report.max_excess == 0.0
        assert report.triangle_violations == []

    def test_triangle_violation_reported(self):
        """3 > 1 + 1 is reported as (0, 2, 1) with excess 1."""
        report = validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
        assert not report.ok
        assert (0, 2, 1, 1.0) in report.triangle_violations, report.triangle_violations
        assert report.max_excess == 1.0

    def test_asymmetric_and_zero_distance(self):
        """Asymmetry and a zero off-diagonal entry are both flagged."""
        assert not validate_metric([[0.0, 1.0], [2.0, 0.0]]).symmetric
        assert not validate_metric([[0.0, 0.0], [0.0, 0.0]]).identity_ok

    def test_random_euclidean_points_pass(self):
        """50 uniform points in the unit square satisfy every axiom."""
        space = random_euclidean_space(50, dim=2, seed=3)
        report = validate_metric(space.dist)
        assert report.ok
        assert report.max_excess <= 1e-12

    @pytest.mark.parametrize("bad", [[[0.0, 1.0, 2.0]], [[0.0, float("nan")], [1.0, 0.0]], [["a"]], []])
    def test_malformed_input_rejected(self, bad):
        """Non-square, non-finite, non-numeric and empty input raise MetricInputError."""
        with pytest.raises(MetricInputError):
            validate_metric(bad)


class TestSpaces:
    """Constructors for validated spaces."""

    def test_make_space_rejects_non_metric(self):
        """A violating matrix raises MetricAxiomError, not a wrapped validation error."""
        with pytest.raises(MetricAxiomError, match="triangle"):
            make_space([[0, 1, 3], [1, 0, 1], [3, 1, 0]])

    def test_label_count_checked(self):
        with pytest.raises(MetricInputError):
            make_space([[0.0, 1.0], [1.0, 0.0]], labels=["only-one"])

    def test_make_space_validates_once(self, monkeypatch):
        """The axiom check runs once per make_space, not again inside the model."""
        calls = []
        original = metric_core.validate_metric

        def counting(dist, tol=1e-9):
            calls.append(tol)
            return original(dist, tol)

        monkeypatch.setattr(metric_core, "validate_metric", counting)
        make_space([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])
        assert len(calls) == 1

    def test_direct_construction_still_checked(self):
        bad = np.array([[0.0, 1.0, 3.0], [1.0, 0.0, 1.0], [3.0, 1.0, 0.0]])
        with pytest.raises(ValidationError, match="triangle"):
            FiniteMetricSpace(n=3, dist=bad)

    def test_euclidean_345(self):
        """(0,0) and (3,4) are at distance 5."""
        space = euclidean_space([[0.0, 0.0], [3.0, 4.0]])
        assert space.dist[0, 1] == 5.0

    def test_single_point(self):
        space = euclidean_space([[0.5, 0.5]])
        assert space.n == 1
        assert space.dist.tolist() == [[0.0]]

    def test_unit_square_corners(self):
        """The diagonal of the unit square is the diameter."""
        space = euclidean_space([[0, 0], [0, 1], [1, 0], [1, 1]])
        assert diameter(space) == pytest.approx(math.sqrt(2.0), abs=1e-15)

    def test_duplicate_points_named(self):
        """Colliding indices appear in the error message."""
        with pytest.raises(MetricInputError, match="points 0 and 2 coincide"):
            euclidean_space([[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]])

    def test_grid_size(self):
        assert unit_square_grid(8, 5).n == 40

    def test_distance_matrix_is_read_only(self, two_point):
        """Spaces are immutable once validated."""
        with pytest.raises(ValueError):
            two_point.dist[0, 1] = 2.0

    def test_space_id_tracks_content(self, two_point, collinear):
        assert two_point.space_id == make_space([[0.0, 1.0], [1.0, 0.0]]).space_id
        assert two_point.space_id != collinear.space_id


class TestCone:
    """Sector coordinates, geodesic distance and the cone grid."""

    def test_sector_coords(self):
        """(1/sqrt2, sqrt2) maps to (1, 1) and (0.5, pi) to (sqrt2/2, pi/sqrt2)."""
        r, theta = cone_sector_coords(ConePoint(u=1 / math.sqrt(2), v=math.sqrt(2)))
        assert r == pytest.approx(1.0, abs=1e-15)
        assert theta == pytest.approx(1.0, abs=1e-15)
        r, theta = cone_sector_coords(ConePoint(u=0.5, v=math.pi))
        assert r == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
        assert theta == pytest.approx(math.pi / math.sqrt(2), abs=1e-15)

    def test_sector_map_inverts_coords(self):
        p = ConePoint(u=0.3, v=4.0)
        q = sector_to_cone(*cone_sector_coords(p))
        assert q.u == pytest.approx(p.u, abs=1e-15)
        assert q.v == pytest.approx(p.v, abs=1e-15)

    def test_surface_point_on_cone(self):
        """The embedded point satisfies x^2 + y^2 = z^2."""
        x, y, z = cone_surface_point(ConePoint(u=0.7, v=2.5))
        assert x * x + y * y == pytest.approx(z * z, abs=1e-15)

    @pytest.mark.parametrize("u,v", [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0), (0.5, 2 * math.pi)])
    def test_cone_point_domain(self, u, v):
        """u in (0, 1) and v in (0, 2 pi) are open intervals."""
        with pytest.raises(ValidationError):
            ConePoint(u=u, v=v)

    def test_radial_geodesic(self):
        """Points on one generator are sqrt(2) |u1 - u2| apart."""
        d = cone_geodesic_distance(ConePoint(u=0.2, v=1.0), ConePoint(u=0.7, v=1.0))
        assert d == pytest.approx(math.sqrt(2) * 0.5, abs=1e-15)

    def test_identity_and_symmetry(self):
        p, q = ConePoint(u=0.4, v=0.3), ConePoint(u=0.9, v=5.0)
        assert cone_geodesic_distance(p, p) == 0.0
        assert cone_geodesic_distance(p, q) == cone_geodesic_distance(q, p)

    def test_wrap_around(self):
        """Angles near 0 and near 2 pi are close across the cut."""
        p, q = ConePoint(u=0.5, v=0.1), ConePoint(u=0.5, v=2 * math.pi - 0.1)
        r = math.sqrt(2) * 0.5
        dtheta = 0.2 / math.sqrt(2)
        assert CONE_TOTAL_ANGLE - (2 * math.pi - 0.2) / math.sqrt(2) == pytest.approx(dtheta, abs=1e-12)
        assert cone_geodesic_distance(p, q) == pytest.approx(2 * r * math.sin(dtheta / 2), abs=1e-12)

    def test_grid_too_small(self):
        with pytest.raises(MetricInputError):
            cone_grid(1, 24)

    def test_cone_space_is_metric(self):
        """Every generated grid passes validation (checked exhaustively by construction)."""
        space = make_cone_space(6, 10)
        assert space.n == 60
        assert validate_metric(space.dist).ok
        assert space.labels[0] == "u0v0" and space.labels[-1] == "u5v9"

    def test_rotation_invariance(self):
        """Shifting every ring by one angular step permutes the distance matrix onto itself."""
        space = make_cone_space(8, 24)
        perm = cone_rotation(8, 24, 1)
        assert sorted(perm.tolist()) == list(range(space.n))
        np.testing.assert_allclose(space.dist[np.ix_(perm, perm)], space.dist, atol=1e-12)


class TestSpaceIO:
    """Loading spaces from sample files."""

    def test_load_json_with_labels(self, sample_dir):
        space = load_space(sample_dir / "two_point.json")
        assert space.labels == ["a", "b"]
        assert space.dist[0, 1] == 1.0

    def test_load_csv(self, sample_dir):
        space = load_space(sample_dir / "collinear.csv")
        assert space.n == 3
        assert diameter(space) == 2.0

    def test_violating_file_rejected(self, sample_dir):
        with pytest.raises(MetricAxiomError):
            load_space(sample_dir / "violating.csv")

    def test_space_to_json(self, two_point):
        data = space_to_json(two_point)
        assert data == {"n": 2, "dist": [[0.0, 1.0], [1.0, 0.0]], "labels": ["a", "b"]}
