"""Unit tests for the planar primitives."""

import math

import numpy as np
import pytest

from langchain_ampere.numerics.geometry import (
    convex_hull_2d,
    orient2d,
    points_in_convex_polygon,
    polygon_area,
    polygon_centroid,
    polygon_diameter,
    polygons_intersect,
    segment_distance,
    unit_ball_volume,
)

UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


class TestOrient2d:
    """Tests for the orientation predicate."""

    def test_left_and_right_turns(self):
        """Counterclockwise is +1, clockwise is -1."""
        assert orient2d((0, 0), (1, 0), (0, 1)) == 1
        assert orient2d((0, 0), (0, 1), (1, 0)) == -1

    def test_collinear(self):
        """Exactly collinear points give 0."""
        assert orient2d((0.5, 0.5), (12.0, 12.0), (24.0, 24.0)) == 0

    def test_near_collinear_is_exact(self):
        """A tiny perturbation is resolved with its true sign."""
        eps = 2.0**-50
        assert orient2d((0.0, 0.0), (1.0, 1.0), (2.0, 2.0 + eps)) == 1
        assert orient2d((0.0, 0.0), (1.0, 1.0), (2.0, 2.0 - eps)) == -1


class TestConvexHull:
    """Tests for the monotone-chain hull."""

    def test_drops_interior_and_collinear_points(self):
        """Only the four corners of the square survive, counterclockwise."""
        pts = np.vstack([UNIT_SQUARE, [[0.5, 0.5], [0.5, 0.0], [1.0, 0.5]]])
        hull = convex_hull_2d(pts)
        assert len(hull) == 4
        assert polygon_area(hull) == pytest.approx(1.0)

    def test_segment(self):
        """Collinear input gives the two endpoints."""
        hull = convex_hull_2d([[0, 0], [1, 1], [2, 2], [3, 3]])
        assert hull.tolist() == [[0.0, 0.0], [3.0, 3.0]]

    def test_single_point(self):
        """Repeated points collapse to one."""
        assert len(convex_hull_2d([[1, 2], [1, 2], [1, 2]])) == 1


class TestPolygonQueries:
    """Tests for area, centroid, diameter and membership."""

    def test_signed_area(self):
        """Clockwise order flips the sign."""
        assert polygon_area(UNIT_SQUARE) == pytest.approx(1.0)
        assert polygon_area(UNIT_SQUARE[::-1]) == pytest.approx(-1.0)

    def test_centroid(self):
        """Centroid of the square [0, 2]^2."""
        assert polygon_centroid(2.0 * UNIT_SQUARE) == pytest.approx([1.0, 1.0])

    def test_diameter(self):
        """Diameter of the unit square is its diagonal."""
        assert polygon_diameter(UNIT_SQUARE) == pytest.approx(math.sqrt(2.0))

    def test_membership(self):
        """Boundary points count as inside; outside points do not."""
        inside = points_in_convex_polygon(
            [[0.5, 0.5], [1.0, 0.5], [1.5, 0.5]], UNIT_SQUARE, tol=1e-12
        )
        assert inside.tolist() == [True, True, False]

    def test_membership_in_segment(self):
        """Two vertices are treated as a segment."""
        seg = np.array([[0.0, 0.0], [1.0, 0.0]])
        inside = points_in_convex_polygon([[0.5, 0.0], [0.5, 0.1]], seg, tol=1e-9)
        assert inside.tolist() == [True, False]

    def test_segment_distance(self):
        """Distance to the interior and to an endpoint."""
        d = segment_distance([[0.0, 1.0], [2.0, 0.0]], (-1.0, 0.0), (1.0, 0.0))
        assert d == pytest.approx([1.0, 1.0])


class TestUnitBallVolume:
    """Tests for omega_n."""

    @pytest.mark.parametrize(
        "n, expected", [(1, 2.0), (2, math.pi), (3, 4.0 * math.pi / 3.0)]
    )
    def test_low_dimensions(self, n, expected):
        """Closed forms in dimensions 1 to 3."""
        assert unit_ball_volume(n) == pytest.approx(expected)


class TestPolygonsIntersect:
    """Tests for the separating-axis test."""

    def test_overlap(self):
        """Overlapping squares intersect."""
        assert polygons_intersect(UNIT_SQUARE, UNIT_SQUARE + 0.5)

    def test_touching_edges_do_not_intersect(self):
        """Squares sharing an edge are disjoint."""
        assert not polygons_intersect(UNIT_SQUARE, UNIT_SQUARE + [1.0, 0.0])

    def test_far_apart(self):
        """Separated squares are disjoint."""
        assert not polygons_intersect(UNIT_SQUARE, UNIT_SQUARE + [3.0, 3.0])
