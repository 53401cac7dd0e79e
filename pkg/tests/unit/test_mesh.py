"""Unit tests for convex domains and triangulations."""

import math

import numpy as np
import pytest

from langchain_ampere.errors import DomainError
from langchain_ampere.numerics.mesh import (
    ConvexDomain,
    TriMesh,
    disk_mesh,
    domain_mesh,
    polar_mesh,
    square_mesh,
)


class TestConvexDomain:
    """Tests for ConvexDomain."""

    def test_square_properties(self):
        """Area, diameter and centroid of [-1, 1]^2."""
        square = ConvexDomain.square(1.0)
        assert square.area == pytest.approx(4.0)
        assert square.diameter == pytest.approx(2.0 * math.sqrt(2.0))
        assert square.centroid == pytest.approx([0.0, 0.0])

    def test_too_few_vertices(self):
        """Two vertices are not a domain."""
        with pytest.raises(DomainError):
            ConvexDomain(np.array([[0.0, 0.0], [1.0, 0.0]]))

    def test_non_convex(self):
        """A reflex vertex is rejected."""
        arrow = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [2.0, 2.0], [0.0, 2.0]])
        with pytest.raises(DomainError, match="not convex"):
            ConvexDomain(arrow)

    def test_clockwise(self):
        """Clockwise order has negative area and is rejected."""
        cw = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])
        with pytest.raises(DomainError):
            ConvexDomain(cw)

    def test_signed_distance(self):
        """Center of the square is at distance one from the boundary."""
        square = ConvexDomain.square(1.0)
        assert square.signed_distance([[0.0, 0.0]])[0] == pytest.approx(-1.0)
        assert square.distance_to_boundary([[0.0, 0.0], [3.0, 0.0]]) == pytest.approx(
            [1.0, 0.0]
        )
        assert square.contains([[0.5, 0.5], [1.5, 0.0]]).tolist() == [True, False]

    def test_strict_convexity(self):
        """A straight run along an edge is convex but not strictly."""
        flat = np.array([[-1.0, -1.0], [0.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
        assert not ConvexDomain(flat).is_strictly_convex()
        assert ConvexDomain.disk(1.0, 64).is_strictly_convex()

    def test_scaled(self):
        """Scaling about the centroid scales the area quadratically."""
        square = ConvexDomain.square(1.0, center=(2.0, 3.0))
        half = square.scaled(0.5)
        assert half.area == pytest.approx(1.0)
        assert half.centroid == pytest.approx([2.0, 3.0])

    def test_from_points(self):
        """Hull of a cloud."""
        rng = np.random.default_rng(0)
        pts = rng.uniform(-1.0, 1.0, size=(50, 2))
        domain = ConvexDomain.from_points(pts)
        assert np.all(domain.contains(pts, tol=1e-12))


class TestTriMesh:
    """Tests for TriMesh and the mesh builders."""

    def test_polar_mesh_apex_degree(self):
        """Apex has one incident triangle per ray; the outer ring is the boundary."""
        mesh = polar_mesh(8, 32)
        assert mesh.n_vertices == 1 + 8 * 32
        assert len(mesh.vertex_triangles[0]) == 32
        assert len(mesh.boundary_indices) == 32
        assert not mesh.boundary[0]

    def test_disk_mesh_counts(self):
        """Ring k carries 6k points."""
        mesh = disk_mesh(4)
        assert mesh.n_vertices == 1 + 6 * (1 + 2 + 3 + 4)
        assert len(mesh.boundary_indices) == 24

    def test_square_mesh(self):
        """Structured mesh of [-1, 1]^2 with positive areas summing to 4."""
        mesh = square_mesh(4)
        assert mesh.n_vertices == 25
        assert len(mesh.triangles) == 32
        assert np.all(mesh.areas > 0)
        assert float(np.sum(mesh.areas)) == pytest.approx(4.0)
        assert len(mesh.interior) == 9
        assert mesh.h == pytest.approx(math.sqrt(2.0) * 0.5)

    def test_interior_edges(self):
        """Each interior edge is listed once with a < b."""
        mesh = square_mesh(2)
        edges = mesh.edges
        assert len(edges.a) == 8
        assert np.all(edges.a < edges.b)

    def test_dual_areas_partition(self):
        """Barycentric dual cells cover the mesh."""
        mesh = disk_mesh(3)
        assert float(np.sum(mesh.dual_areas())) == pytest.approx(float(np.sum(mesh.areas)))

    def test_unused_vertex(self):
        """A vertex outside every triangle is rejected."""
        verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]])
        with pytest.raises(DomainError, match="belong to no triangle"):
            TriMesh(verts, np.array([[0, 1, 2]]))

    def test_boundary_shape(self):
        """Boundary flags need one entry per vertex."""
        verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(DomainError):
            TriMesh(verts, np.array([[0, 1, 2]]), np.array([True, True]))

    def test_orientation_is_normalized(self):
        """Clockwise input triangles are flipped."""
        verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        mesh = TriMesh(verts, np.array([[0, 2, 1]]))
        assert mesh.areas[0] == pytest.approx(0.5)

    def test_domain_mesh_boundary_on_boundary(self):
        """Boundary vertices of a polygon mesh lie on the polygon."""
        domain = ConvexDomain(np.array([[0.0, 0.0], [2.0, 0.0], [2.5, 1.5], [0.5, 2.0]]))
        mesh = domain_mesh(domain, 4)
        d = domain.distance_to_boundary(mesh.vertices[mesh.boundary_indices])
        assert float(np.max(d)) <= 1e-12
        assert float(np.sum(mesh.areas)) == pytest.approx(domain.area)

    def test_builders_reject_bad_levels(self):
        """Level and ray counts are validated."""
        with pytest.raises(DomainError):
            polar_mesh(0, 32)
        with pytest.raises(DomainError):
            disk_mesh(0)
        with pytest.raises(DomainError):
            square_mesh(1)
