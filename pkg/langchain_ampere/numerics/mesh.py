"""Convex polygonal domains and planar triangle meshes."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.spatial import Delaunay, QhullError

from langchain_ampere.errors import DomainError
from langchain_ampere.numerics.geometry import (
    FloatArray,
    convex_hull_2d,
    polygon_area,
    polygon_centroid,
    polygon_diameter,
)

logger = logging.getLogger(__name__)

IntArray = NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class ConvexDomain:
    """Convex polygon given by counterclockwise vertices.

    ``half_planes`` holds one row ``(n_x, n_y, offset)`` per edge; a point x is
    inside when ``n . x <= offset``.
    """

    vertices: FloatArray
    tol: float = 1e-12

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise DomainError("A domain polygon needs at least three vertices.")
        edges = np.roll(verts, -1, axis=0) - verts
        lengths = np.linalg.norm(edges, axis=1)
        if np.any(lengths <= self.tol * max(1.0, float(np.max(lengths)))):
            raise DomainError("Domain vertices must be distinct.")
        if polygon_area(verts) <= self.tol * float(np.max(lengths)) ** 2:
            raise DomainError(
                "Domain polygon is degenerate or not counterclockwise (area <= 0)."
            )
        turns = self._turns(edges)
        if np.any(turns < -self.tol * lengths * np.roll(lengths, -1)):
            raise DomainError("Domain polygon is not convex.")

    @staticmethod
    def _turns(edges: FloatArray) -> FloatArray:
        nxt = np.roll(edges, -1, axis=0)
        return np.asarray(edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0])

    @classmethod
    def disk(
        cls, radius: float = 1.0, n: int = 128, center: ArrayLike = (0.0, 0.0)
    ) -> "ConvexDomain":
        """Regular n-gon inscribed in the circle of the given radius."""
        theta = 2.0 * np.pi * np.arange(n) / n
        c = np.asarray(center, dtype=float)
        return cls(c + radius * np.column_stack([np.cos(theta), np.sin(theta)]))

    @classmethod
    def ellipse(cls, a: float, b: float, n: int = 128) -> "ConvexDomain":
        theta = 2.0 * np.pi * np.arange(n) / n
        return cls(np.column_stack([a * np.cos(theta), b * np.sin(theta)]))

    @classmethod
    def square(cls, half_width: float = 1.0, center: ArrayLike = (0.0, 0.0)) -> "ConvexDomain":
        c = np.asarray(center, dtype=float)
        corners = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
        return cls(c + half_width * corners)

    @classmethod
    def from_points(cls, points: ArrayLike, tol: float = 1e-12) -> "ConvexDomain":
        """Convex hull of a point cloud."""
        return cls(convex_hull_2d(points), tol=tol)

    @cached_property
    def half_planes(self) -> FloatArray:
        edges = np.roll(self.vertices, -1, axis=0) - self.vertices
        normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        offsets = np.einsum("ij,ij->i", normals, self.vertices)
        return np.column_stack([normals, offsets])

    @cached_property
    def area(self) -> float:
        return polygon_area(self.vertices)

    @cached_property
    def diameter(self) -> float:
        return polygon_diameter(self.vertices)

    @cached_property
    def centroid(self) -> FloatArray:
        return polygon_centroid(self.vertices)

    def is_strictly_convex(self) -> bool:
        """True when every vertex turns strictly (no straight boundary runs)."""
        edges = np.roll(self.vertices, -1, axis=0) - self.vertices
        lengths = np.linalg.norm(edges, axis=1)
        return bool(np.all(self._turns(edges) > self.tol * lengths * np.roll(lengths, -1)))

    def signed_distance(self, points: ArrayLike) -> FloatArray:
        """Max over half-planes of ``n . x - offset``; negative inside."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        hp = self.half_planes
        return np.asarray(np.max(pts @ hp[:, :2].T - hp[:, 2][None, :], axis=1))

    def contains(self, points: ArrayLike, tol: Optional[float] = None) -> NDArray[np.bool_]:
        slack = self.tol if tol is None else tol
        return np.asarray(self.signed_distance(points) <= slack * max(1.0, self.diameter))

    def distance_to_boundary(self, points: ArrayLike) -> FloatArray:
        """Distance from interior points to the boundary (zero outside)."""
        return np.asarray(np.maximum(-self.signed_distance(points), 0.0))

    def scaled(self, factor: float) -> "ConvexDomain":
        return ConvexDomain(self.centroid + factor * (self.vertices - self.centroid), tol=self.tol)


def _ccw_triangles(points: FloatArray, triangles: IntArray) -> IntArray:
    p0, p1, p2 = (points[triangles[:, k]] for k in range(3))
    det = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (
        p2[:, 0] - p0[:, 0]
    )
    flipped = triangles.copy()
    neg = det < 0
    flipped[neg, 1], flipped[neg, 2] = triangles[neg, 2], triangles[neg, 1]
    return flipped


@dataclass(frozen=True, eq=False)
class EdgeTable:
    """Interior edges ``a -> b`` with the triangle on each side."""

    a: IntArray
    b: IntArray
    left: IntArray
    right: IntArray


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Counterclockwise triangulation with boundary flags.

    When ``boundary`` is not given, a vertex is on the boundary if it lies on an
    edge that belongs to a single triangle.
    """

    vertices: FloatArray
    triangles: IntArray
    boundary: Optional[NDArray[np.bool_]] = field(default=None)

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        tris = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(tris) == 0:
            raise DomainError("Mesh has no triangles.")
        used = np.zeros(len(verts), dtype=bool)
        used[tris.ravel()] = True
        if not np.all(used):
            raise DomainError(
                f"{int(np.sum(~used))} mesh vertices belong to no triangle "
                "(duplicate or collinear points)."
            )
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", _ccw_triangles(verts, tris))
        if self.boundary is None:
            object.__setattr__(self, "boundary", self._topological_boundary())
        else:
            flags = np.asarray(self.boundary, dtype=bool).reshape(-1)
            if flags.shape != (len(verts),):
                raise DomainError("Boundary flags must have one entry per vertex.")
            object.__setattr__(self, "boundary", flags)

    @classmethod
    def from_points(
        cls,
        points: ArrayLike,
        boundary: Optional[ArrayLike] = None,
        tol: float = 1e-12,
    ) -> "TriMesh":
        """Delaunay triangulation with zero-area triangles removed."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        try:
            tri = Delaunay(pts)
        except QhullError as exc:
            raise DomainError(f"Cannot triangulate points: {exc}") from exc
        simplices = np.asarray(tri.simplices, dtype=np.int64)
        p0, p1, p2 = (pts[simplices[:, k]] for k in range(3))
        det = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (
            p2[:, 0] - p0[:, 0]
        )
        scale = float(np.ptp(pts, axis=0).max()) ** 2
        simplices = simplices[np.abs(det) > tol * scale]
        flags = None if boundary is None else np.asarray(boundary, dtype=bool)
        return cls(pts, simplices, flags)

    def _topological_boundary(self) -> NDArray[np.bool_]:
        tris = self.triangles
        pairs = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        edges = np.sort(pairs, axis=1)
        uniq, counts = np.unique(edges, axis=0, return_counts=True)
        flags = np.zeros(len(self.vertices), dtype=bool)
        flags[uniq[counts == 1].ravel()] = True
        return flags

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def interior(self) -> IntArray:
        """Indices of interior vertices in increasing order."""
        assert self.boundary is not None
        return np.flatnonzero(~self.boundary)

    @cached_property
    def boundary_indices(self) -> IntArray:
        assert self.boundary is not None
        return np.flatnonzero(self.boundary)

    @cached_property
    def areas(self) -> FloatArray:
        p0, p1, p2 = (self.vertices[self.triangles[:, k]] for k in range(3))
        return 0.5 * (
            (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
            - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
        )

    @cached_property
    def h(self) -> float:
        """Longest edge length."""
        tris = self.triangles
        lengths = [
            np.linalg.norm(self.vertices[tris[:, i]] - self.vertices[tris[:, j]], axis=1)
            for i, j in ((0, 1), (1, 2), (2, 0))
        ]
        return float(np.max(np.concatenate(lengths)))

    @cached_property
    def edges(self) -> EdgeTable:
        """Interior edges, each listed once with ``a < b``."""
        tris = self.triangles
        n_tri = len(tris)
        tails = np.concatenate([tris[:, 0], tris[:, 1], tris[:, 2]])
        heads = np.concatenate([tris[:, 1], tris[:, 2], tris[:, 0]])
        owner = np.tile(np.arange(n_tri), 3)
        lo = np.minimum(tails, heads)
        hi = np.maximum(tails, heads)
        key = lo * self.n_vertices + hi
        order = np.argsort(key, kind="stable")
        key_sorted = key[order]
        pair = np.flatnonzero(key_sorted[1:] == key_sorted[:-1])
        first, second = order[pair], order[pair + 1]
        # Half-edge tail -> head has its owner triangle on the left.
        forward = tails[first] < heads[first]
        left = np.where(forward, owner[first], owner[second])
        right = np.where(forward, owner[second], owner[first])
        return EdgeTable(a=lo[first], b=hi[first], left=left, right=right)

    @cached_property
    def vertex_triangles(self) -> list[IntArray]:
        """Incident triangle indices per vertex."""
        flat = self.triangles.ravel()
        owner = np.repeat(np.arange(len(self.triangles)), 3)
        order = np.argsort(flat, kind="stable")
        splits = np.searchsorted(flat[order], np.arange(1, self.n_vertices))
        return [np.asarray(part) for part in np.split(owner[order], splits)]

    @cached_property
    def domain(self) -> ConvexDomain:
        """Convex hull of the vertices."""
        return ConvexDomain.from_points(self.vertices)

    def dual_areas(self) -> FloatArray:
        """Barycentric dual cell area per vertex."""
        out = np.zeros(self.n_vertices)
        np.add.at(out, self.triangles.ravel(), np.repeat(self.areas / 3.0, 3))
        return out

    def same_as(self, other: "TriMesh") -> bool:
        return (
            self.vertices.shape == other.vertices.shape
            and self.triangles.shape == other.triangles.shape
            and bool(np.array_equal(self.vertices, other.vertices))
            and bool(np.array_equal(self.triangles, other.triangles))
        )


def polar_mesh(rings: int, rays: int, radius: float = 1.0) -> TriMesh:
    """Center point plus ``rings`` circles sharing ``rays`` angles.

    The apex has incidence degree ``rays``; the outer ring is the boundary.
    """
    if rings < 1 or rays < 3:
        raise DomainError("polar_mesh needs rings >= 1 and rays >= 3.")
    theta = 2.0 * np.pi * np.arange(rays) / rays
    directions = np.column_stack([np.cos(theta), np.sin(theta)])
    points = [np.zeros((1, 2))]
    for k in range(1, rings + 1):
        points.append(radius * k / rings * directions)
    pts = np.vstack(points)

    def ring(k: int, j: int) -> int:
        return 1 + (k - 1) * rays + (j % rays)

    triangles = [[0, ring(1, j), ring(1, j + 1)] for j in range(rays)]
    for k in range(1, rings):
        for j in range(rays):
            a, b = ring(k, j), ring(k, j + 1)
            c, d = ring(k + 1, j), ring(k + 1, j + 1)
            triangles.append([a, c, d])
            triangles.append([a, d, b])
    boundary = np.zeros(len(pts), dtype=bool)
    boundary[1 + (rings - 1) * rays :] = True
    return TriMesh(pts, np.array(triangles, dtype=np.int64), boundary)


def disk_mesh(level: int, radius: float = 1.0) -> TriMesh:
    """Quasi-uniform disk mesh: ring k carries 6k points, spacing radius/level."""
    if level < 1:
        raise DomainError("disk_mesh needs level >= 1.")
    points = [np.zeros((1, 2))]
    for k in range(1, level + 1):
        m = 6 * k
        theta = 2.0 * np.pi * (np.arange(m) + 0.5 * (k % 2)) / m
        points.append(radius * k / level * np.column_stack([np.cos(theta), np.sin(theta)]))
    pts = np.vstack(points)
    boundary = np.zeros(len(pts), dtype=bool)
    boundary[len(pts) - 6 * level :] = True
    return TriMesh.from_points(pts, boundary)


def structured_mesh(
    xs: ArrayLike, ys: ArrayLike, keep: Optional[NDArray[np.bool_]] = None
) -> tuple[TriMesh, IntArray]:
    """Two triangles per cell of a tensor grid, split along the (i, j)-(i+1, j+1) diagonal.

    ``keep`` is a ``(ny, nx)`` mask of nodes in the domain; triangles need all three
    corners kept. Returns the mesh and the node -> vertex map (``-1`` for unused
    nodes). Boundary flags are topological and may be overridden by the caller.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    ny, nx = len(y), len(x)
    mask = np.ones((ny, nx), dtype=bool) if keep is None else np.asarray(keep, dtype=bool)
    node = np.arange(ny * nx).reshape(ny, nx)
    sw, se = node[:-1, :-1].ravel(), node[:-1, 1:].ravel()
    nw, ne = node[1:, :-1].ravel(), node[1:, 1:].ravel()
    tris = np.concatenate([np.column_stack([sw, se, ne]), np.column_stack([sw, ne, nw])])
    flat = mask.ravel()
    tris = tris[np.all(flat[tris], axis=1)]
    used = np.zeros(ny * nx, dtype=bool)
    used[tris.ravel()] = True
    vertex_of = np.full(ny * nx, -1, dtype=np.int64)
    vertex_of[used] = np.arange(int(np.sum(used)))
    xx, yy = np.meshgrid(x, y)
    pts = np.column_stack([xx.ravel(), yy.ravel()])[used]
    return TriMesh(pts, vertex_of[tris]), vertex_of


def square_mesh(n: int, half_width: float = 1.0) -> TriMesh:
    """Structured mesh of the square [-w, w]^2 with n cells per side."""
    if n < 2:
        raise DomainError("square_mesh needs n >= 2.")
    ticks = np.linspace(-half_width, half_width, n + 1)
    mesh, _ = structured_mesh(ticks, ticks)
    return mesh


def domain_mesh(domain: ConvexDomain, level: int) -> TriMesh:
    """Delaunay mesh of a convex polygon with spacing ``diameter / (2 level)``.

    Edges are subdivided at that spacing; interior points come from an aligned
    square lattice kept a third of a spacing away from the boundary.
    """
    if level < 1:
        raise DomainError("domain_mesh needs level >= 1.")
    h = domain.diameter / (2.0 * level)
    rim = []
    verts = domain.vertices
    for a, b in zip(verts, np.roll(verts, -1, axis=0)):
        pieces = max(1, int(np.ceil(np.linalg.norm(b - a) / h)))
        t = np.arange(pieces) / pieces
        rim.append(a + t[:, None] * (b - a))
    boundary_pts = np.vstack(rim)
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    xs = np.arange(lo[0], hi[0] + h, h)
    ys = np.arange(lo[1], hi[1] + h, h)
    xx, yy = np.meshgrid(xs, ys)
    lattice = np.column_stack([xx.ravel(), yy.ravel()])
    inner = lattice[domain.signed_distance(lattice) < -h / 3.0]
    pts = np.vstack([boundary_pts, inner])
    flags = np.zeros(len(pts), dtype=bool)
    flags[: len(boundary_pts)] = True
    return TriMesh.from_points(pts, flags)
