"""Exact convex analysis on piecewise-linear convex functions.

Subdifferentials, Monge-Ampère measures, Legendre transforms, supporting
hyperplanes, the Aleksandrov maximum principle, the comparison principle and the
matrix inequalities behind concavity of ``det^theta`` are all evaluated exactly
(up to rounding) on triangulations.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field
from scipy.spatial import ConvexHull, QhullError

from langchain_ampere.config import Tolerances
from langchain_ampere.errors import (
    BoundaryDataError,
    ConvexityError,
    DomainError,
    MeshMismatchError,
    ParameterError,
    PSDError,
)
from langchain_ampere.numerics.geometry import (
    FloatArray,
    convex_hull_2d,
    points_in_convex_polygon,
    polygon_area,
    polygon_centroid,
    unit_ball_volume,
)
from langchain_ampere.numerics.mesh import IntArray, TriMesh

logger = logging.getLogger(__name__)

_CHUNK = 2048


# ---------------------------------------------------------------------------
# Symmetric matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetricMatrix2:
    """2x2 symmetric matrix ``[[a11, a12], [a12, a22]]``."""

    a11: float
    a12: float
    a22: float

    @classmethod
    def from_array(cls, m: ArrayLike) -> "SymmetricMatrix2":
        arr = np.asarray(m, dtype=float)
        return cls(float(arr[0, 0]), 0.5 * float(arr[0, 1] + arr[1, 0]), float(arr[1, 1]))

    @classmethod
    def identity(cls) -> "SymmetricMatrix2":
        return cls(1.0, 0.0, 1.0)

    def as_array(self) -> FloatArray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a12

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    def eigvalsh(self) -> FloatArray:
        return np.asarray(np.linalg.eigvalsh(self.as_array()))

    def is_psd(self, tol: float = 1e-12) -> bool:
        lam = self.eigvalsh()
        return bool(lam[0] >= -tol * max(1.0, float(np.max(np.abs(lam)))))

    def is_pd(self, tol: float = 1e-12) -> bool:
        lam = self.eigvalsh()
        return bool(lam[0] > tol * max(1.0, float(np.max(np.abs(lam)))))

    def cofactor(self) -> "SymmetricMatrix2":
        return SymmetricMatrix2(self.a22, -self.a12, self.a11)

    def inverse(self) -> "SymmetricMatrix2":
        d = self.det
        if d == 0.0:
            raise PSDError("Singular matrix has no inverse.")
        return SymmetricMatrix2(self.a22 / d, -self.a12 / d, self.a11 / d)


# ---------------------------------------------------------------------------
# Lower convex envelope of lifted points
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Envelope:
    """Lower convex hull of lifted points.

    ``triangles`` uses every input point: points above the hull are inserted
    into the facets containing them with their envelope value.
    """

    triangles: IntArray
    values: FloatArray
    extreme: NDArray[np.bool_]


def _barycentric(points: FloatArray, tris: IntArray, p: FloatArray) -> FloatArray:
    a, b, c = (points[tris[:, k]] for k in range(3))
    det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])

    def cross(u: FloatArray, v: FloatArray) -> FloatArray:
        return np.asarray(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])

    l0 = cross(b - p, c - p) / det
    l1 = cross(c - p, a - p) / det
    l2 = cross(a - p, b - p) / det
    return np.column_stack([l0, l1, l2])


def lower_envelope(points: ArrayLike, values: ArrayLike, tol: float = 1e-12) -> Envelope:
    """Lower convex envelope of the lifted points ``(x_i, values_i)``.

    The hull is computed in 3D with an auxiliary apex above the cloud so that
    flat data still yields a solid hull; facets through the apex and vertical
    facets are discarded.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    z = np.asarray(values, dtype=float).reshape(-1)
    n = len(pts)
    if n < 3:
        raise DomainError("Envelope needs at least three points.")
    diam = float(np.ptp(pts, axis=0).max())
    span = float(np.ptp(z))
    apex = np.concatenate([pts.mean(axis=0), [float(z.max()) + span + diam + 1.0]])
    try:
        hull = ConvexHull(np.vstack([np.column_stack([pts, z]), apex]))
    except QhullError as exc:
        raise DomainError(f"Lifted points span no area: {exc}") from exc

    simplices = np.asarray(hull.simplices, dtype=np.int64)
    lower = (~np.any(simplices == n, axis=1)) & (hull.equations[:, 2] < 0.0)
    tris = simplices[lower]
    p0, p1, p2 = (pts[tris[:, k]] for k in range(3))
    det = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (
        p2[:, 0] - p0[:, 0]
    )
    keep = np.abs(det) > tol * diam * diam
    tris, det = tris[keep], det[keep]
    neg = det < 0
    tris[neg] = tris[neg][:, [0, 2, 1]]

    extreme = np.zeros(n, dtype=bool)
    extreme[tris.ravel()] = True
    env = z.copy()
    current = tris.copy()
    for i in np.flatnonzero(~extreme):
        bary = _barycentric(pts, current, pts[i])
        inside = np.min(bary, axis=1)
        best = int(np.argmax(inside))
        if inside[best] < -1e-9:
            raise DomainError(f"Point {i} lies outside the envelope triangulation.")
        tri = current[best]
        lam = bary[best]
        env[i] = float(lam @ env[tri])
        on_edge = np.abs(lam) <= 1e-11
        if int(np.sum(on_edge)) >= 2:
            raise DomainError(f"Point {i} duplicates an envelope vertex.")
        if np.any(on_edge):
            k = int(np.flatnonzero(on_edge)[0])
            u, v = int(tri[(k + 1) % 3]), int(tri[(k + 2) % 3])
            sharing = np.flatnonzero(
                np.any(current == u, axis=1) & np.any(current == v, axis=1)
            )
            new_rows = []
            for t in sharing:
                row = current[t]
                new_rows.append(np.where(row == v, i, row))
                new_rows.append(np.where(row == u, i, row))
            current = np.vstack([np.delete(current, sharing, axis=0), np.array(new_rows)])
        else:
            t0, t1, t2 = (int(x) for x in tri)
            split = np.array([[t0, t1, i], [t1, t2, i], [t2, t0, i]], dtype=np.int64)
            current = np.vstack([np.delete(current, best, axis=0), split])
    return Envelope(triangles=current, values=env, extreme=extreme)


def envelope_values(points: ArrayLike, values: ArrayLike, tol: float = 1e-12) -> FloatArray:
    """Values of the lower convex envelope at the input points, without triangulating.

    Each lower hull facet is a plane; the envelope is their pointwise maximum.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    z = np.asarray(values, dtype=float).reshape(-1)
    diam = float(np.ptp(pts, axis=0).max())
    apex = np.concatenate([pts.mean(axis=0), [float(z.max()) + float(np.ptp(z)) + diam + 1.0]])
    try:
        hull = ConvexHull(np.vstack([np.column_stack([pts, z]), apex]))
    except QhullError as exc:
        raise DomainError(f"Lifted points span no area: {exc}") from exc
    eq = hull.equations
    lower = (~np.any(hull.simplices == len(pts), axis=1)) & (eq[:, 2] < -tol)
    planes = eq[lower]
    # n . (x, y, z) + d = 0 solved for z
    slopes = -planes[:, :2] / planes[:, 2:3]
    offsets = -planes[:, 3] / planes[:, 2]
    out = np.empty(len(pts))
    for start in range(0, len(pts), _CHUNK):
        block = pts[start : start + _CHUNK]
        out[start : start + _CHUNK] = np.max(block @ slopes.T + offsets[None, :], axis=1)
    return np.minimum(out, z)


# ---------------------------------------------------------------------------
# Piecewise-linear convex functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PLConvexFunction:
    """Piecewise-linear function on a triangulation, one value per vertex."""

    mesh: TriMesh
    values: FloatArray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.shape != (self.mesh.n_vertices,):
            raise MeshMismatchError("One value per mesh vertex is required.")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("Function values must be finite.")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_samples(
        cls,
        points: ArrayLike,
        values: ArrayLike,
        boundary: Optional[ArrayLike] = None,
        tol: float = 1e-12,
    ) -> "PLConvexFunction":
        """Convex PL function triangulated by the lower envelope of the samples."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        env = lower_envelope(pts, values, tol)
        flags = None if boundary is None else np.asarray(boundary, dtype=bool)
        return cls(TriMesh(pts, env.triangles, flags), env.values)

    @classmethod
    def from_affine_pieces(
        cls,
        slopes: ArrayLike,
        offsets: ArrayLike,
        points: ArrayLike,
        boundary: Optional[ArrayLike] = None,
    ) -> "PLConvexFunction":
        """Samples of ``max_k (slopes_k . x + offsets_k)`` at ``points``."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        s = np.asarray(slopes, dtype=float).reshape(-1, 2)
        c = np.asarray(offsets, dtype=float).reshape(-1)
        vals = np.max(pts @ s.T + c[None, :], axis=1)
        return cls.from_samples(pts, vals, boundary)

    @cached_property
    def gradients(self) -> FloatArray:
        """Gradient of each triangle's affine piece."""
        tris = self.mesh.triangles
        p = self.mesh.vertices
        z = self.values
        e1 = p[tris[:, 1]] - p[tris[:, 0]]
        e2 = p[tris[:, 2]] - p[tris[:, 0]]
        dz1 = z[tris[:, 1]] - z[tris[:, 0]]
        dz2 = z[tris[:, 2]] - z[tris[:, 0]]
        det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
        gx = (dz1 * e2[:, 1] - dz2 * e1[:, 1]) / det
        gy = (e1[:, 0] * dz2 - e2[:, 0] * dz1) / det
        return np.column_stack([gx, gy])

    @cached_property
    def offsets(self) -> FloatArray:
        first = self.mesh.triangles[:, 0]
        return np.asarray(
            self.values[first] - np.einsum("ij,ij->i", self.gradients, self.mesh.vertices[first])
        )

    def __call__(self, points: ArrayLike) -> FloatArray:
        """Evaluate as the maximum of the affine pieces (valid for convex f)."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        out = np.empty(len(pts))
        for start in range(0, len(pts), _CHUNK):
            block = pts[start : start + _CHUNK]
            out[start : start + _CHUNK] = np.max(
                block @ self.gradients.T + self.offsets[None, :], axis=1
            )
        return out

    def to_dict(self) -> dict[str, list]:
        return {
            "vertices": self.mesh.vertices.tolist(),
            "triangles": self.mesh.triangles.tolist(),
            "values": self.values.tolist(),
        }


@dataclass(frozen=True, eq=False)
class DegenerateConjugate:
    """Legendre transform whose domain is a point or a segment."""

    slopes: FloatArray
    values: FloatArray


@dataclass(frozen=True, eq=False)
class SubdifferentialPolytope:
    """Convex polygon of slopes at a mesh vertex (may be a point or a segment)."""

    vertex: int
    slopes: FloatArray

    @property
    def area(self) -> float:
        return max(polygon_area(self.slopes), 0.0) if len(self.slopes) >= 3 else 0.0

    @property
    def diameter(self) -> float:
        if len(self.slopes) < 2:
            return 0.0
        diff = self.slopes[:, None, :] - self.slopes[None, :, :]
        return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))

    def contains(self, slopes: ArrayLike, tol: float = 1e-12) -> NDArray[np.bool_]:
        return points_in_convex_polygon(slopes, self.slopes, tol)


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Nonnegative masses at sites (mesh vertices or cells)."""

    sites: FloatArray
    masses: FloatArray
    indices: Optional[IntArray] = None

    def __post_init__(self) -> None:
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise ParameterError("Masses must be finite and nonnegative.")
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "sites", np.asarray(self.sites, dtype=float).reshape(-1, 2))

    @property
    def total(self) -> float:
        return float(np.sum(self.masses))

    def to_dict(self) -> dict[str, list]:
        return {"sites": self.sites.tolist(), "masses": self.masses.tolist()}


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class ConvexityCertificate(BaseModel):
    """Worst gradient-monotonicity slack over interior edges."""

    passed: bool
    worst_slack: float
    worst_edge: Optional[tuple[int, int]] = None


class AleksandrovReport(BaseModel):
    """Per-vertex sides of the Aleksandrov maximum principle."""

    passed: bool
    constant: float
    diameter: float
    total_mass: float
    vertices: list[int] = Field(default_factory=list)
    lhs: list[float] = Field(default_factory=list)
    rhs: list[float] = Field(default_factory=list)


class LemmaVerdict(BaseModel):
    name: str
    passed: bool
    lhs: float
    rhs: float


class MatrixLemmaVerdicts(BaseModel):
    """Verdicts for det^theta concavity, the trace inequality and uv_trace."""

    concavity: LemmaVerdict
    trace: LemmaVerdict
    uv_trace: LemmaVerdict

    @property
    def all_passed(self) -> bool:
        return self.concavity.passed and self.trace.passed and self.uv_trace.passed


class ComparisonVerdict(BaseModel):
    passed: bool
    min_gap: float
    worst_vertex: int
    preconditions_met: bool
    detail: str = ""


class ContainmentVerdict(BaseModel):
    passed: bool
    checked_slopes: int
    outside: int


class SlopeBoundReport(BaseModel):
    passed: bool
    worst_ratio: float
    worst_vertex: Optional[int] = None


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def vertex_masses(mesh: TriMesh, gradients: FloatArray) -> FloatArray:
    """Signed area of each vertex's gradient polygon, from the edge table.

    Around an interior vertex, consecutive incident triangles share an edge;
    each edge contributes half the cross product of the two gradients to both
    endpoints. Entries at boundary vertices are meaningless and set to 0.
    """
    e = mesh.edges
    gl, gr = gradients[e.left], gradients[e.right]
    cross = gr[:, 0] * gl[:, 1] - gr[:, 1] * gl[:, 0]
    out = np.zeros(mesh.n_vertices)
    np.add.at(out, e.a, 0.5 * cross)
    np.add.at(out, e.b, -0.5 * cross)
    assert mesh.boundary is not None
    out[mesh.boundary] = 0.0
    return out


def convexity_certificate(
    f: PLConvexFunction, tolerances: Optional[Tolerances] = None
) -> ConvexityCertificate:
    """Discrete monotonicity of the gradient across every interior edge."""
    tol = (tolerances or Tolerances()).conv
    e = f.mesh.edges
    if len(e.a) == 0:
        return ConvexityCertificate(passed=True, worst_slack=0.0)
    p = f.mesh.vertices
    direction = p[e.b] - p[e.a]
    direction /= np.linalg.norm(direction, axis=1)[:, None]
    left_normal = np.column_stack([-direction[:, 1], direction[:, 0]])
    jump = f.gradients[e.left] - f.gradients[e.right]
    slack = np.einsum("ij,ij->i", jump, left_normal)
    scale = max(1.0, float(np.max(np.abs(f.gradients))))
    k = int(np.argmin(slack))
    return ConvexityCertificate(
        passed=bool(slack[k] >= -tol * scale),
        worst_slack=float(slack[k]),
        worst_edge=(int(e.a[k]), int(e.b[k])),
    )


def _require_convex(f: PLConvexFunction, tolerances: Optional[Tolerances]) -> None:
    cert = convexity_certificate(f, tolerances)
    if not cert.passed:
        raise ConvexityError(
            f"convexity certificate failed: slack {cert.worst_slack:.3e} on edge {cert.worst_edge}"
        )


def subdifferential(f: PLConvexFunction, vertex_index: int) -> SubdifferentialPolytope:
    """Convex hull of the gradients of the triangles incident to an interior vertex."""
    assert f.mesh.boundary is not None
    if f.mesh.boundary[vertex_index]:
        raise DomainError(
            f"boundary subdifferential undefined (vertex {vertex_index} is on the boundary)"
        )
    grads = f.gradients[f.mesh.vertex_triangles[vertex_index]]
    return SubdifferentialPolytope(vertex=int(vertex_index), slopes=convex_hull_2d(grads))


def ma_measure(f: PLConvexFunction, tolerances: Optional[Tolerances] = None) -> DiscreteMeasure:
    """Monge-Ampère measure: subdifferential area at each interior vertex."""
    _require_convex(f, tolerances)
    interior = f.mesh.interior
    masses = vertex_masses(f.mesh, f.gradients)[interior]
    scale = max(1.0, float(np.max(np.abs(f.gradients)))) ** 2
    for k in np.flatnonzero(masses <= 1e-12 * scale):
        masses[k] = subdifferential(f, int(interior[k])).area
    return DiscreteMeasure(
        sites=f.mesh.vertices[interior], masses=np.maximum(masses, 0.0), indices=interior
    )


def conjugate_at(f: PLConvexFunction, slopes: ArrayLike) -> FloatArray:
    """Exact Legendre transform values ``max_x (x . p - f(x))`` over mesh vertices."""
    p = np.asarray(slopes, dtype=float).reshape(-1, 2)
    out = np.empty(len(p))
    for start in range(0, len(p), _CHUNK):
        block = p[start : start + _CHUNK]
        out[start : start + _CHUNK] = np.max(
            block @ f.mesh.vertices.T - f.values[None, :], axis=1
        )
    return out


def legendre_transform(
    f: PLConvexFunction, tolerances: Optional[Tolerances] = None
) -> Union[PLConvexFunction, DegenerateConjugate]:
    """Legendre transform on the convex hull of the triangle gradients.

    Nodes are the distinct triangle gradients plus the hull centroid, valued
    exactly and triangulated by their lower envelope. A hull of zero area
    returns a :class:`DegenerateConjugate`.
    """
    tol = tolerances or Tolerances()
    _require_convex(f, tol)
    grads = f.gradients
    scale = max(1.0, float(np.max(np.abs(grads))))
    snap = 1e-9 * scale
    _, first = np.unique(np.round(grads / snap).astype(np.int64), axis=0, return_index=True)
    nodes = grads[np.sort(first)]
    hull = convex_hull_2d(nodes)
    if len(hull) < 3 or polygon_area(hull) <= tol.geom * scale * scale:
        return DegenerateConjugate(slopes=hull, values=conjugate_at(f, hull))
    centroid = polygon_centroid(hull)
    if np.min(np.linalg.norm(nodes - centroid, axis=1)) > snap:
        nodes = np.vstack([nodes, centroid])
    return PLConvexFunction.from_samples(nodes, conjugate_at(f, nodes), tol=tol.geom)


def supporting_hyperplane(f: PLConvexFunction, vertex_index: int) -> tuple[FloatArray, float]:
    """Slope and offset of a supporting affine function at a vertex.

    The slope is the centroid of the subdifferential polytope at interior
    vertices and the mean incident gradient on the boundary.
    """
    grads = f.gradients[f.mesh.vertex_triangles[vertex_index]]
    assert f.mesh.boundary is not None
    if f.mesh.boundary[vertex_index]:
        slope = grads.mean(axis=0)
    else:
        slope = polygon_centroid(convex_hull_2d(grads))
    x = f.mesh.vertices[vertex_index]
    return slope, float(f.values[vertex_index] - slope @ x)


def aleksandrov_bound(
    f: PLConvexFunction, tolerances: Optional[Tolerances] = None
) -> AleksandrovReport:
    """Check ``|u(x0)|^n <= C_n D^(n-1) dist(x0, boundary) |du(domain)|``.

    The bound is checked at every interior vertex.
    """
    tol = tolerances or Tolerances()
    n = 2
    bidx = f.mesh.boundary_indices
    if np.any(np.abs(f.values[bidx]) > tol.bc):
        raise BoundaryDataError("Aleksandrov bound needs zero boundary values.")
    measure = ma_measure(f, tol)
    domain = f.mesh.domain
    constant = n / unit_ball_volume(n - 1)
    diameter = domain.diameter
    interior = f.mesh.interior
    lhs = np.abs(f.values[interior]) ** n
    rhs = constant * diameter ** (n - 1) * domain.distance_to_boundary(
        f.mesh.vertices[interior]
    ) * measure.total
    passed = bool(np.all(lhs <= rhs * (1.0 + tol.ineq) + tol.bc))
    return AleksandrovReport(
        passed=passed,
        constant=constant,
        diameter=diameter,
        total_mass=measure.total,
        vertices=interior.tolist(),
        lhs=lhs.tolist(),
        rhs=rhs.tolist(),
    )


def _psd_matrix(m: Union[SymmetricMatrix2, ArrayLike], tol: float, name: str) -> FloatArray:
    arr = m.as_array() if isinstance(m, SymmetricMatrix2) else np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ParameterError(f"{name} must be a square matrix.")
    arr = 0.5 * (arr + arr.T)
    lam = np.linalg.eigvalsh(arr)
    if lam[0] < -tol * max(1.0, float(np.max(np.abs(lam)))):
        raise PSDError(f"{name} is not positive semidefinite (min eigenvalue {lam[0]:.3e}).")
    return arr


def _verdict(name: str, lhs: float, rhs: float, tol: float) -> LemmaVerdict:
    """``lhs <= rhs`` with relative slack."""
    slack = tol * max(1.0, abs(lhs), abs(rhs))
    return LemmaVerdict(name=name, passed=bool(lhs <= rhs + slack), lhs=lhs, rhs=rhs)


def matrix_lemma_checks(
    a: Union[SymmetricMatrix2, ArrayLike],
    b: Union[SymmetricMatrix2, ArrayLike],
    lam: float,
    theta: float,
    *,
    vector: Optional[ArrayLike] = None,
    tolerances: Optional[Tolerances] = None,
) -> MatrixLemmaVerdicts:
    """Evaluate the three matrix inequalities for PSD ``a`` and ``b``.

    * concavity: ``det(lam A + (1-lam) B)^theta >= lam det(A)^theta + (1-lam) det(B)^theta``
    * trace: ``det A det B <= (trace(AB)/n)^n``
    * uv_trace: ``A b . b >= |b|^2 / trace(A^-1)`` (right side 0 for singular A)
    """
    tol = tolerances or Tolerances()
    A = _psd_matrix(a, tol.psd, "A")
    B = _psd_matrix(b, tol.psd, "B")
    n = A.shape[0]
    if B.shape != A.shape:
        raise ParameterError("A and B must have the same size.")
    if not 0.0 <= lam <= 1.0:
        raise ParameterError("lambda must lie in [0, 1].")
    if not 0.0 <= theta <= 1.0 / n + 1e-15:
        raise ParameterError(f"theta must lie in [0, 1/{n}].")

    def det(m: FloatArray) -> float:
        return max(float(np.linalg.det(m)), 0.0)

    concave_lhs = det(lam * A + (1.0 - lam) * B) ** theta
    concave_rhs = lam * det(A) ** theta + (1.0 - lam) * det(B) ** theta
    trace_lhs = det(A) * det(B)
    trace_rhs = max(float(np.trace(A @ B)) / n, 0.0) ** n

    vec = np.ones(n) if vector is None else np.asarray(vector, dtype=float).reshape(n)
    quad = float(vec @ A @ vec)
    lam_min = float(np.linalg.eigvalsh(A)[0])
    if lam_min <= tol.psd * max(1.0, float(np.trace(A))):
        uv_rhs = 0.0
    else:
        uv_rhs = float(vec @ vec) / float(np.trace(np.linalg.inv(A)))

    return MatrixLemmaVerdicts(
        concavity=_verdict("concavity", concave_rhs, concave_lhs, tol.ineq),
        trace=_verdict("trace", trace_lhs, trace_rhs, tol.ineq),
        uv_trace=_verdict("uv_trace", uv_rhs, quad, tol.ineq),
    )


def random_psd(rng: np.random.Generator, n: int = 2) -> FloatArray:
    """``G G^T`` with standard normal ``G``."""
    g = rng.standard_normal((n, n))
    return np.asarray(g @ g.T)


def _same_vertices(u: PLConvexFunction, v: PLConvexFunction) -> None:
    if u.mesh.vertices.shape != v.mesh.vertices.shape or not np.array_equal(
        u.mesh.vertices, v.mesh.vertices
    ):
        raise MeshMismatchError("Functions must be defined on the same mesh vertices.")


def comparison_check(
    u: PLConvexFunction, v: PLConvexFunction, tolerances: Optional[Tolerances] = None
) -> ComparisonVerdict:
    """Comparison principle: ``Mv >= Mu`` and ``u >= v`` on the boundary give ``u >= v``."""
    tol = tolerances or Tolerances()
    _same_vertices(u, v)
    mu = ma_measure(u, tol)
    mv = ma_measure(v, tol)
    shared = np.intersect1d(mu.indices, mv.indices)
    mass_u = dict(zip(mu.indices.tolist(), mu.masses))  # type: ignore[union-attr]
    mass_v = dict(zip(mv.indices.tolist(), mv.masses))  # type: ignore[union-attr]
    mass_ok = all(mass_v[i] >= mass_u[i] - tol.meas for i in shared.tolist())
    bidx = u.mesh.boundary_indices
    boundary_ok = bool(np.all(u.values[bidx] >= v.values[bidx] - tol.cmp))
    gap = u.values - v.values
    k = int(np.argmin(gap))
    detail = ""
    if not mass_ok:
        detail = "measure ordering violated"
    elif not boundary_ok:
        detail = "boundary ordering violated"
    return ComparisonVerdict(
        passed=bool(gap[k] >= -tol.cmp),
        min_gap=float(gap[k]),
        worst_vertex=k,
        preconditions_met=mass_ok and boundary_ok,
        detail=detail,
    )


def normal_mapping_containment(
    u: PLConvexFunction, v: PLConvexFunction, tolerances: Optional[Tolerances] = None
) -> ContainmentVerdict:
    """Check that every slope of ``v`` at an interior vertex is a slope of ``u`` somewhere inside.

    ``p`` belongs to the subdifferential of ``u`` at an interior vertex exactly
    when an interior vertex attains ``max_x (x . p - u(x))``.
    """
    tol = tolerances or Tolerances()
    _same_vertices(u, v)
    slopes = np.vstack(
        [subdifferential(v, int(i)).slopes for i in v.mesh.interior]
    )
    scores = slopes @ u.mesh.vertices.T - u.values[None, :]
    best = np.max(scores, axis=1)
    best_inside = np.max(scores[:, u.mesh.interior], axis=1)
    scale = max(1.0, float(np.max(np.abs(scores))))
    outside = int(np.sum(best_inside < best - tol.ineq * scale))
    return ContainmentVerdict(passed=outside == 0, checked_slopes=len(slopes), outside=outside)


def compose_linear(f: PLConvexFunction, transform: ArrayLike) -> PLConvexFunction:
    """``v(x) = f(T x)`` on the mesh pulled back by ``T``."""
    T = np.asarray(transform, dtype=float).reshape(2, 2)
    if abs(float(np.linalg.det(T))) <= 1e-300:
        raise ParameterError("Transform must be invertible.")
    pulled = np.linalg.solve(T, f.mesh.vertices.T).T
    return PLConvexFunction(TriMesh(pulled, f.mesh.triangles, f.mesh.boundary), f.values)


def slope_bound_check(
    f: PLConvexFunction, tolerances: Optional[Tolerances] = None
) -> SlopeBoundReport:
    """``|p| <= (max_boundary f - f(x)) / dist(x, boundary)`` for every slope at interior x."""
    tol = tolerances or Tolerances()
    _require_convex(f, tol)
    top = float(np.max(f.values[f.mesh.boundary_indices]))
    domain = f.mesh.domain
    worst, worst_vertex = 0.0, None
    for i in f.mesh.interior:
        dist = float(domain.distance_to_boundary(f.mesh.vertices[i])[0])
        if dist <= 0.0:
            continue
        bound = (top - f.values[i]) / dist
        slope = float(np.max(np.linalg.norm(subdifferential(f, int(i)).slopes, axis=1)))
        ratio = slope / bound if bound > 0 else (math.inf if slope > 0 else 0.0)
        if ratio > worst:
            worst, worst_vertex = ratio, int(i)
    return SlopeBoundReport(
        passed=worst <= 1.0 + tol.ineq, worst_ratio=worst, worst_vertex=worst_vertex
    )
