"""Sections of convex functions and the affine geometry around them.

A section ``S_u(x, p, h)`` is the connected component containing ``x`` of
``{u < u(x) + p . (y - x) + h}``. Sections are extracted from grid functions
(linear interpolation along grid edges) and from piecewise-linear functions
(exact edge crossings), and ray-traced for analytic functions. John ellipsoids
normalize convex polygons; engulfing, inclusion/exclusion, covering and
inclusion-of-halves probes measure the constants of section geometry.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from langchain_ampere.errors import ConvergenceError, DomainError, ParameterError
from langchain_ampere.numerics.convex_core import PLConvexFunction, supporting_hyperplane
from langchain_ampere.numerics.geometry import (
    FloatArray,
    convex_hull_2d,
    points_in_convex_polygon,
    polygon_area,
    polygon_diameter,
    polygons_intersect,
)
from langchain_ampere.numerics.grid import BOUNDARY, INTERIOR, GridFunction
from langchain_ampere.numerics.mesh import ConvexDomain, IntArray

logger = logging.getLogger(__name__)

ConvexFunctionLike = Union[GridFunction, PLConvexFunction]
PointFn = Callable[[FloatArray], FloatArray]


# ---------------------------------------------------------------------------
# Ellipsoids and John's lemma
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``{x : (x - c)^T shape (x - c) <= 1}`` with ``shape`` positive definite."""

    center: FloatArray
    shape: FloatArray

    def __post_init__(self) -> None:
        c = np.asarray(self.center, dtype=float).reshape(2)
        s = np.asarray(self.shape, dtype=float).reshape(2, 2)
        s = 0.5 * (s + s.T)
        if np.linalg.eigvalsh(s)[0] <= 0:
            raise ParameterError("Ellipsoid shape must be positive definite.")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", s)

    @classmethod
    def from_axes(cls, center: ArrayLike, axes: ArrayLike) -> "Ellipsoid":
        """Image of the unit disk under ``y -> center + axes @ y`` (``axes`` symmetric PD)."""
        b = np.asarray(axes, dtype=float)
        inv = np.linalg.inv(b)
        return cls(np.asarray(center, dtype=float), inv.T @ inv)

    @property
    def axes(self) -> FloatArray:
        """Symmetric square root of ``shape^-1``."""
        lam, vec = np.linalg.eigh(self.shape)
        return np.asarray(vec @ np.diag(1.0 / np.sqrt(lam)) @ vec.T)

    @property
    def volume(self) -> float:
        return math.pi / math.sqrt(float(np.linalg.det(self.shape)))

    def contains(self, points: ArrayLike, tol: float = 1e-12) -> NDArray[np.bool_]:
        d = np.asarray(points, dtype=float).reshape(-1, 2) - self.center
        return np.asarray(np.einsum("ij,jk,ik->i", d, self.shape, d) <= 1.0 + tol)

    def boundary_points(self, k: int = 128) -> FloatArray:
        theta = 2.0 * np.pi * np.arange(k) / k
        circle = np.column_stack([np.cos(theta), np.sin(theta)])
        return np.asarray(self.center + circle @ self.axes.T)

    def dilate(self, factor: float) -> "Ellipsoid":
        return Ellipsoid(self.center, self.shape / (factor * factor))

    def affine_map(self) -> tuple[FloatArray, FloatArray]:
        """``(M, b)`` with ``T(x) = M x + b`` sending the ellipsoid to the unit disk."""
        lam, vec = np.linalg.eigh(self.shape)
        m = vec @ np.diag(np.sqrt(lam)) @ vec.T
        return np.asarray(m), np.asarray(-m @ self.center)

    def to_dict(self) -> dict[str, list]:
        return {"center": self.center.tolist(), "shape": self.shape.tolist()}


class JohnContainment(BaseModel):
    """Slacks of ``E inside K inside c + n (E - c)``; positive means violated."""

    inner_violation: float
    outer_violation: float
    passed: bool


class Normalization(BaseModel):
    """Affine map ``T(x) = M x + b`` with ``B_1 inside T(K) inside B_n``."""

    matrix: list[list[float]]
    offset: list[float]
    vertices: list[list[float]]
    inner_radius: float
    outer_radius: float
    passed: bool


def _mvie_parts(
    z: FloatArray, normals: FloatArray, offsets: FloatArray
) -> Optional[tuple[float, FloatArray, FloatArray, FloatArray, FloatArray]]:
    p, q, r, c1, c2 = z
    det = p * r - q * q
    if p <= 0 or det <= 0:
        return None
    ax, ay = normals[:, 0], normals[:, 1]
    bu = np.column_stack([p * ax + q * ay, q * ax + r * ay])
    s = offsets - (ax * c1 + ay * c2)
    big_f = s * s - np.sum(bu * bu, axis=1)
    if np.any(s <= 0) or np.any(big_f <= 0):
        return None
    return det, bu, s, big_f, np.column_stack([ax, ay])


def _mvie_objective(
    z: FloatArray, t: float, normals: FloatArray, offsets: FloatArray
) -> tuple[float, FloatArray, FloatArray]:
    parts = _mvie_parts(z, normals, offsets)
    if parts is None:
        return math.inf, np.zeros(5), np.eye(5)
    det, bu, s, big_f, a = parts
    p, q, r = z[:3]
    value = -t * math.log(det) - float(np.sum(np.log(big_f)))

    grad = np.zeros(5)
    hess = np.zeros((5, 5))
    gdet = np.array([r, -2.0 * q, p])
    hdet = np.array([[0.0, 0.0, 1.0], [0.0, -2.0, 0.0], [1.0, 0.0, 0.0]])
    grad[:3] += -t * gdet / det
    hess[:3, :3] += t * (np.outer(gdet, gdet) / det**2 - hdet / det)

    for k in range(len(offsets)):
        ax, ay = a[k]
        m = np.array([[ax, ay, 0.0], [0.0, ax, ay]])
        gf = np.zeros(5)
        gf[:3] = -2.0 * m.T @ bu[k]
        gf[3:] = -2.0 * s[k] * a[k]
        hf = np.zeros((5, 5))
        hf[:3, :3] = -2.0 * m.T @ m
        hf[3:, 3:] = 2.0 * np.outer(a[k], a[k])
        grad += -gf / big_f[k]
        hess += np.outer(gf, gf) / big_f[k] ** 2 - hf / big_f[k]
    return value, grad, hess


def _newton_stage(
    z: FloatArray, t: float, normals: FloatArray, offsets: FloatArray
) -> FloatArray:
    """Damped Newton on the barrier objective at fixed ``t``.

    Stops once the decrement is below 1e-8 or the objective stops improving.
    """
    decrement = math.inf
    for _ in range(100):
        value, grad, hess = _mvie_objective(z, t, normals, offsets)
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("Singular barrier Hessian.") from exc
        decrement = float(-grad @ step)
        if decrement < 1e-8:
            return z
        s = 1.0
        trial, _, _ = _mvie_objective(z + step, t, normals, offsets)
        while trial > value - 0.25 * s * decrement:
            s *= 0.5
            if s < 1e-14:
                return z
            trial, _, _ = _mvie_objective(z + s * step, t, normals, offsets)
        z = z + s * step
        if value - trial <= 1e-15 * max(1.0, abs(value)):
            return z
    if decrement > 1e-4:
        raise ConvergenceError(
            f"John ellipsoid Newton stage did not converge (decrement {decrement:.3g})."
        )
    return z


def john_ellipsoid(domain: ConvexDomain, tol: float = 1e-12) -> Ellipsoid:
    """Maximum-volume inscribed ellipse of a convex polygon.

    Log-barrier interior point method in ``(B, c)`` with ``E = c + B(unit disk)``:
    maximize ``log det B`` subject to ``|B a_i| <= b_i - a_i . c`` for each edge.

    Raises:
        ConvergenceError: If a Newton stage stalls.
    """
    hp = domain.half_planes
    normals, offsets = hp[:, :2], hp[:, 2]
    center = domain.vertices.mean(axis=0)
    slack = float(np.min(offsets - normals @ center))
    if slack <= 0:
        raise DomainError("Polygon has no interior.")
    z = np.array([0.5 * slack, 0.0, 0.5 * slack, center[0], center[1]])
    m = len(offsets)
    t = 1.0
    while True:
        z = _newton_stage(z, t, normals, offsets)
        if 2.0 * m / t <= 1e-10:
            break
        t *= 10.0
    b = np.array([[z[0], z[1]], [z[1], z[2]]])
    ellipse = Ellipsoid.from_axes(z[3:], b)
    logger.debug("John ellipsoid center=%s volume=%.6g", ellipse.center, ellipse.volume)
    return ellipse


def john_containment(domain: ConvexDomain, ellipse: Ellipsoid, n: int = 2) -> JohnContainment:
    """Check ``E inside K`` (support function per edge) and ``K inside c + n (E - c)``."""
    hp = domain.half_planes
    b = ellipse.axes
    support = hp[:, :2] @ ellipse.center + np.linalg.norm(hp[:, :2] @ b, axis=1)
    inner = float(np.max(support - hp[:, 2]))
    d = domain.vertices - ellipse.center
    gauge = np.sqrt(np.einsum("ij,jk,ik->i", d, ellipse.shape, d))
    outer = float(np.max(gauge) - n)
    return JohnContainment(
        inner_violation=inner,
        outer_violation=outer,
        passed=inner <= 1e-6 * domain.diameter and outer <= 1e-6 * n,
    )


def normalize(domain: ConvexDomain, tol: float = 1e-9) -> tuple[Normalization, ConvexDomain]:
    """Affine normalization sending the John ellipse to the unit disk."""
    ellipse = john_ellipsoid(domain)
    m, b = ellipse.affine_map()
    image = ConvexDomain(domain.vertices @ m.T + b)
    inner = float(np.min(image.half_planes[:, 2]))
    outer = float(np.max(np.linalg.norm(image.vertices, axis=1)))
    report = Normalization(
        matrix=m.tolist(),
        offset=b.tolist(),
        vertices=image.vertices.tolist(),
        inner_radius=inner,
        outer_radius=outer,
        passed=inner >= 1.0 - tol and outer <= 2.0 + tol,
    )
    return report, image


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Section:
    """Realized section with its boundary polygon.

    ``realized`` indexes grid nodes (flat, row-major) or mesh vertices.
    """

    center: FloatArray
    slope: FloatArray
    height: float
    base: float
    realized: IntArray
    polygon: FloatArray
    clipped: bool

    @property
    def volume(self) -> float:
        return max(polygon_area(self.polygon), 0.0)

    @property
    def diameter(self) -> float:
        return polygon_diameter(self.polygon)

    def support(self, points: ArrayLike) -> FloatArray:
        """Supporting affine function ``u(x0) + p . (y - x0)`` at points."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.asarray(self.base + (pts - self.center) @ self.slope)

    def contains(self, points: ArrayLike, tol: float = 1e-9) -> NDArray[np.bool_]:
        return points_in_convex_polygon(points, self.polygon, tol)

    def to_row(self) -> dict[str, float]:
        return {
            "h": self.height,
            "volume": self.volume,
            "ratio": self.volume / self.height,
            "clipped": float(self.clipped),
        }


class _GridSource:
    def __init__(self, u: GridFunction) -> None:
        self.u = u
        self.gx, self.gy = u.gradient()
        xx, yy = u.coords
        self.flat_points = np.column_stack([xx.ravel(), yy.ravel()])

    def anchor(self, x0: ArrayLike) -> int:
        j, i = self.u.node_of(x0)
        if self.u.mask[j, i] != INTERIOR:
            raise DomainError("Section center must be an interior node.")
        return j * self.u.mask.shape[1] + i

    def point(self, index: int) -> FloatArray:
        return np.asarray(self.flat_points[index])

    def value(self, index: int) -> float:
        return float(self.u.values.ravel()[index])

    def slope(self, index: int) -> FloatArray:
        return np.array([self.gx.ravel()[index], self.gy.ravel()[index]])

    def values_at(self, points: ArrayLike) -> FloatArray:
        return self.u.interpolate(points)

    def samplable(self, indices: IntArray) -> IntArray:
        return np.asarray(indices[self.u.mask.ravel()[indices] == INTERIOR])

    def extract(self, index: int, height: float, slope: FloatArray) -> Section:
        u = self.u
        x0 = self.point(index)
        base = self.value(index)
        xx, yy = u.coords
        phi = u.values - (base + (xx - x0[0]) * slope[0] + (yy - x0[1]) * slope[1]) - height
        below = u.in_domain & (phi < 0)
        labels, _ = ndimage.label(below)
        j0, i0 = divmod(index, u.mask.shape[1])
        comp = labels == labels[j0, i0]

        crossings: list[FloatArray] = []
        clipped = bool(np.any(comp & (u.mask == BOUNDARY)))
        for axis in (0, 1):
            a_sl = (slice(None), slice(None, -1)) if axis == 1 else (slice(None, -1), slice(None))
            b_sl = (slice(None), slice(1, None)) if axis == 1 else (slice(1, None), slice(None))
            for src, dst in ((a_sl, b_sl), (b_sl, a_sl)):
                inside = comp[src]
                other = ~comp[dst]
                edge = inside & other
                if not np.any(edge):
                    continue
                out_of_domain = edge & ~u.in_domain[dst]
                if np.any(out_of_domain):
                    clipped = True
                edge &= u.in_domain[dst]
                pa, pb = phi[src][edge], phi[dst][edge]
                s = pa / (pa - pb)
                xa, ya = xx[src][edge], yy[src][edge]
                xb, yb = xx[dst][edge], yy[dst][edge]
                crossings.append(np.column_stack([xa + s * (xb - xa), ya + s * (yb - ya)]))
        hull_points = crossings
        if clipped:
            rim = comp & (u.mask == BOUNDARY)
            hull_points = crossings + [np.column_stack([xx[rim], yy[rim]])]
        pts = np.vstack(hull_points) if hull_points else x0[None, :]
        return Section(
            center=x0,
            slope=np.asarray(slope, dtype=float),
            height=float(height),
            base=base,
            realized=np.flatnonzero(comp.ravel()),
            polygon=convex_hull_2d(pts),
            clipped=clipped,
        )


class _PLSource:
    def __init__(self, f: PLConvexFunction) -> None:
        self.f = f
        tris = f.mesh.triangles
        pairs = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
        self.edges = np.unique(np.sort(pairs, axis=1), axis=0)

    def anchor(self, x0: ArrayLike) -> int:
        p = np.asarray(x0, dtype=float).reshape(2)
        index = int(np.argmin(np.linalg.norm(self.f.mesh.vertices - p, axis=1)))
        assert self.f.mesh.boundary is not None
        if self.f.mesh.boundary[index]:
            raise DomainError("Section center must be an interior vertex.")
        return index

    def point(self, index: int) -> FloatArray:
        return np.asarray(self.f.mesh.vertices[index])

    def value(self, index: int) -> float:
        return float(self.f.values[index])

    def slope(self, index: int) -> FloatArray:
        return supporting_hyperplane(self.f, index)[0]

    def values_at(self, points: ArrayLike) -> FloatArray:
        return self.f(points)

    def samplable(self, indices: IntArray) -> IntArray:
        assert self.f.mesh.boundary is not None
        return np.asarray(indices[~self.f.mesh.boundary[indices]])

    def extract(self, index: int, height: float, slope: FloatArray) -> Section:
        f = self.f
        pts = f.mesh.vertices
        x0 = pts[index]
        base = float(f.values[index])
        phi = f.values - (base + (pts - x0) @ slope) - height
        below = phi < 0
        a, b = self.edges[:, 0], self.edges[:, 1]
        keep = below[a] & below[b]
        n = f.mesh.n_vertices
        graph = coo_matrix((np.ones(int(np.sum(keep))), (a[keep], b[keep])), shape=(n, n))
        _, labels = connected_components(graph, directed=False)
        comp = below & (labels == labels[index])

        cross = comp[a] ^ comp[b]
        ia = np.where(comp[a[cross]], a[cross], b[cross])
        ib = np.where(comp[a[cross]], b[cross], a[cross])
        s = phi[ia] / (phi[ia] - phi[ib])
        crossings = pts[ia] + s[:, None] * (pts[ib] - pts[ia])
        assert f.mesh.boundary is not None
        rim = comp & f.mesh.boundary
        clipped = bool(np.any(rim))
        hull = convex_hull_2d(np.vstack([crossings, pts[rim]]))
        return Section(
            center=x0,
            slope=np.asarray(slope, dtype=float),
            height=float(height),
            base=base,
            realized=np.flatnonzero(comp),
            polygon=hull,
            clipped=clipped,
        )


_Source = Union[_GridSource, _PLSource]


def _source(u: ConvexFunctionLike) -> _Source:
    if isinstance(u, GridFunction):
        return _GridSource(u)
    if isinstance(u, PLConvexFunction):
        return _PLSource(u)
    raise ParameterError(f"Sections need a GridFunction or PLConvexFunction, got {type(u)!r}.")


def _check_height(h: float) -> None:
    if not h > 0:
        raise ParameterError("Section height must be positive.")


def extract_section(
    u: ConvexFunctionLike, x0: ArrayLike, h: float, *, slope: Optional[ArrayLike] = None
) -> Section:
    """Section ``S_u(x0, p, h)``.

    ``x0`` snaps to the nearest grid node or mesh vertex. The default slope is
    the centered-difference gradient on grids and the subdifferential centroid
    on meshes.
    """
    _check_height(h)
    src = _source(u)
    index = src.anchor(x0)
    p = src.slope(index) if slope is None else np.asarray(slope, dtype=float).reshape(2)
    return src.extract(index, h, p)


def trace_section(
    u: PointFn,
    x0: ArrayLike,
    h: float,
    *,
    slope: Optional[ArrayLike] = None,
    directions: int = 256,
    domain: Optional[ConvexDomain] = None,
    max_radius: float = 1e3,
) -> Section:
    """Section of an analytic convex function by ray casting from ``x0``.

    Along each ray the crossing of ``u - l - h`` is bracketed by doubling and
    refined by 60 bisection steps. Rays leaving ``domain`` stop at its boundary
    and mark the section clipped.
    """
    _check_height(h)
    c = np.asarray(x0, dtype=float).reshape(2)
    base = float(u(c[None, :])[0])
    if slope is None:
        eps = 1e-6
        probe = c + eps * np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        vals = u(probe)
        p = np.array([(vals[0] - vals[1]) / (2 * eps), (vals[2] - vals[3]) / (2 * eps)])
    else:
        p = np.asarray(slope, dtype=float).reshape(2)
    theta = 2.0 * np.pi * np.arange(directions) / directions
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])

    def excess(r: FloatArray) -> FloatArray:
        pts = c + r[:, None] * dirs
        return np.asarray(u(pts) - base - (pts - c) @ p - h)

    limit = np.full(directions, max_radius)
    if domain is not None:
        hp = domain.half_planes
        rate = dirs @ hp[:, :2].T
        room = hp[:, 2] - hp[:, :2] @ c
        with np.errstate(divide="ignore"):
            ratio = np.where(rate > 0, room[None, :] / rate, np.inf)
        limit = np.minimum(limit, ratio.min(axis=1))
    hi = np.minimum(np.full(directions, math.sqrt(h)), limit)
    for _ in range(200):
        grow = (excess(hi) < 0) & (hi < limit)
        if not np.any(grow):
            break
        hi = np.where(grow, np.minimum(2.0 * hi, limit), hi)
    capped = excess(hi) < 0
    lo = np.zeros(directions)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        neg = excess(mid) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    radius = np.where(capped, limit, 0.5 * (lo + hi))
    polygon = c + radius[:, None] * dirs
    return Section(
        center=c,
        slope=p,
        height=float(h),
        base=base,
        realized=np.zeros(0, dtype=np.int64),
        polygon=convex_hull_2d(polygon),
        clipped=bool(np.any(capped)),
    )


def quadratic_section_volume(hessian: ArrayLike, h: float) -> float:
    """Area of a section of ``x^T Q x / 2``: ``2 pi h / sqrt(det Q)``."""
    q = np.asarray(hessian, dtype=float).reshape(2, 2)
    return 2.0 * math.pi * h / math.sqrt(float(np.linalg.det(q)))


def eccentric_quadratic(eps: float) -> PointFn:
    """``x1^2/(2 eps) + eps x2^2/2``; ``det D^2 u = 1`` for every ``eps``."""
    if not eps > 0:
        raise ParameterError("Eccentricity must be positive.")

    def u(points: FloatArray) -> FloatArray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.asarray(p[:, 0] ** 2 / (2.0 * eps) + eps * p[:, 1] ** 2 / 2.0)

    return u


def ellipse_section_volume(eps: float, t: float) -> float:
    """Area of the height-``t`` section of :func:`eccentric_quadratic` at 0, always ``2 pi t``."""
    _check_height(t)
    return math.pi * math.sqrt(2.0 * eps * t) * math.sqrt(2.0 * t / eps)


# ---------------------------------------------------------------------------
# Probes
# ---------------------------------------------------------------------------


class VolumeRow(BaseModel):
    h: float
    volume: float
    ratio: float
    clipped: bool


class VolumeSweep(BaseModel):
    """Section volumes over heights; the verdict ignores clipped rows."""

    rows: list[VolumeRow]
    spread: float
    max_ratio: float
    ratio_bound: float
    passed: bool


def section_volume_sweep(
    u: ConvexFunctionLike, x0: ArrayLike, heights: Sequence[float], ratio_bound: float
) -> VolumeSweep:
    """Tabulate ``|S(x0, h)| / h`` and compare its spread with ``ratio_bound``."""
    src = _source(u)
    index = src.anchor(x0)
    p = src.slope(index)
    rows = []
    for h in heights:
        _check_height(h)
        sec = src.extract(index, h, p)
        if sec.clipped:
            logger.warning("Section at height %.4g touches the boundary; excluded.", h)
        rows.append(VolumeRow(h=h, volume=sec.volume, ratio=sec.volume / h, clipped=sec.clipped))
    kept = [r.ratio for r in rows if not r.clipped]
    spread = max(kept) / min(kept) if kept and min(kept) > 0 else math.inf
    return VolumeSweep(
        rows=rows,
        spread=spread,
        max_ratio=max((r.ratio for r in rows), default=0.0),
        ratio_bound=ratio_bound,
        passed=bool(kept) and spread <= ratio_bound,
    )


class EngulfingReport(BaseModel):
    """Measured engulfing constant and the pair that needed it."""

    theta: float
    pairs: int
    skipped: int
    worst_center: Optional[list[float]] = None
    worst_height: Optional[float] = None
    worst_point: Optional[list[float]] = None


def _sample_indices(
    src: _Source, sec: Section, count: int, rng: np.random.Generator
) -> IntArray:
    pool = src.samplable(sec.realized)
    if len(pool) == 0:
        return pool
    dist = np.linalg.norm(np.array([src.point(int(i)) for i in pool]) - sec.center, axis=1)
    far = pool[int(np.argmax(dist))]
    rest = rng.choice(pool, size=min(count - 1, len(pool)), replace=False) if count > 1 else []
    return np.unique(np.concatenate([[far], np.asarray(rest, dtype=np.int64)])).astype(np.int64)


def engulfing_constant(
    u: ConvexFunctionLike,
    samples: Sequence[tuple[ArrayLike, float]],
    *,
    points_per_section: int = 8,
    seed: int = 0,
    theta_range: tuple[float, float] = (2.0, 64.0),
    iterations: int = 40,
) -> EngulfingReport:
    """Smallest ``theta`` with ``S(y, h) inside S(x, theta h)`` over sampled ``x in S(y, h)``.

    Pairs whose ``S(y, 2h)`` is clipped are skipped. Containment is tested on the
    polygon vertices of the inner section.
    """
    src = _source(u)
    rng = np.random.default_rng(seed)
    lo_bound, hi_bound = theta_range
    best = lo_bound
    worst: tuple[Optional[FloatArray], Optional[float], Optional[FloatArray]] = (None, None, None)
    pairs = skipped = 0
    for y, h in samples:
        _check_height(h)
        index = src.anchor(y)
        p = src.slope(index)
        if src.extract(index, 2.0 * h, p).clipped:
            skipped += 1
            continue
        inner = src.extract(index, h, p)
        verts = inner.polygon
        u_verts = src.values_at(verts)
        for x_index in _sample_indices(src, inner, points_per_section, rng):
            x = src.point(int(x_index))
            px = src.slope(int(x_index))
            gap = u_verts - (src.value(int(x_index)) + (verts - x) @ px)
            lo, hi = lo_bound, hi_bound
            if np.max(gap) < lo * h:
                hi = lo
            else:
                for _ in range(iterations):
                    mid = 0.5 * (lo + hi)
                    if np.max(gap) < mid * h:
                        hi = mid
                    else:
                        lo = mid
            pairs += 1
            if hi > best or worst[0] is None:
                best = max(best, hi)
                worst = (inner.center, h, x)
    if pairs == 0:
        raise ParameterError("No admissible section samples for the engulfing probe.")
    c, hh, x = worst
    return EngulfingReport(
        theta=best,
        pairs=pairs,
        skipped=skipped,
        worst_center=None if c is None else c.tolist(),
        worst_height=hh,
        worst_point=None if x is None else x.tolist(),
    )


class InclusionReport(BaseModel):
    """Empirical constants of ``S(x1, c (s-r)^p1 t) inside S(x0, s t)`` and its exclusion twin."""

    inclusion_c: float
    exclusion_c: Optional[float]
    samples: int
    p1: float
    passed: bool


def inclusion_exclusion_probe(
    u: ConvexFunctionLike,
    x0: ArrayLike,
    t: float,
    r: float,
    s: float,
    *,
    p1: float = 1.0,
    samples: int = 50,
    seed: int = 0,
) -> InclusionReport:
    """Largest ``c`` keeping sections of points of ``S(x0, r t)`` inside ``S(x0, s t)``.

    For a center ``x1`` inside the outer section the largest admissible height is
    the minimum of ``u - l_x1`` over the outer boundary. The exclusion probe takes
    centers in ``S(x0, 2t)`` outside ``S(x0, s t)`` and the minimum of
    ``u - l_x1`` over ``S(x0, r t)``.
    """
    if not 0.0 < r < s <= 1.0:
        raise ParameterError("Inclusion probe needs 0 < r < s <= 1.")
    _check_height(t)
    src = _source(u)
    rng = np.random.default_rng(seed)
    index = src.anchor(x0)
    p = src.slope(index)
    if src.extract(index, 2.0 * t, p).clipped:
        raise DomainError("S(x0, 2t) is not compactly included.")
    outer = src.extract(index, s * t, p)
    inner = src.extract(index, r * t, p)
    scale = (s - r) ** p1 * t

    verts = outer.polygon
    u_verts = src.values_at(verts)
    inclusion = math.inf
    chosen = _sample_indices(src, inner, samples, rng)
    for x_index in chosen:
        x = src.point(int(x_index))
        gap = u_verts - (src.value(int(x_index)) + (verts - x) @ src.slope(int(x_index)))
        inclusion = min(inclusion, float(np.min(gap)) / scale)

    wide = src.extract(index, 2.0 * t, p)
    inner_pts = np.vstack([inner.polygon, np.array([src.point(int(i)) for i in inner.realized])])
    u_inner = src.values_at(inner_pts)
    outside = np.setdiff1d(src.samplable(wide.realized), outer.realized)
    exclusion: Optional[float] = None
    if len(outside):
        picks = rng.choice(outside, size=min(samples, len(outside)), replace=False)
        exclusion = math.inf
        for x_index in picks:
            x = src.point(int(x_index))
            gap = u_inner - (src.value(int(x_index)) + (inner_pts - x) @ src.slope(int(x_index)))
            exclusion = min(exclusion, float(np.min(gap)) / scale)
    return InclusionReport(
        inclusion_c=inclusion,
        exclusion_c=exclusion,
        samples=len(chosen),
        p1=p1,
        passed=inclusion > 0,
    )


class SectionDescriptor(BaseModel):
    center: list[float]
    height: float


class CoveringSelection(BaseModel):
    """Disjoint sections chosen bucket by bucket and the dilation they need."""

    chosen: list[SectionDescriptor] = Field(default_factory=list)
    dilation: float
    required_dilation: float
    covered: bool


def vitali_select(
    u: ConvexFunctionLike,
    family: Sequence[tuple[ArrayLike, float]],
    *,
    theta0: float = 4.0,
) -> CoveringSelection:
    """Greedy disjoint selection over dyadic height buckets.

    Bucket ``i`` holds heights in ``(H / 2^i, H / 2^(i-1)]``; inside a bucket,
    sections are visited by descending height, then by center. The dilation is
    ``K = 2 theta0^2``.
    """
    dilation = 2.0 * theta0 * theta0
    if not family:
        return CoveringSelection(dilation=dilation, required_dilation=0.0, covered=True)
    src = _source(u)
    sections = []
    for center, h in family:
        _check_height(h)
        index = src.anchor(center)
        sec = src.extract(index, h, src.slope(index))
        if sec.clipped:
            raise DomainError("Covering needs compactly included sections.")
        sections.append((index, sec))
    top = max(sec.height for _, sec in sections)

    def bucket(h: float) -> int:
        return int(math.floor(math.log2(top / h))) + 1

    order = sorted(
        range(len(sections)),
        key=lambda k: (
            bucket(sections[k][1].height),
            -sections[k][1].height,
            tuple(sections[k][1].center),
        ),
    )
    chosen: list[Section] = []
    for k in order:
        sec = sections[k][1]
        if all(not polygons_intersect(sec.polygon, c.polygon) for c in chosen):
            chosen.append(sec)

    required = 0.0
    for _, sec in sections:
        verts = sec.polygon
        u_verts = src.values_at(verts)
        need = math.inf
        for c in chosen:
            if sec is not c and not polygons_intersect(sec.polygon, c.polygon):
                continue
            gap = u_verts - c.support(verts)
            need = min(need, float(np.max(gap)) / c.height)
        required = max(required, need)
    return CoveringSelection(
        chosen=[SectionDescriptor(center=c.center.tolist(), height=c.height) for c in chosen],
        dilation=dilation,
        required_dilation=required,
        covered=required <= dilation,
    )


def _gauge(polygon: FloatArray, center: FloatArray, points: FloatArray) -> FloatArray:
    """Minkowski gauge of a convex polygon about an interior center."""
    edges = np.roll(polygon, -1, axis=0) - polygon
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    offsets = np.einsum("ij,ij->i", normals, polygon - center)
    return np.asarray(np.max(((points - center) @ normals.T) / offsets[None, :], axis=1))


class C1AlphaReport(BaseModel):
    """Largest ``delta`` with ``(1/2 + delta) S(0,1) inside S(0,1/2) inside (1 - delta) S(0,1)``."""

    delta: float
    inner_delta: float
    outer_delta: float
    flagged: bool


def c1alpha_inclusion_probe(
    u: ConvexFunctionLike,
    x0: ArrayLike = (0.0, 0.0),
    *,
    height: float = 1.0,
    tol: float = 1e-6,
) -> C1AlphaReport:
    """Inclusions of the half-height section between dilates of the full one."""
    src = _source(u)
    index = src.anchor(x0)
    p = src.slope(index)
    full = src.extract(index, height, p)
    half = src.extract(index, 0.5 * height, p)
    if full.clipped or half.clipped:
        raise DomainError("Inclusion probe needs compactly included sections.")
    c = full.center
    inner_delta = 1.0 / float(np.max(_gauge(half.polygon, c, full.polygon))) - 0.5
    outer_delta = 1.0 - float(np.max(_gauge(full.polygon, c, half.polygon)))
    delta = min(inner_delta, outer_delta)
    flagged = delta <= tol
    if flagged:
        logger.warning("Half-height section is not strictly inside: delta=%.3e", delta)
    return C1AlphaReport(
        delta=delta, inner_delta=inner_delta, outer_delta=outer_delta, flagged=flagged
    )


class ThetaReport(BaseModel):
    theta: float
    passed: bool


def theta_probe(
    u: ConvexFunctionLike, h: float, x0: ArrayLike = (0.0, 0.0), iterations: int = 60
) -> ThetaReport:
    """Smallest ``theta`` with ``(u - l)(x0 + theta (z - x0)) >= (u - l)(z) / 2``.

    The inequality is tested on the section boundary.
    """
    _check_height(h)
    src = _source(u)
    index = src.anchor(x0)
    p = src.slope(index)
    sec = src.extract(index, h, p)
    z = sec.polygon
    half = 0.5 * (src.values_at(z) - sec.support(z))

    def ok(theta: float) -> bool:
        y = sec.center + theta * (z - sec.center)
        return bool(np.all(src.values_at(y) - sec.support(y) >= half))

    lo, hi = 0.0, 1.0
    if not ok(hi):
        return ThetaReport(theta=1.0, passed=False)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return ThetaReport(theta=hi, passed=hi < 1.0)


class SizeExponentReport(BaseModel):
    """Fitted slope of ``log diam S(x0, h)`` against ``log h``."""

    mu: float
    heights: list[float]
    diameters: list[float]
    passed: bool


def section_size_exponent(
    u: ConvexFunctionLike, x0: ArrayLike, heights: Sequence[float]
) -> SizeExponentReport:
    if len(heights) < 2:
        raise ParameterError("Need at least two heights.")
    src = _source(u)
    index = src.anchor(x0)
    p = src.slope(index)
    diams = [src.extract(index, h, p).diameter for h in heights]
    mu = float(np.polyfit(np.log(heights), np.log(diams), 1)[0])
    return SizeExponentReport(
        mu=mu, heights=list(heights), diameters=diams, passed=0.0 < mu <= 1.0 + 1e-9
    )
