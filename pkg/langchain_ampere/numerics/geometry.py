"""Planar primitives: robust orientation, monotone-chain hulls, polygon queries."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import gamma

FloatArray = NDArray[np.float64]

# Forward error bound of the floating orientation determinant.
_ORIENT_ERRBOUND = 3.3306690738754716e-16


def orient2d(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> int:
    """Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear.

    The floating determinant decides unless it is within its error bound, in
    which case the sign is recomputed exactly with rationals.
    """
    detleft = (b[0] - a[0]) * (c[1] - a[1])
    detright = (b[1] - a[1]) * (c[0] - a[0])
    det = detleft - detright
    bound = _ORIENT_ERRBOUND * (abs(detleft) + abs(detright))
    if det > bound:
        return 1
    if -det > bound:
        return -1
    if bound == 0.0:
        return 0
    ax, ay = Fraction(a[0]), Fraction(a[1])
    exact = (Fraction(b[0]) - ax) * (Fraction(c[1]) - ay) - (Fraction(b[1]) - ay) * (
        Fraction(c[0]) - ax
    )
    return (exact > 0) - (exact < 0)


def convex_hull_2d(points: ArrayLike) -> FloatArray:
    """Counterclockwise convex hull by Andrew's monotone chain.

    Collinear points are dropped. Degenerate inputs give one point or the two
    endpoints of a segment.
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts

    lower: list[FloatArray] = []
    for p in pts:
        while len(lower) >= 2 and orient2d(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[FloatArray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and orient2d(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return np.array(hull, dtype=float)


def polygon_area(polygon: ArrayLike) -> float:
    """Signed shoelace area; positive for counterclockwise order."""
    poly = np.asarray(polygon, dtype=float).reshape(-1, 2)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def polygon_centroid(polygon: ArrayLike) -> FloatArray:
    """Area centroid, falling back to the vertex mean for degenerate input."""
    poly = np.asarray(polygon, dtype=float).reshape(-1, 2)
    area = polygon_area(poly)
    if len(poly) < 3 or abs(area) <= 1e-300:
        return poly.mean(axis=0)
    nxt = np.roll(poly, -1, axis=0)
    cross = poly[:, 0] * nxt[:, 1] - nxt[:, 0] * poly[:, 1]
    cx = float(np.sum((poly[:, 0] + nxt[:, 0]) * cross)) / (6.0 * area)
    cy = float(np.sum((poly[:, 1] + nxt[:, 1]) * cross)) / (6.0 * area)
    return np.array([cx, cy])


def polygon_diameter(polygon: ArrayLike) -> float:
    poly = np.asarray(polygon, dtype=float).reshape(-1, 2)
    if len(poly) < 2:
        return 0.0
    diff = poly[:, None, :] - poly[None, :, :]
    return float(np.sqrt(np.max(np.einsum("ijk,ijk->ij", diff, diff))))


def points_in_convex_polygon(
    points: ArrayLike, polygon: ArrayLike, tol: float
) -> NDArray[np.bool_]:
    """Membership of points in a counterclockwise convex polygon.

    Points and segments are treated as polygons of zero area, with ``tol`` as
    the distance allowance.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    poly = np.asarray(polygon, dtype=float).reshape(-1, 2)
    if len(poly) == 1:
        return np.asarray(np.linalg.norm(pts - poly[0], axis=1) <= tol)
    if len(poly) == 2:
        return np.asarray(segment_distance(pts, poly[0], poly[1]) <= tol)
    edges = np.roll(poly, -1, axis=0) - poly
    lengths = np.linalg.norm(edges, axis=1)
    rel = pts[:, None, :] - poly[None, :, :]
    cross = edges[None, :, 0] * rel[:, :, 1] - edges[None, :, 1] * rel[:, :, 0]
    return np.asarray(np.all(cross >= -tol * lengths[None, :], axis=1))


def segment_distance(points: ArrayLike, a: ArrayLike, b: ArrayLike) -> FloatArray:
    """Euclidean distance from each point to the segment [a, b]."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = b - a
    denom = float(np.dot(d, d))
    if denom == 0.0:
        return np.asarray(np.linalg.norm(pts - a, axis=1))
    s = np.clip((pts - a) @ d / denom, 0.0, 1.0)
    return np.asarray(np.linalg.norm(pts - (a + s[:, None] * d), axis=1))


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball of R^n (omega_n)."""
    return float(np.pi ** (n / 2.0) / gamma(n / 2.0 + 1.0))


def polygons_intersect(first: ArrayLike, second: ArrayLike, tol: float = 0.0) -> bool:
    """Separating-axis test for two convex polygons given counterclockwise.

    Polygons that only touch along an edge or at a corner (within ``tol``) do
    not intersect.
    """
    p = np.asarray(first, dtype=float).reshape(-1, 2)
    q = np.asarray(second, dtype=float).reshape(-1, 2)
    for poly in (p, q):
        if len(poly) < 2:
            continue
        edges = np.roll(poly, -1, axis=0) - poly
        axes = np.column_stack([edges[:, 1], -edges[:, 0]])
        norms = np.linalg.norm(axes, axis=1)
        axes = axes[norms > 0] / norms[norms > 0, None]
        proj_p = p @ axes.T
        proj_q = q @ axes.T
        separated = (proj_p.max(axis=0) <= proj_q.min(axis=0) + tol) | (
            proj_q.max(axis=0) <= proj_p.min(axis=0) + tol
        )
        if np.any(separated):
            return False
    return True
