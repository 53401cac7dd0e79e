"""Uniform grids over convex domains and the functions sampled on them."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import RegularGridInterpolator
from scipy.ndimage import binary_dilation

from langchain_ampere.errors import DomainError, MeshMismatchError, ParameterError
from langchain_ampere.numerics.geometry import FloatArray
from langchain_ampere.numerics.mesh import ConvexDomain, IntArray, TriMesh, structured_mesh

logger = logging.getLogger(__name__)

EXTERIOR = 0
INTERIOR = 1
BOUNDARY = 2

FieldFn = Callable[[FloatArray, FloatArray], Any]

_NEIGHBOURS = np.ones((3, 3), dtype=bool)


def classify(domain_mask: NDArray[np.bool_]) -> NDArray[np.int8]:
    """Mask codes from an in-domain node mask.

    A node is interior when it and its eight neighbours are in the domain and it
    is not on the edge of the array.
    """
    inside = np.asarray(domain_mask, dtype=bool)
    padded = np.pad(inside, 1, constant_values=False)
    full = np.ones_like(inside)
    for dj in (-1, 0, 1):
        for di in (-1, 0, 1):
            full &= padded[1 + dj : 1 + dj + inside.shape[0], 1 + di : 1 + di + inside.shape[1]]
    mask = np.full(inside.shape, EXTERIOR, dtype=np.int8)
    mask[inside] = BOUNDARY
    mask[full] = INTERIOR
    return mask


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values on the nodes of a uniform grid.

    ``values`` and ``mask`` have shape ``(ny, nx)``; node ``(j, i)`` sits at
    ``origin + h * (i, j)``. Exterior nodes carry 0.
    """

    origin: FloatArray
    h: float
    mask: NDArray[np.int8]
    values: FloatArray

    def __post_init__(self) -> None:
        origin = np.asarray(self.origin, dtype=float).reshape(2)
        mask = np.asarray(self.mask, dtype=np.int8)
        values = np.asarray(self.values, dtype=float)
        if mask.ndim != 2 or values.shape != mask.shape:
            raise MeshMismatchError("Values and mask must share one (ny, nx) shape.")
        if not self.h > 0:
            raise ParameterError("Grid spacing must be positive.")
        if not np.all(np.isin(mask, (EXTERIOR, INTERIOR, BOUNDARY))):
            raise ParameterError("Mask codes must be 0, 1 or 2.")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "values", np.where(mask == EXTERIOR, 0.0, values))

    # -- construction --------------------------------------------------------

    @classmethod
    def on_box(
        cls,
        origin: ArrayLike,
        h: float,
        dims: tuple[int, int],
        inside: Optional[FieldFn] = None,
    ) -> "GridFunction":
        """Zero function on an ``nx`` by ``ny`` box; ``inside(x, y)`` selects domain nodes."""
        nx, ny = dims
        if nx < 3 or ny < 3:
            raise ParameterError("A grid needs at least 3 nodes per side.")
        o = np.asarray(origin, dtype=float)
        xx, yy = np.meshgrid(o[0] + h * np.arange(nx), o[1] + h * np.arange(ny))
        keep = np.ones((ny, nx), dtype=bool) if inside is None else np.asarray(inside(xx, yy))
        return cls(o, float(h), classify(keep), np.zeros((ny, nx)))

    @classmethod
    def on_domain(cls, domain: ConvexDomain, h: float, pad: int = 1) -> "GridFunction":
        """Grid aligned to integer multiples of ``h`` covering the domain."""
        lo = np.floor(domain.vertices.min(axis=0) / h) - pad
        hi = np.ceil(domain.vertices.max(axis=0) / h) + pad
        dims = (int(hi[0] - lo[0]) + 1, int(hi[1] - lo[1]) + 1)

        def inside(x: FloatArray, y: FloatArray) -> NDArray[np.bool_]:
            pts = np.column_stack([x.ravel(), y.ravel()])
            return domain.contains(pts, tol=1e-12).reshape(x.shape)

        return cls.on_box(lo * h, h, dims, inside)

    @classmethod
    def square(cls, n: int, half_width: float = 1.0) -> "GridFunction":
        """``(n+1)^2`` nodes on ``[-w, w]^2``; the outer ring is the boundary."""
        h = 2.0 * half_width / n
        return cls.on_box((-half_width, -half_width), h, (n + 1, n + 1))

    @classmethod
    def disk(cls, n: int, radius: float = 1.0) -> "GridFunction":
        """``(n+1)^2`` box over ``[-r, r]^2`` masked to the closed disk."""
        h = 2.0 * radius / n
        r2 = radius * radius * (1.0 + 1e-12)
        return cls.on_box(
            (-radius, -radius), h, (n + 1, n + 1), lambda x, y: x * x + y * y <= r2
        )

    def sample(self, fn: FieldFn) -> "GridFunction":
        """New function with ``fn(x, y)`` at every domain node."""
        xx, yy = self.coords
        vals = np.broadcast_to(np.asarray(fn(xx, yy), dtype=float), xx.shape)
        return self.with_values(vals)

    def with_values(self, values: ArrayLike) -> "GridFunction":
        return GridFunction(self.origin, self.h, self.mask, np.asarray(values, dtype=float))

    def with_mask(self, mask: ArrayLike) -> "GridFunction":
        return GridFunction(self.origin, self.h, np.asarray(mask, dtype=np.int8), self.values)

    # -- geometry ------------------------------------------------------------

    @property
    def dims(self) -> tuple[int, int]:
        ny, nx = self.mask.shape
        return nx, ny

    @cached_property
    def xs(self) -> FloatArray:
        return np.asarray(self.origin[0] + self.h * np.arange(self.mask.shape[1]))

    @cached_property
    def ys(self) -> FloatArray:
        return np.asarray(self.origin[1] + self.h * np.arange(self.mask.shape[0]))

    @cached_property
    def coords(self) -> tuple[FloatArray, FloatArray]:
        xx, yy = np.meshgrid(self.xs, self.ys)
        return xx, yy

    @property
    def interior(self) -> NDArray[np.bool_]:
        return np.asarray(self.mask == INTERIOR)

    @property
    def boundary(self) -> NDArray[np.bool_]:
        return np.asarray(self.mask == BOUNDARY)

    @property
    def in_domain(self) -> NDArray[np.bool_]:
        return np.asarray(self.mask != EXTERIOR)

    def points(self, where: Optional[NDArray[np.bool_]] = None) -> FloatArray:
        """Coordinates of the selected nodes in row-major order."""
        xx, yy = self.coords
        sel = self.in_domain if where is None else where
        return np.column_stack([xx[sel], yy[sel]])

    def node_of(self, point: ArrayLike) -> tuple[int, int]:
        """``(j, i)`` of the node nearest to a point."""
        p = np.asarray(point, dtype=float).reshape(2)
        i = int(np.clip(np.rint((p[0] - self.origin[0]) / self.h), 0, self.mask.shape[1] - 1))
        j = int(np.clip(np.rint((p[1] - self.origin[1]) / self.h), 0, self.mask.shape[0] - 1))
        return j, i

    def node_point(self, node: tuple[int, int]) -> FloatArray:
        j, i = node
        return np.array([self.xs[i], self.ys[j]])

    def same_grid(self, other: "GridFunction") -> bool:
        return (
            self.mask.shape == other.mask.shape
            and bool(np.allclose(self.origin, other.origin, rtol=0.0, atol=1e-12 * self.h))
            and abs(self.h - other.h) <= 1e-12 * self.h
        )

    def require_same_grid(self, other: "GridFunction") -> None:
        if not self.same_grid(other):
            raise MeshMismatchError("Grid functions live on different grids.")

    @cached_property
    def _interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator(
            (self.ys, self.xs), self.values, method="linear", bounds_error=False, fill_value=np.nan
        )

    def interpolate(self, points: ArrayLike) -> FloatArray:
        """Bilinear interpolation; NaN outside the box."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.asarray(self._interpolator(pts[:, ::-1]))

    def gradient(self) -> tuple[FloatArray, FloatArray]:
        """Centered-difference gradient at interior nodes, NaN elsewhere."""
        v = self.values
        gx = np.full(v.shape, np.nan)
        gy = np.full(v.shape, np.nan)
        inner = self.interior[1:-1, 1:-1]
        cx = (v[1:-1, 2:] - v[1:-1, :-2]) / (2.0 * self.h)
        cy = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2.0 * self.h)
        gx[1:-1, 1:-1] = np.where(inner, cx, np.nan)
        gy[1:-1, 1:-1] = np.where(inner, cy, np.nan)
        return gx, gy

    def grow(self, mask: NDArray[np.bool_]) -> NDArray[np.bool_]:
        """Nodes within one 8-neighbour step of ``mask``."""
        return np.asarray(binary_dilation(mask, structure=_NEIGHBOURS))

    def max_abs(self, where: Optional[NDArray[np.bool_]] = None) -> float:
        sel = self.in_domain if where is None else where
        if not np.any(sel):
            return 0.0
        return float(np.max(np.abs(self.values[sel])))

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        nx, ny = self.dims
        return {
            "origin": self.origin.tolist(),
            "h": self.h,
            "dims": [nx, ny],
            "mask": "".join(str(int(c)) for c in self.mask.ravel()),
            "values": self.values.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GridFunction":
        nx, ny = (int(d) for d in data["dims"])
        mask_text = str(data["mask"])
        if len(mask_text) != nx * ny:
            raise ParameterError("Mask string length does not match dims.")
        mask = np.frombuffer(mask_text.encode("ascii"), dtype=np.uint8) - ord("0")
        values = np.asarray(data["values"], dtype=float)
        if values.size != nx * ny:
            raise ParameterError("Values length does not match dims.")
        return cls(
            np.asarray(data["origin"], dtype=float),
            float(data["h"]),
            mask.astype(np.int8).reshape(ny, nx),
            values.reshape(ny, nx),
        )


ScalarField = Union[GridFunction, float, FloatArray, FieldFn]


def as_values(template: GridFunction, field: ScalarField) -> FloatArray:
    """Node values of a grid function, constant or ``fn(x, y)`` on ``template``'s grid."""
    if isinstance(field, GridFunction):
        template.require_same_grid(field)
        return field.values
    if callable(field):
        return template.sample(field).values
    if isinstance(field, np.ndarray) and field.ndim > 0:
        if field.shape != template.mask.shape:
            raise MeshMismatchError(
                f"Array of shape {field.shape} does not match grid {template.mask.shape}."
            )
        return field.astype(float)
    return np.full(template.mask.shape, float(field))


def grid_mesh(grid: GridFunction) -> tuple[TriMesh, IntArray]:
    """Two triangles per cell over the domain nodes; grid boundary nodes are mesh boundary.

    Returns the mesh and the flat node -> vertex map (``-1`` for unused nodes).
    """
    mesh, vertex_of = structured_mesh(grid.xs, grid.ys, grid.in_domain)
    used = vertex_of >= 0
    flags = np.zeros(mesh.n_vertices, dtype=bool)
    flags[vertex_of[used]] = (grid.mask.ravel() != INTERIOR)[used]
    if np.any(grid.interior.ravel() & ~used):
        raise DomainError("Some interior grid nodes have no triangle.")
    return TriMesh(mesh.vertices, mesh.triangles, flags), vertex_of
