"""Finite differences for the linearized Monge-Ampère operator ``L_u v = U^ij v_ij``.

The discrete Hessian uses second central differences and the symmetric
four-point cross stencil, so every stencil here is exact on quadratics. The
operator is assembled row by row as a nine-point sparse matrix and solved by
GMRES preconditioned with a sparse LU factorization.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, Field
from scipy import ndimage
from scipy.optimize import minimize
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import LinearOperator, gmres, splu

from langchain_ampere.config import Tolerances
from langchain_ampere.errors import (
    BoundaryDataError,
    DegenerateHessianError,
    LinearSolveError,
    ParameterError,
    StencilError,
)
from langchain_ampere.numerics.convex_core import SymmetricMatrix2, envelope_values
from langchain_ampere.numerics.geometry import (
    FloatArray,
    convex_hull_2d,
    polygon_area,
    polygon_diameter,
    unit_ball_volume,
)
from langchain_ampere.numerics.grid import (
    BOUNDARY,
    EXTERIOR,
    INTERIOR,
    GridFunction,
    ScalarField,
    as_values,
)
from langchain_ampere.numerics.mesh import ConvexDomain
from langchain_ampere.numerics.sections import extract_section, john_ellipsoid, trace_section

logger = logging.getLogger(__name__)

PointFn = Callable[[FloatArray], FloatArray]

# (dj, di) offsets of the nine-point stencil, center excluded.
_OFFSETS = ((0, 1), (0, -1), (1, 0), (-1, 0), (1, 1), (-1, -1), (1, -1), (-1, 1))


def _shift(a: FloatArray, dj: int, di: int, fill: float = 0.0) -> FloatArray:
    """``out[j, i] = a[j + dj, i + di]`` with ``fill`` outside the array."""
    out = np.full(a.shape, fill, dtype=a.dtype)
    ny, nx = a.shape
    src_j = slice(max(dj, 0), ny + min(dj, 0))
    dst_j = slice(max(-dj, 0), ny + min(-dj, 0))
    src_i = slice(max(di, 0), nx + min(di, 0))
    dst_i = slice(max(-di, 0), nx + min(-di, 0))
    out[dst_j, dst_i] = a[src_j, src_i]
    return out


def _second_differences(v: FloatArray, h: float) -> tuple[FloatArray, FloatArray, FloatArray]:
    d11 = (_shift(v, 0, 1) - 2.0 * v + _shift(v, 0, -1)) / (h * h)
    d22 = (_shift(v, 1, 0) - 2.0 * v + _shift(v, -1, 0)) / (h * h)
    d12 = (_shift(v, 1, 1) - _shift(v, 1, -1) - _shift(v, -1, 1) + _shift(v, -1, -1)) / (
        4.0 * h * h
    )
    return d11, d12, d22


# ---------------------------------------------------------------------------
# Hessians and cofactors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HessianField:
    """Discrete Hessian on ``nodes``; entries are NaN elsewhere."""

    u11: FloatArray
    u12: FloatArray
    u22: FloatArray
    nodes: NDArray[np.bool_]

    @property
    def det(self) -> FloatArray:
        return np.asarray(self.u11 * self.u22 - self.u12 * self.u12)

    def at(self, node: tuple[int, int]) -> SymmetricMatrix2:
        j, i = node
        return SymmetricMatrix2(float(self.u11[j, i]), float(self.u12[j, i]), float(self.u22[j, i]))


def discrete_hessian(
    u: GridFunction, nodes: Optional[NDArray[np.bool_]] = None
) -> HessianField:
    """Second central differences and the cross stencil at ``nodes`` (default: interior).

    Raises:
        StencilError: If a requested node has a neighbour outside the domain.
    """
    sel = u.interior if nodes is None else np.asarray(nodes, dtype=bool)
    support = u.in_domain
    for dj, di in _OFFSETS:
        if np.any(sel & ~_shift(support, dj, di, fill=False)):
            raise StencilError("A requested node lacks its nine-point stencil.")
    d11, d12, d22 = _second_differences(u.values, u.h)
    nan = np.nan
    return HessianField(
        u11=np.where(sel, d11, nan),
        u12=np.where(sel, d12, nan),
        u22=np.where(sel, d22, nan),
        nodes=sel,
    )


@dataclass(frozen=True, eq=False)
class CofactorField:
    """Coefficient field ``U`` of ``L v = U^ij v_ij`` on ``nodes``.

    ``nonpsd`` flags nodes whose discrete Hessian is not positive semidefinite.
    """

    u11: FloatArray
    u12: FloatArray
    u22: FloatArray
    nodes: NDArray[np.bool_]
    nonpsd: NDArray[np.bool_]

    @property
    def det(self) -> FloatArray:
        return np.asarray(self.u11 * self.u22 - self.u12 * self.u12)

    @classmethod
    def from_hessian(cls, hess: HessianField, tol: float = 1e-12) -> "CofactorField":
        a, b, c = hess.u11, hess.u12, hess.u22
        half_trace = 0.5 * (a + c)
        radius = np.sqrt(0.25 * (a - c) ** 2 + b * b)
        lam_min = half_trace - radius
        scale = np.maximum(1.0, np.abs(half_trace) + radius)
        with np.errstate(invalid="ignore"):
            nonpsd = hess.nodes & (lam_min < -tol * scale)
        return cls(u11=c, u12=-b, u22=a, nodes=hess.nodes, nonpsd=np.asarray(nonpsd))

    @classmethod
    def constant(cls, grid: GridFunction, matrix: SymmetricMatrix2) -> "CofactorField":
        """Constant coefficients on the interior nodes of ``grid``."""
        sel = grid.interior
        nan = np.nan
        return cls(
            u11=np.where(sel, matrix.a11, nan),
            u12=np.where(sel, matrix.a12, nan),
            u22=np.where(sel, matrix.a22, nan),
            nodes=sel,
            nonpsd=np.zeros(sel.shape, dtype=bool),
        )

    def scaled(self, factor: float) -> "CofactorField":
        return CofactorField(
            self.u11 * factor, self.u12 * factor, self.u22 * factor, self.nodes, self.nonpsd
        )

    def at(self, node: tuple[int, int]) -> SymmetricMatrix2:
        j, i = node
        return SymmetricMatrix2(float(self.u11[j, i]), float(self.u12[j, i]), float(self.u22[j, i]))


def cofactor_field(u: GridFunction, tolerances: Optional[Tolerances] = None) -> CofactorField:
    """``U = [[u22, -u12], [-u12, u11]]`` from the discrete Hessian of ``u``."""
    tol = tolerances or Tolerances()
    field = CofactorField.from_hessian(discrete_hessian(u), tol.psd)
    if np.any(field.nonpsd):
        logger.debug("%d nodes with non-PSD discrete Hessian", int(np.sum(field.nonpsd)))
    return field


class DivergenceReport(BaseModel):
    """Max norm of the row divergences of ``U``."""

    max_norm: float
    nodes: int


def divergence_free_residual(
    u: GridFunction, window: Optional[tuple[float, float, float, float]] = None
) -> tuple[DivergenceReport, FloatArray]:
    """Central-difference divergence of each row of the cofactor field.

    ``window = (xmin, xmax, ymin, ymax)`` restricts the reported maximum. Returns
    the report and the per-node norms (NaN where not defined).
    """
    cof = cofactor_field(u)
    h = u.h
    rows = []
    for first, second in ((cof.u11, cof.u12), (cof.u12, cof.u22)):
        d1 = (_shift(first, 0, 1, np.nan) - _shift(first, 0, -1, np.nan)) / (2.0 * h)
        d2 = (_shift(second, 1, 0, np.nan) - _shift(second, -1, 0, np.nan)) / (2.0 * h)
        rows.append(d1 + d2)
    norms = np.sqrt(rows[0] ** 2 + rows[1] ** 2)
    valid = np.isfinite(norms) & cof.nodes
    if window is not None:
        xx, yy = u.coords
        xmin, xmax, ymin, ymax = window
        valid &= (xx >= xmin) & (xx <= xmax) & (yy >= ymin) & (yy <= ymax)
    if not np.any(valid):
        raise StencilError("No node has a full divergence stencil in the window.")
    return (
        DivergenceReport(max_norm=float(np.max(norms[valid])), nodes=int(np.sum(valid))),
        np.where(valid, norms, np.nan),
    )


# ---------------------------------------------------------------------------
# Linear solve
# ---------------------------------------------------------------------------


class LinearSolveReport(BaseModel):
    """Solution of ``U^ij v_ij = g`` with Dirichlet data."""

    model_config = {"arbitrary_types_allowed": True}

    v: GridFunction
    residual_norm: float
    rhs_norm: float
    iterations: int
    monotone: bool


def apply_operator(cof: CofactorField, v: GridFunction) -> FloatArray:
    """``U^ij v_ij`` at the field's nodes, NaN elsewhere."""
    d11, d12, d22 = _second_differences(v.values, v.h)
    out = cof.u11 * d11 + 2.0 * cof.u12 * d12 + cof.u22 * d22
    return np.where(cof.nodes, out, np.nan)


def _stencil(cof: CofactorField, h: float) -> dict[tuple[int, int], FloatArray]:
    h2 = h * h
    return {
        (0, 0): -2.0 * (cof.u11 + cof.u22) / h2,
        (0, 1): cof.u11 / h2,
        (0, -1): cof.u11 / h2,
        (1, 0): cof.u22 / h2,
        (-1, 0): cof.u22 / h2,
        (1, 1): cof.u12 / (2.0 * h2),
        (-1, -1): cof.u12 / (2.0 * h2),
        (1, -1): -cof.u12 / (2.0 * h2),
        (-1, 1): -cof.u12 / (2.0 * h2),
    }


def solve_cofactor_system(
    cof: CofactorField,
    grid: GridFunction,
    rhs: ScalarField,
    boundary: ScalarField,
    tolerances: Optional[Tolerances] = None,
) -> LinearSolveReport:
    """Solve ``U^ij v_ij = rhs`` on the interior nodes of ``grid``, ``v = boundary`` elsewhere."""
    tol = tolerances or Tolerances()
    unknown = grid.interior
    if np.any(unknown & ~cof.nodes):
        raise StencilError("Coefficient field does not cover every interior node.")
    if np.any(cof.nonpsd & unknown):
        raise DegenerateHessianError(
            f"degenerate Hessian nodes: {int(np.sum(cof.nonpsd & unknown))}"
        )
    g = as_values(grid, rhs)
    bvals = np.where(grid.boundary, as_values(grid, boundary), 0.0)
    if not np.all(np.isfinite(bvals[grid.boundary])):
        raise BoundaryDataError("Boundary data must be finite.")

    index = np.full(unknown.shape, -1, dtype=np.int64)
    jj, ii = np.nonzero(unknown)
    index[jj, ii] = np.arange(len(jj))
    n = len(jj)
    stencil = _stencil(cof, grid.h)
    rows, cols, vals = [], [], []
    b = g[jj, ii].astype(float).copy()
    for (dj, di), coef in stencil.items():
        c = coef[jj, ii]
        nj, ni = jj + dj, ii + di
        target = index[nj, ni]
        inside = target >= 0
        rows.append(np.flatnonzero(inside))
        cols.append(target[inside])
        vals.append(c[inside])
        b[~inside] -= c[~inside] * bvals[nj[~inside], ni[~inside]]
    matrix = csr_matrix(
        coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )
    )

    scale = float(np.nanmax(np.abs(np.concatenate([cof.u11[unknown], cof.u22[unknown]]))))
    monotone = bool(np.nanmax(np.abs(cof.u12[unknown])) <= 1e-12 * max(scale, 1.0))
    if not monotone:
        logger.warning("Nine-point stencil is not an M-matrix (cross coefficients present).")

    try:
        lu = splu(matrix.tocsc())
    except RuntimeError as exc:
        raise LinearSolveError(f"Sparse factorization failed: {exc}") from exc
    precond = LinearOperator((n, n), matvec=lu.solve, dtype=float)
    history: list[float] = []
    x, info = gmres(
        matrix,
        b,
        rtol=tol.lin,
        atol=tol.abs,
        maxiter=10_000,
        M=precond,
        callback=history.append,
        callback_type="pr_norm",
    )
    residual = float(np.linalg.norm(b - matrix @ x))
    rhs_norm = float(np.linalg.norm(b))
    if info != 0 or residual > tol.lin * rhs_norm + tol.abs * max(1.0, rhs_norm) * 1e2:
        raise LinearSolveError(
            f"Krylov iteration stalled (info={info}, residual={residual:.3e}).",
            residual=residual,
            history=history,
        )
    values = np.where(grid.boundary, bvals, 0.0)
    values[jj, ii] = x
    logger.debug("linear solve: %d unknowns, %d iterations", n, len(history))
    return LinearSolveReport(
        v=grid.with_values(values),
        residual_norm=residual,
        rhs_norm=rhs_norm,
        iterations=len(history),
        monotone=monotone,
    )


def solve_linma(
    u: GridFunction,
    rhs: ScalarField,
    boundary: ScalarField,
    tolerances: Optional[Tolerances] = None,
) -> LinearSolveReport:
    """Solve ``U^ij v_ij = rhs`` with ``v = boundary`` on the boundary nodes of ``u``'s grid.

    Raises:
        DegenerateHessianError: If the discrete Hessian of ``u`` is not PSD somewhere.
        LinearSolveError: If the Krylov iteration stalls.
    """
    return solve_cofactor_system(cofactor_field(u, tolerances), u, rhs, boundary, tolerances)


# ---------------------------------------------------------------------------
# ABP estimate
# ---------------------------------------------------------------------------


class ABPReport(BaseModel):
    """Both sides of the ABP maximum principle on the discrete upper contact set."""

    sup_interior: float
    sup_boundary: float
    contact_nodes: int
    norm: float
    constant: float
    bound: float
    refined_constant: float
    refined_bound: float
    passed: bool


def abp_check(
    a: CofactorField,
    v: GridFunction,
    g: ScalarField,
    tolerances: Optional[Tolerances] = None,
) -> ABPReport:
    """``sup v <= sup_boundary v + diam/(n omega_n^(1/n)) ||g / det(a)^(1/n)||_{L^n(contact)}``.

    The contact set holds the interior nodes where ``v`` touches its concave
    envelope over the grid. The refined form with ``C(n) |domain|^(1/n)``,
    ``C(2) = 2/pi``, is reported alongside.
    """
    tol = tolerances or Tolerances()
    n = 2
    inner = v.interior
    det = a.det[inner]
    if not np.all(det > 0):
        raise ParameterError("Coefficient determinant must be positive on interior nodes.")
    g_vals = as_values(v, g)
    pts = v.points()
    neg = -v.values[v.in_domain]
    env = envelope_values(pts, neg, tol.geom)
    scale = max(1.0, float(np.max(np.abs(neg))))
    touching = np.zeros(v.mask.shape, dtype=bool)
    touching[v.in_domain] = neg <= env + 1e-9 * scale
    contact = touching & inner
    integrand = np.abs(g_vals[contact]) ** n / a.det[contact]
    norm = float((np.sum(integrand) * v.h * v.h) ** (1.0 / n))

    hull = convex_hull_2d(pts)
    diameter = polygon_diameter(hull)
    omega = unit_ball_volume(n)
    constant = diameter / (n * omega ** (1.0 / n))
    refined_constant = 2.0 / omega ** (2.0 / n) * max(polygon_area(hull), 0.0) ** (1.0 / n)
    sup_in = float(np.max(v.values[inner]))
    sup_b = float(np.max(v.values[v.boundary]))
    bound = sup_b + constant * norm
    return ABPReport(
        sup_interior=sup_in,
        sup_boundary=sup_b,
        contact_nodes=int(np.sum(contact)),
        norm=norm,
        constant=constant,
        bound=bound,
        refined_constant=refined_constant,
        refined_bound=sup_b + refined_constant * norm,
        passed=sup_in <= bound + tol.ineq * max(1.0, abs(bound)),
    )


# ---------------------------------------------------------------------------
# Affine area
# ---------------------------------------------------------------------------


def _det_field(u: GridFunction) -> tuple[HessianField, FloatArray]:
    hess = discrete_hessian(u)
    det = hess.det
    bad = hess.nodes & (CofactorField.from_hessian(hess).nonpsd | ~(det > 0))
    if np.any(bad):
        raise DegenerateHessianError(f"degenerate Hessian nodes: {int(np.sum(bad))}")
    return hess, det


def affine_area(u: GridFunction, rule: str = "cells") -> float:
    """Discrete ``integral of det(D^2 u)^(1/(n+2))``.

    ``rule="cells"`` averages the four corners of every cell with interior
    corners; ``rule="nodes"`` sums over interior nodes.
    """
    hess, det = _det_field(u)
    density = np.where(hess.nodes, np.abs(det) ** 0.25, 0.0)
    h2 = u.h * u.h
    if rule == "nodes":
        return float(np.sum(density) * h2)
    if rule != "cells":
        raise ParameterError(f"Unknown quadrature rule '{rule}'.")
    nodes = hess.nodes
    cells = nodes[:-1, :-1] & nodes[:-1, 1:] & nodes[1:, :-1] & nodes[1:, 1:]
    corners = density[:-1, :-1] + density[:-1, 1:] + density[1:, :-1] + density[1:, 1:]
    return float(np.sum(corners[cells]) * 0.25 * h2)


def affine_area_first_variation(u: GridFunction, phi: GridFunction) -> float:
    """``<phi, D_ij (U^ij w)> / (n+2)`` with ``w = det^(-(n+1)/(n+2))``.

    This is the exact derivative at ``t = 0`` of ``affine_area(u + t phi, "nodes")``.
    """
    u.require_same_grid(phi)
    hess, det = _det_field(u)
    cof = CofactorField.from_hessian(hess)
    w = np.where(hess.nodes, np.abs(det) ** -0.75, 0.0)
    m11 = np.where(hess.nodes, cof.u11 * w, 0.0)
    m12 = np.where(hess.nodes, cof.u12 * w, 0.0)
    m22 = np.where(hess.nodes, cof.u22 * w, 0.0)
    d11, _, _ = _second_differences(m11, u.h)
    _, d12, _ = _second_differences(m12, u.h)
    _, _, d22 = _second_differences(m22, u.h)
    div2 = d11 + 2.0 * d12 + d22
    return float(np.sum(np.where(u.in_domain, phi.values * div2, 0.0)) * u.h * u.h / 4.0)


# ---------------------------------------------------------------------------
# Harnack and Hölder diagnostics
# ---------------------------------------------------------------------------


def eccentric_solution(eps: float) -> PointFn:
    """``x1^2/(2 eps) - eps x2^2/2 + 1``, annihilated by the linearized operator of
    ``x1^2/(2 eps) + eps x2^2/2``; it lies in ``[1 - t, 1 + t]`` on the height-``t`` section.
    """
    if not eps > 0:
        raise ParameterError("Eccentricity must be positive.")

    def v(points: FloatArray) -> FloatArray:
        p = np.asarray(points, dtype=float).reshape(-1, 2)
        return np.asarray(p[:, 0] ** 2 / (2.0 * eps) - eps * p[:, 1] ** 2 / 2.0 + 1.0)

    return v


class HarnackReport(BaseModel):
    """Sup and inf of a nonnegative solution over the half-height section and a ball."""

    height: float
    sup: float
    inf: float
    ratio: float
    ball_radius: Optional[float] = None
    ball_sup: Optional[float] = None
    ball_inf: Optional[float] = None
    ball_ratio: Optional[float] = None
    nodes: int
    monotone: bool


def _quadratic_fit(points: FloatArray, values: FloatArray, at: FloatArray) -> FloatArray:
    d = points - at
    design = np.column_stack(
        [
            np.ones(len(d)),
            d[:, 0],
            d[:, 1],
            0.5 * d[:, 0] ** 2,
            d[:, 0] * d[:, 1],
            0.5 * d[:, 1] ** 2,
        ]
    )
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    return np.asarray(coef)


def _quadratic_eval(coef: FloatArray, at: FloatArray, y: FloatArray) -> float:
    d = y - at
    return float(
        coef[0]
        + coef[1] * d[0]
        + coef[2] * d[1]
        + 0.5 * coef[3] * d[0] ** 2
        + coef[4] * d[0] * d[1]
        + 0.5 * coef[5] * d[1] ** 2
    )


def _solve_region(
    grid: GridFunction, u_nodes: FloatArray, trace: PointFn, region: NDArray[np.bool_],
    tol: Tolerances,
) -> LinearSolveReport:
    """Solve ``L_u v = 0`` on ``region`` with the trace on its one-node collar."""
    collar = grid.grow(region) & ~region
    mask = np.full(region.shape, EXTERIOR, dtype=np.int8)
    mask[collar] = BOUNDARY
    mask[region] = INTERIOR
    local = GridFunction(grid.origin, grid.h, mask, u_nodes)
    xx, yy = local.coords
    data = np.zeros(region.shape)
    data[collar] = trace(np.column_stack([xx[collar], yy[collar]]))
    if np.any(data[collar] < -tol.bc):
        raise BoundaryDataError("Harnack probe needs nonnegative boundary data.")
    return solve_cofactor_system(
        cofactor_field(local, tol), local, 0.0, local.with_values(data), tol
    )


def _polished_extreme(
    solution: GridFunction,
    target: NDArray[np.bool_],
    constraint: Callable[[FloatArray], float],
    sign: float,
) -> float:
    """Extreme of ``sign * v`` over ``target``, refined off the grid.

    A quadratic is fitted to the solved values near the best node and optimized
    under ``constraint(y) >= 0``; the better of node and refined value wins.
    """
    vals = np.where(target, sign * solution.values, -np.inf)
    j, i = np.unravel_index(int(np.argmax(vals)), vals.shape)
    node_value = float(vals[j, i])
    at = solution.node_point((int(j), int(i)))
    xx, yy = solution.coords
    near = solution.in_domain & ((xx - at[0]) ** 2 + (yy - at[1]) ** 2 <= (3.0 * solution.h) ** 2)
    if int(np.sum(near)) < 6:
        return sign * node_value
    coef = _quadratic_fit(np.column_stack([xx[near], yy[near]]), solution.values[near], at)
    result = minimize(
        lambda y: -sign * _quadratic_eval(coef, at, y),
        at,
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": constraint}],
        options={"ftol": 1e-14, "maxiter": 200},
    )
    refined = -float(result.fun)
    inside = constraint(result.x) >= -1e-12
    if result.success and inside and np.linalg.norm(result.x - at) <= 3.0 * solution.h:
        return sign * max(node_value, refined)
    return sign * node_value


def harnack_probe(
    u: PointFn,
    trace: PointFn,
    x0: ArrayLike,
    h: float,
    *,
    ball_radius: Optional[float] = None,
    resolution: int = 88,
    tolerances: Optional[Tolerances] = None,
) -> HarnackReport:
    """Solve ``L_u v = 0`` in ``S_u(x0, 2h)`` with boundary values ``trace``.

    The section is traced by ray casting and normalized by its John ellipse
    ``y = B^-1 (x - c)``; ``L_u`` is affine covariant, so the problem is solved
    for ``u(c + B y)`` on a uniform grid over ``[-2.2, 2.2]^2``. Sup and inf are
    taken over ``S_u(x0, h)``. With ``ball_radius`` the same is done on the ball
    ``B_r(x0)`` in original coordinates.
    """
    tol = tolerances or Tolerances()
    if not h > 0:
        raise ParameterError("Section height must be positive.")
    c0 = np.asarray(x0, dtype=float).reshape(2)
    outer = trace_section(u, c0, 2.0 * h)
    ellipse = john_ellipsoid(ConvexDomain(outer.polygon))
    b = ellipse.axes
    c = ellipse.center

    def to_x(y: FloatArray) -> FloatArray:
        return np.asarray(c + np.atleast_2d(y) @ b.T)

    def excess(y: FloatArray) -> FloatArray:
        x = to_x(y)
        return np.asarray(u(x) - outer.support(x))

    delta = 4.4 / resolution
    grid = GridFunction.on_box((-2.2, -2.2), delta, (resolution + 1, resolution + 1))
    yy_pts = grid.points()
    u_nodes = u(to_x(yy_pts)).reshape(grid.mask.shape)
    gap = excess(yy_pts).reshape(grid.mask.shape)
    labels, _ = ndimage.label(gap < 2.0 * h)
    start = grid.node_of(np.linalg.solve(b, c0 - c))
    region = labels == labels[start]
    if np.any(region[0, :] | region[-1, :] | region[:, 0] | region[:, -1]):
        raise ParameterError("Normalized section does not fit the probe box.")
    report = _solve_region(grid, u_nodes, lambda y: trace(to_x(y)), region, tol)
    target = region & (gap < h)

    def in_half(y: FloatArray) -> float:
        return float(h - excess(y)[0])

    sup = _polished_extreme(report.v, target, in_half, 1.0)
    inf = _polished_extreme(report.v, target, in_half, -1.0)
    ratio = sup / inf if inf > tol.bc else math.inf
    result = HarnackReport(
        height=h, sup=sup, inf=inf, ratio=ratio, nodes=int(np.sum(region)), monotone=report.monotone
    )
    if ball_radius is None:
        return result

    r = float(ball_radius)
    delta_b = 2.2 * r * 2.0 / resolution
    ball_grid = GridFunction.on_box(c0 - 1.1 * r, delta_b, (resolution + 1, resolution + 1))
    pts = ball_grid.points()
    u_ball = u(pts).reshape(ball_grid.mask.shape)
    dist2 = np.sum((pts - c0) ** 2, axis=1).reshape(ball_grid.mask.shape)
    ball = dist2 < r * r
    ball_report = _solve_region(ball_grid, u_ball, trace, ball, tol)

    def in_ball(x: FloatArray) -> float:
        return float(r * r - np.sum((np.asarray(x) - c0) ** 2))

    bsup = _polished_extreme(ball_report.v, ball, in_ball, 1.0)
    binf = _polished_extreme(ball_report.v, ball, in_ball, -1.0)
    return result.model_copy(
        update={
            "ball_radius": r,
            "ball_sup": bsup,
            "ball_inf": binf,
            "ball_ratio": bsup / binf if binf > tol.bc else math.inf,
        }
    )


class HoelderBin(BaseModel):
    distance: float
    interior_oscillation: float
    boundary_oscillation: Optional[float] = None


class HoelderReport(BaseModel):
    """Log-log fits of the largest oscillation per dyadic distance bin."""

    interior_exponent: float
    interior_seminorm: float
    boundary_exponent: Optional[float] = None
    boundary_seminorm: Optional[float] = None
    bins: list[HoelderBin] = Field(default_factory=list)


def _fit_exponent(distances: FloatArray, osc: FloatArray) -> tuple[float, float]:
    keep = osc > 0
    if int(np.sum(keep)) < 3:
        raise ParameterError("Hölder fit needs at least three distance bins with oscillation.")
    beta = float(np.polyfit(np.log(distances[keep]), np.log(osc[keep]), 1)[0])
    seminorm = float(np.max(osc[keep] / distances[keep] ** beta))
    return beta, seminorm


def hoelder_probe(v: GridFunction, region: Optional[NDArray[np.bool_]] = None) -> HoelderReport:
    """Hölder exponent of ``v`` from node pairs shifted by ``2^k`` nodes.

    Shifts run along the axes and diagonals; the bin of a pair is
    ``floor(log2(|shift| / h))`` with representative distance ``2^k h``.
    Interior pairs join two interior nodes; boundary-anchored pairs join a
    boundary node to a domain node.
    """
    inner = v.interior if region is None else (np.asarray(region, dtype=bool) & v.in_domain)
    rim = v.boundary
    ny, nx = v.mask.shape
    levels = int(math.floor(math.log2(max(2, min(nx, ny) - 1))))
    dist, osc_in, osc_b = [], [], []
    for k in range(levels):
        step = 2**k
        worst_in = 0.0
        worst_b = 0.0
        any_b = False
        for dj, di in ((0, 1), (1, 0), (1, 1), (1, -1)):
            sj, si = dj * step, di * step
            if abs(sj) >= ny or abs(si) >= nx:
                continue
            shifted = _shift(v.values, sj, si)
            partner_in = _shift(inner, sj, si, fill=False)
            diff = np.abs(shifted - v.values)
            both = inner & partner_in
            if np.any(both):
                worst_in = max(worst_in, float(np.max(diff[both])))
            partner_dom = _shift(v.in_domain, sj, si, fill=False)
            partner_rim = _shift(rim, sj, si, fill=False)
            anchored = (rim & partner_dom) | (v.in_domain & partner_rim)
            if np.any(anchored):
                any_b = True
                worst_b = max(worst_b, float(np.max(diff[anchored])))
        dist.append(step * v.h)
        osc_in.append(worst_in)
        osc_b.append(worst_b if any_b else 0.0)
    d = np.asarray(dist)
    beta, semi = _fit_exponent(d, np.asarray(osc_in))
    try:
        beta_b, semi_b = _fit_exponent(d, np.asarray(osc_b))
    except ParameterError:
        beta_b = semi_b = None
    return HoelderReport(
        interior_exponent=beta,
        interior_seminorm=semi,
        boundary_exponent=beta_b,
        boundary_seminorm=semi_b,
        bins=[
            HoelderBin(distance=a, interior_oscillation=b, boundary_oscillation=c)
            for a, b, c in zip(dist, osc_in, osc_b)
        ],
    )


class DecayReport(BaseModel):
    """Oscillation of ``v`` over sections ``S_u(x0, h 2^-k)``."""

    alpha: float
    heights: list[float]
    oscillations: list[float]


def oscillation_decay(
    u: GridFunction, v: GridFunction, x0: ArrayLike, h: float, levels: int = 5
) -> DecayReport:
    """Fit ``osc_{S(x0, rho)} v ~ (rho / h)^alpha`` over ``rho = h 2^-k``."""
    u.require_same_grid(v)
    heights, osc = [], []
    for k in range(levels):
        rho = h * 2.0**-k
        sec = extract_section(u, x0, rho)
        vals = v.values.ravel()[sec.realized]
        heights.append(rho)
        osc.append(float(np.max(vals) - np.min(vals)) if len(vals) else 0.0)
    hs = np.asarray(heights)
    os_ = np.asarray(osc)
    keep = os_ > 0
    if int(np.sum(keep)) < 2:
        raise ParameterError("Oscillation decay needs two sections with oscillation.")
    alpha = float(np.polyfit(np.log(hs[keep] / h), np.log(os_[keep]), 1)[0])
    return DecayReport(alpha=alpha, heights=heights, oscillations=osc)
