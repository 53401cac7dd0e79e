"""Aleksandrov solutions of ``det D^2 u = mu`` with Dirichlet data.

Solutions are piecewise linear on the lower convex envelope of the lifted
boundary data and site values. The site values are found by a damped Newton
iteration on the Monge-Ampère masses: the Jacobian couples two neighbouring
sites through the length of the dual edge (the jump of the gradient across
the shared edge) divided by the primal edge length.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Optional, Union

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field, model_validator
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import splu

from langchain_ampere.config import Tolerances
from langchain_ampere.errors import (
    ConvergenceError,
    DomainError,
    MeshMismatchError,
    ParameterError,
)
from langchain_ampere.numerics.convex_core import (
    DiscreteMeasure,
    PLConvexFunction,
    envelope_values,
    lower_envelope,
    ma_measure,
    vertex_masses,
)
from langchain_ampere.numerics.geometry import FloatArray, convex_hull_2d
from langchain_ampere.numerics.mesh import (
    ConvexDomain,
    IntArray,
    TriMesh,
    disk_mesh,
    domain_mesh,
    polar_mesh,
    square_mesh,
)

logger = logging.getLogger(__name__)

VertexData = Union[float, ArrayLike, Callable[[FloatArray], Any]]


def _sample_values(mesh: TriMesh, data: VertexData) -> FloatArray:
    """Per-vertex values from a constant, an array or ``fn(points)``."""
    if callable(data):
        vals = np.asarray(data(mesh.vertices), dtype=float).reshape(-1)
    elif np.ndim(data) == 0:
        vals = np.full(mesh.n_vertices, float(data))  # type: ignore[arg-type]
    else:
        vals = np.asarray(data, dtype=float).reshape(-1)
    if vals.shape == (len(mesh.boundary_indices),):
        full = np.zeros(mesh.n_vertices)
        full[mesh.boundary_indices] = vals
        vals = full
    if vals.shape != (mesh.n_vertices,):
        raise MeshMismatchError(
            "Vertex data needs one value per vertex or per boundary vertex."
        )
    return vals


# ---------------------------------------------------------------------------
# Problems and solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DirichletProblem:
    """Mesh, boundary data and a measure carried by interior mesh vertices.

    ``boundary_values`` holds one entry per vertex; only boundary entries are
    read. ``measure.indices`` are the site vertices. ``staircase`` marks the
    boundary nodes of a lattice over a convex domain, which may lie inside the
    hull of the others.
    """

    mesh: TriMesh
    boundary_values: FloatArray
    measure: DiscreteMeasure
    kind: Literal["homogeneous", "dirac", "density"] = "dirac"
    staircase: bool = False
    strictly_convex: bool = field(init=False, default=True)

    def __post_init__(self) -> None:
        vals = np.asarray(self.boundary_values, dtype=float).reshape(-1)
        if vals.shape != (self.mesh.n_vertices,):
            raise MeshMismatchError("Boundary data needs one entry per mesh vertex.")
        bidx = self.mesh.boundary_indices
        if not np.all(np.isfinite(vals[bidx])):
            raise ParameterError("Boundary data must be finite.")
        clean = np.zeros_like(vals)
        clean[bidx] = vals[bidx]
        object.__setattr__(self, "boundary_values", clean)
        if self.measure.indices is None:
            raise ParameterError("Measure sites must be mesh vertices.")
        assert self.mesh.boundary is not None
        if np.any(self.mesh.boundary[self.measure.indices]):
            raise DomainError("Measure sites must be interior vertices.")

        bpts = self.mesh.vertices[bidx]
        if not self.staircase:
            hull = ConvexDomain.from_points(self.mesh.vertices)
            if np.any(hull.distance_to_boundary(bpts) > 1e-9 * hull.diameter):
                raise DomainError(
                    "Boundary vertices must lie on the boundary of a convex domain."
                )
        strict = len(convex_hull_2d(bpts)) == len(np.unique(bpts, axis=0))
        object.__setattr__(self, "strictly_convex", strict)
        if not strict and not self.staircase:
            logger.warning(
                "Domain is not strictly convex; envelope contact along straight edges "
                "is reported, not asserted."
            )

    @property
    def domain(self) -> ConvexDomain:
        return self.mesh.domain

    @classmethod
    def homogeneous(cls, mesh: TriMesh, g: VertexData) -> "DirichletProblem":
        empty = DiscreteMeasure(np.zeros((0, 2)), np.zeros(0), np.zeros(0, dtype=np.int64))
        return cls(mesh, _sample_values(mesh, g), empty, kind="homogeneous")

    @classmethod
    def dirac(
        cls, mesh: TriMesh, g: VertexData, sites: ArrayLike, masses: ArrayLike
    ) -> "DirichletProblem":
        """``sum a_i delta_{x_i}``; sites that are not mesh vertices are inserted."""
        pts = np.asarray(sites, dtype=float).reshape(-1, 2)
        a = np.asarray(masses, dtype=float).reshape(-1)
        if len(a) != len(pts) or len(a) == 0:
            raise ParameterError("Need one positive mass per Dirac site.")
        if np.any(a <= 0):
            raise ParameterError("Dirac masses must be positive.")
        domain = mesh.domain
        if np.any(domain.distance_to_boundary(pts) <= 1e-9 * domain.diameter):
            raise DomainError("Dirac sites must be interior points of the domain.")
        g_vals = _sample_values(mesh, g)
        verts = mesh.vertices
        assert mesh.boundary is not None
        flags = mesh.boundary.copy()
        indices: list[int] = []
        added: list[FloatArray] = []
        for p in pts:
            dist = np.linalg.norm(verts - p, axis=1)
            k = int(np.argmin(dist))
            if dist[k] <= 1e-9 * domain.diameter:
                indices.append(k)
            else:
                indices.append(len(verts) + len(added))
                added.append(p)
        if len(set(indices)) != len(indices):
            raise ParameterError("Dirac sites must be distinct.")
        if added:
            verts = np.vstack([verts, np.array(added)])
            flags = np.concatenate([flags, np.zeros(len(added), dtype=bool)])
            g_vals = np.concatenate([g_vals, np.zeros(len(added))])
            mesh = TriMesh.from_points(verts, flags)
        idx = np.asarray(indices, dtype=np.int64)
        return cls(mesh, g_vals, DiscreteMeasure(verts[idx], a, idx), kind="dirac")

    @classmethod
    def density(
        cls,
        mesh: TriMesh,
        g: VertexData,
        density: Union[float, ArrayLike, Callable[..., Any]],
        *,
        staircase: bool = False,
    ) -> "DirichletProblem":
        """Per-triangle density turned into barycentric dual vertex targets.

        ``density`` is a constant, one value per triangle, or ``fn(points)``
        evaluated at triangle centroids.
        """
        centroids = mesh.vertices[mesh.triangles].mean(axis=1)
        if callable(density):
            f = np.asarray(density(centroids), dtype=float).reshape(-1)
        elif np.ndim(density) == 0:
            f = np.full(len(mesh.triangles), float(density))  # type: ignore[arg-type]
        else:
            f = np.asarray(density, dtype=float).reshape(-1)
        if f.shape != (len(mesh.triangles),):
            raise MeshMismatchError("Density needs one value per triangle.")
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise ParameterError("Density must be finite and positive (non-positive density).")
        targets = np.zeros(mesh.n_vertices)
        np.add.at(targets, mesh.triangles.ravel(), np.repeat(f * mesh.areas / 3.0, 3))
        inner = mesh.interior
        measure = DiscreteMeasure(mesh.vertices[inner], targets[inner], inner)
        return cls(
            mesh, _sample_values(mesh, g), measure, kind="density", staircase=staircase
        )


@dataclass(frozen=True, eq=False)
class AleksandrovSolution:
    """Piecewise-linear solution with its per-site mass residual ``M_i - a_i``."""

    u: PLConvexFunction
    residual: FloatArray
    iterations: int
    sites: IntArray
    targets: FloatArray
    boundary_mismatch: float = 0.0
    strictly_convex: bool = True
    history: list[float] = field(default_factory=list)

    @property
    def max_relative_residual(self) -> float:
        if len(self.targets) == 0:
            return 0.0
        return float(np.max(np.abs(self.residual) / np.maximum(self.targets, 1e-300)))


# ---------------------------------------------------------------------------
# Envelope assembly and the site iteration
# ---------------------------------------------------------------------------


def _assemble(problem: DirichletProblem, site_values: FloatArray, tol: Tolerances) -> tuple[
    PLConvexFunction, float
]:
    """Envelope of boundary data and site values over every mesh vertex."""
    mesh = problem.mesh
    bidx = mesh.boundary_indices
    g = problem.boundary_values[bidx]
    top = float(np.max(g) + np.ptp(g) + 1.0)
    vals = np.full(mesh.n_vertices, top)
    vals[bidx] = g
    sites = problem.measure.indices
    assert sites is not None
    vals[sites] = site_values
    env = lower_envelope(mesh.vertices, vals, tol.geom)
    u = PLConvexFunction(TriMesh(mesh.vertices, env.triangles, mesh.boundary), env.values)
    mismatch = float(np.max(np.abs(env.values[bidx] - g)))
    if mismatch > tol.bc:
        logger.warning("Envelope lowers the boundary data by up to %.3e.", mismatch)
    return u, mismatch


@dataclass(frozen=True, eq=False)
class _SiteState:
    z: FloatArray
    f: PLConvexFunction
    masses: FloatArray
    extreme: bool

    def l1(self, targets: FloatArray) -> float:
        return float(np.sum(np.abs(targets - self.masses)))


class _SiteSystem:
    """Boundary vertices followed by site vertices, with the site values free."""

    def __init__(self, problem: DirichletProblem, tol: Tolerances) -> None:
        mesh = problem.mesh
        sites = problem.measure.indices
        assert sites is not None
        bidx = mesh.boundary_indices
        self.n_b = len(bidx)
        self.n_s = len(sites)
        self.points = mesh.vertices[np.concatenate([bidx, sites])]
        self.flags = np.arange(len(self.points)) < self.n_b
        self.g = problem.boundary_values[bidx]
        self.targets = problem.measure.masses
        self.tol = tol
        top = float(np.max(self.g) + np.ptp(self.g) + 1.0)
        lifted = np.concatenate([self.g, np.full(self.n_s, top)])
        # Staircase boundary nodes inside the hull may drop out of the envelope.
        hull = ConvexDomain.from_points(self.points)
        on_hull = hull.distance_to_boundary(self.points[: self.n_b]) <= 1e-9 * hull.diameter
        self.held = lower_envelope(self.points, lifted, tol.geom).extreme[: self.n_b] & on_hull
        self.scale = top - float(np.min(self.g))

    def evaluate(self, z: FloatArray) -> _SiteState:
        env = lower_envelope(self.points, np.concatenate([self.g, z]), self.tol.geom)
        f = PLConvexFunction(TriMesh(self.points, env.triangles, self.flags), env.values)
        masses = vertex_masses(f.mesh, f.gradients)[self.n_b :]
        kept = env.extreme[: self.n_b][self.held]
        extreme = bool(np.all(env.extreme[self.n_b :]) and np.all(kept))
        return _SiteState(z=z, f=f, masses=masses, extreme=extreme)

    def jacobian(self, state: _SiteState) -> csr_matrix:
        e = state.f.mesh.edges
        grads = state.f.gradients
        p = self.points
        weight = np.linalg.norm(grads[e.left] - grads[e.right], axis=1) / np.linalg.norm(
            p[e.a] - p[e.b], axis=1
        )
        pos = np.full(len(p), -1, dtype=np.int64)
        pos[self.n_b :] = np.arange(self.n_s)
        pa, pb = pos[e.a], pos[e.b]
        diag = np.zeros(self.n_s)
        np.add.at(diag, pa[pa >= 0], -weight[pa >= 0])
        np.add.at(diag, pb[pb >= 0], -weight[pb >= 0])
        both = (pa >= 0) & (pb >= 0)
        rows = np.concatenate([np.arange(self.n_s), pa[both], pb[both]])
        cols = np.concatenate([np.arange(self.n_s), pb[both], pa[both]])
        vals = np.concatenate([diag, weight[both], weight[both]])
        return csr_matrix(coo_matrix((vals, (rows, cols)), shape=(self.n_s, self.n_s)))

    def homogeneous_sites(self) -> FloatArray:
        top = float(np.max(self.g) + np.ptp(self.g) + 1.0)
        vals = np.concatenate([self.g, np.full(self.n_s, top)])
        return envelope_values(self.points, vals, self.tol.geom)[self.n_b :]

    def done(self, state: _SiteState) -> bool:
        return bool(np.all(np.abs(state.masses - self.targets) <= self.tol.solve * self.targets))


def _initial_state(
    system: _SiteSystem, initial: Optional[ArrayLike]
) -> _SiteState:
    if initial is not None:
        z0 = np.asarray(initial, dtype=float).reshape(-1)
        if z0.shape != (system.n_s,):
            raise MeshMismatchError("Warm start needs one value per site.")
        state = system.evaluate(z0)
        if state.extreme:
            return state
        logger.debug("warm start rejected: sites not in convex position")

    hom = system.homogeneous_sites()
    bpts = system.points[: system.n_b]
    center = bpts.mean(axis=0)
    radius = float(np.max(np.linalg.norm(bpts - center, axis=1)))
    rho = np.sum((system.points[system.n_b :] - center) ** 2, axis=1) / radius**2 - 1.0
    psi = np.expm1(rho)
    # Lifted values beyond this lose the precision the envelope needs.
    mu_max = 1e6 * max(system.scale, 1.0)

    def lowered(mu: float) -> tuple[float, _SiteState]:
        while mu <= mu_max:
            state = system.evaluate(hom + mu * psi)
            if state.extreme:
                return mu, state
            mu *= 2.0
        raise ConvergenceError(
            f"No barrier scale up to {mu_max:.3g} puts the sites in convex position."
        )

    mu, state = lowered(1.0)
    total = float(np.sum(state.masses))
    if total > 0:
        mu, state = lowered(mu * math.sqrt(float(np.sum(system.targets)) / total))
    return state


def _newton(
    system: _SiteSystem, state: _SiteState, max_iter: int
) -> tuple[_SiteState, int, list[float]]:
    a = system.targets
    floor_a = float(np.min(a))
    history = [state.l1(a)]
    converged_at: Optional[int] = None
    iteration = 0
    for iteration in range(1, max_iter + 1):
        if system.done(state):
            if converged_at is None:
                converged_at = iteration
            if iteration - converged_at >= 5:
                break
        residual = a - state.masses
        norm = float(np.sum(np.abs(residual)))
        try:
            delta = splu(system.jacobian(state).tocsc()).solve(residual)
        except RuntimeError as exc:
            raise ConvergenceError(
                f"Singular mass Jacobian: {exc}", residual=norm, history=history
            ) from exc
        floor = 0.5 * min(float(np.min(state.masses)), floor_a)
        step = 1.0
        while True:
            trial = system.evaluate(state.z + step * delta)
            if (
                trial.extreme
                and float(np.min(trial.masses)) >= floor
                and trial.l1(a) <= (1.0 - 0.5 * step) * norm
            ):
                break
            step *= 0.5
            if step < 1e-10:
                if converged_at is not None:
                    return state, iteration, history
                raise ConvergenceError(
                    f"Step halving failed after {iteration} iterations.",
                    residual=norm,
                    history=history,
                )
        state = trial
        history.append(state.l1(a))
        logger.debug("newton %d: step %.3g, l1 residual %.3e", iteration, step, history[-1])
    if not system.done(state):
        raise ConvergenceError(
            f"No convergence after {max_iter} iterations.", residual=history[-1], history=history
        )
    return state, iteration, history


def _solve_sites(
    problem: DirichletProblem,
    initial: Optional[ArrayLike],
    max_iter: int,
    tolerances: Optional[Tolerances],
) -> AleksandrovSolution:
    tol = tolerances or Tolerances()
    system = _SiteSystem(problem, tol)
    state, iterations, history = _newton(system, _initial_state(system, initial), max_iter)
    u, mismatch = _assemble(problem, state.z, tol)
    sites = problem.measure.indices
    assert sites is not None
    logger.info(
        "solved %d sites in %d iterations (l1 residual %.3e)",
        system.n_s,
        iterations,
        history[-1],
    )
    return AleksandrovSolution(
        u=u,
        residual=state.masses - system.targets,
        iterations=iterations,
        sites=sites,
        targets=system.targets,
        boundary_mismatch=mismatch,
        strictly_convex=problem.strictly_convex,
        history=history,
    )


# ---------------------------------------------------------------------------
# Public solvers
# ---------------------------------------------------------------------------


def solve_homogeneous(
    problem: DirichletProblem, tolerances: Optional[Tolerances] = None
) -> AleksandrovSolution:
    """Convex envelope of the boundary data: the solution for ``mu = 0``."""
    tol = tolerances or Tolerances()
    if problem.measure.total > 0:
        raise ParameterError("solve_homogeneous needs the zero measure.")
    u, mismatch = _assemble(problem, np.zeros(0), tol)
    measure = ma_measure(u, tol)
    if measure.total > tol.meas:
        logger.warning("Homogeneous solution carries interior mass %.3e.", measure.total)
    assert measure.indices is not None
    return AleksandrovSolution(
        u=u,
        residual=measure.masses,
        iterations=0,
        sites=measure.indices,
        targets=np.zeros(len(measure.masses)),
        boundary_mismatch=mismatch,
        strictly_convex=problem.strictly_convex,
    )


def solve_dirac(
    problem: DirichletProblem,
    *,
    initial: Optional[ArrayLike] = None,
    max_iter: int = 500,
    tolerances: Optional[Tolerances] = None,
) -> AleksandrovSolution:
    """Solution for a finite sum of Dirac masses at interior vertices.

    Raises:
        ConvergenceError: If the mass residual does not reach ``tol.solve``.
    """
    if len(problem.measure.masses) == 0 or np.any(problem.measure.masses <= 0):
        raise ParameterError("solve_dirac needs positive masses at one or more sites.")
    return _solve_sites(problem, initial, max_iter, tolerances)


def solve_density(
    problem: DirichletProblem,
    *,
    initial: Optional[ArrayLike] = None,
    max_iter: int = 500,
    tolerances: Optional[Tolerances] = None,
) -> AleksandrovSolution:
    """Solution for a cell density, matched vertex by vertex on dual cells."""
    if problem.kind != "density":
        raise ParameterError("solve_density needs a problem built by DirichletProblem.density.")
    return _solve_sites(problem, initial, max_iter, tolerances)


@dataclass(frozen=True, eq=False)
class Barrier:
    """``phi + mu (exp(rho) - 1)`` with ``rho = |x - c|^2 / R^2 - 1``."""

    function: PLConvexFunction
    mu: float
    center: FloatArray
    radius: float


def barrier(
    mesh: TriMesh,
    phi: VertexData,
    *,
    mu: Optional[float] = None,
    cap: float = 1e6,
    tolerances: Optional[Tolerances] = None,
) -> Barrier:
    """Convex barrier through the vertex values of ``phi``.

    Without ``mu`` the smallest certified coefficient is found by bisection;
    convex position of the lifted vertices is monotone in ``mu``.

    Raises:
        ParameterError: If the barrier is not convex for ``mu`` up to ``cap``
            (or for the given ``mu``).
    """
    tol = tolerances or Tolerances()
    values = _sample_values(mesh, phi)
    pts = mesh.vertices
    center = mesh.domain.centroid
    radius = float(np.max(np.linalg.norm(pts - center, axis=1)))
    psi = np.expm1(np.sum((pts - center) ** 2, axis=1) / radius**2 - 1.0)

    def certified(m: float) -> bool:
        vals = values + m * psi
        scale = max(1.0, float(np.max(np.abs(vals))))
        return bool(np.all(envelope_values(pts, vals, tol.geom) >= vals - tol.conv * scale))

    if mu is not None:
        if mu < 0 or not certified(mu):
            raise ParameterError(f"Barrier is not convex at mu = {mu}.")
        chosen = float(mu)
    elif certified(0.0):
        chosen = 0.0
    elif not certified(cap):
        raise ParameterError(f"Barrier is not convex for mu up to {cap}.")
    else:
        lo, hi = 0.0, cap
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if certified(mid):
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-10 * hi:
                break
        chosen = hi
    function = PLConvexFunction.from_samples(pts, values + chosen * psi, mesh.boundary, tol.geom)
    return Barrier(function=function, mu=chosen, center=center, radius=radius)


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


class SandwichReport(BaseModel):
    """``lambda^(1/n)/2 <= |min u| <= Lambda^(1/n) n^2 / 2`` on a normalized domain."""

    min_value: float
    lower: float
    upper: float
    passed: bool


def drop_sandwich(
    solution: AleksandrovSolution, lam: float, big_lam: float, *, slack: float = 0.05
) -> SandwichReport:
    """Check the depth of a zero-boundary solution against the quadratic barriers.

    ``slack`` is the relative mesh allowance on the lower bound, which is
    attained by the constant-density solution on the unit disk.
    """
    if not 0 < lam <= big_lam:
        raise ParameterError("Need 0 < lambda <= Lambda.")
    n = 2
    depth = abs(float(np.min(solution.u.values)))
    lower = lam ** (1.0 / n) / 2.0
    upper = big_lam ** (1.0 / n) * n * n / 2.0
    return SandwichReport(
        min_value=-depth,
        lower=lower,
        upper=upper,
        passed=lower * (1.0 - slack) <= depth <= upper,
    )


def symmetry_residual(solution: AleksandrovSolution, reflection: ArrayLike) -> float:
    """``max |u(x) - u(R x)|`` over the mesh vertices."""
    r = np.asarray(reflection, dtype=float).reshape(2, 2)
    pts = solution.u.mesh.vertices
    mirrored = pts @ r.T
    domain = solution.u.mesh.domain
    if not np.all(domain.contains(mirrored, tol=1e-9)):
        raise DomainError("The reflection does not map the domain into itself.")
    return float(np.max(np.abs(solution.u(pts) - solution.u(mirrored))))


class GradientBoundReport(BaseModel):
    """Largest subgradient of a solution against the boundary slope of a barrier below it."""

    max_slope: float
    barrier_slope: float
    barrier_below: bool
    passed: bool


def gradient_bound_report(
    solution: AleksandrovSolution, barrier_fn: Barrier, tolerances: Optional[Tolerances] = None
) -> GradientBoundReport:
    tol = tolerances or Tolerances()
    u = solution.u
    b = barrier_fn.function
    if not np.array_equal(u.mesh.vertices, b.mesh.vertices):
        raise MeshMismatchError("Barrier and solution must share mesh vertices.")
    below = bool(np.all(b.values <= u.values + tol.cmp))
    max_slope = float(np.max(np.linalg.norm(u.gradients, axis=1)))
    touching = np.unique(
        np.concatenate([b.mesh.vertex_triangles[int(i)] for i in b.mesh.boundary_indices])
    )
    barrier_slope = float(np.max(np.linalg.norm(b.gradients[touching], axis=1)))
    return GradientBoundReport(
        max_slope=max_slope,
        barrier_slope=barrier_slope,
        barrier_below=below,
        passed=below and max_slope <= barrier_slope * (1.0 + tol.ineq),
    )


# ---------------------------------------------------------------------------
# JSON interface
# ---------------------------------------------------------------------------


class DomainSpec(BaseModel):
    """Domain and its mesh. ``polar`` is the disk with a high-degree center vertex."""

    kind: Literal["disk", "polar", "square", "polygon"] = "disk"
    level: int = Field(default=8, ge=1, le=256)
    radius: float = Field(default=1.0, gt=0)
    half_width: float = Field(default=1.0, gt=0)
    vertices: Optional[list[tuple[float, float]]] = None

    @model_validator(mode="after")
    def check_polygon(self) -> "DomainSpec":
        if self.kind == "polygon" and not self.vertices:
            raise ValueError("A polygon domain needs its vertices.")
        return self

    def build_mesh(self) -> TriMesh:
        if self.kind == "disk":
            return disk_mesh(self.level, self.radius)
        if self.kind == "polar":
            return polar_mesh(self.level, max(32, 8 * self.level), self.radius)
        if self.kind == "square":
            return square_mesh(2 * self.level, self.half_width)
        return domain_mesh(ConvexDomain(np.asarray(self.vertices, dtype=float)), self.level)


class BoundarySpec(BaseModel):
    """Named boundary data."""

    kind: Literal["zero", "half_square", "cos2theta", "affine"] = "zero"
    coefficients: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def evaluate(self, points: FloatArray) -> FloatArray:
        x, y = points[:, 0], points[:, 1]
        if self.kind == "zero":
            return np.zeros(len(points))
        if self.kind == "half_square":
            return np.asarray(0.5 * (x * x + y * y))
        if self.kind == "cos2theta":
            return np.asarray(np.cos(2.0 * np.arctan2(y, x)))
        a, b, c = self.coefficients
        return np.asarray(a * x + b * y + c)


class DiracSpec(BaseModel):
    x: float
    y: float
    mass: float = Field(gt=0)


class DensitySpec(BaseModel):
    """Constant density, or seeded piecewise-constant values in ``[low, high]``."""

    value: float = Field(default=1.0, gt=0)
    low: Optional[float] = Field(default=None, gt=0)
    high: Optional[float] = Field(default=None, gt=0)
    seed: int = 0

    def per_triangle(self, mesh: TriMesh) -> FloatArray:
        if self.low is None or self.high is None:
            return np.full(len(mesh.triangles), self.value)
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.low, self.high, size=len(mesh.triangles))


class ProblemSpec(BaseModel):
    """``{domain, boundary, diracs | density}``."""

    domain: DomainSpec = Field(default_factory=DomainSpec)
    boundary: Union[BoundarySpec, list[float]] = Field(default_factory=BoundarySpec)
    diracs: Optional[list[DiracSpec]] = None
    density: Optional[DensitySpec] = None

    @model_validator(mode="after")
    def check_measure(self) -> "ProblemSpec":
        if self.diracs is not None and self.density is not None:
            raise ValueError("Provide only one of 'diracs' or 'density', not both.")
        return self


def problem_from_json(data: Union[str, dict[str, Any]]) -> DirichletProblem:
    """Build a problem from its JSON text or parsed dict."""
    spec = (
        ProblemSpec.model_validate_json(data)
        if isinstance(data, str)
        else ProblemSpec.model_validate(data)
    )
    mesh = spec.domain.build_mesh()
    boundary = spec.boundary
    g: VertexData = boundary.evaluate if isinstance(boundary, BoundarySpec) else boundary
    if spec.diracs:
        sites = [(d.x, d.y) for d in spec.diracs]
        return DirichletProblem.dirac(mesh, g, sites, [d.mass for d in spec.diracs])
    if spec.density is not None:
        return DirichletProblem.density(mesh, g, spec.density.per_triangle(mesh))
    return DirichletProblem.homogeneous(mesh, g)


def solution_to_json(solution: AleksandrovSolution) -> dict[str, Any]:
    return {
        "u": solution.u.to_dict(),
        "boundary": solution.u.mesh.boundary_indices.tolist(),
        "sites": solution.sites.tolist(),
        "targets": solution.targets.tolist(),
        "residual": solution.residual.tolist(),
        "iterations": solution.iterations,
        "boundary_mismatch": solution.boundary_mismatch,
        "strictly_convex": solution.strictly_convex,
    }
