"""Second boundary value problem for prescribed affine mean curvature.

``U^ij w_ij = f`` with ``w = G'(det D^2 u)``, ``u = phi`` and ``w = psi`` on the
boundary. The solver follows the fixed-point map ``w -> w_t``: solve
``det D^2 u = Theta(w)`` for ``u``, then the linear equation
``U^ij (w_t)_ij = t f`` with ``w_t = t psi + (1 - t)`` on the boundary, and
march ``t`` from 0 to 1.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Callable, Literal, Optional, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.ndimage import binary_erosion
from scipy.optimize import brentq

from langchain_ampere.config import Tolerances
from langchain_ampere.errors import (
    AdmissibleRangeError,
    BoundaryDataError,
    DegenerateHessianError,
    FixedPointStall,
    ParameterError,
    StencilError,
)
from langchain_ampere.numerics.convex_core import PLConvexFunction, conjugate_at
from langchain_ampere.numerics.geometry import FloatArray
from langchain_ampere.numerics.grid import (
    EXTERIOR,
    INTERIOR,
    GridFunction,
    ScalarField,
    as_values,
    grid_mesh,
)
from langchain_ampere.numerics.linma_fd import (
    CofactorField,
    apply_operator,
    discrete_hessian,
    solve_cofactor_system,
)
from langchain_ampere.numerics.ma_dirichlet import DirichletProblem, solve_density
from langchain_ampere.numerics.mesh import ConvexDomain, IntArray, TriMesh

logger = logging.getLogger(__name__)

W_MIN = 1e-8
W_MAX = 1e8

_FULL = np.ones((3, 3), dtype=bool)


# ---------------------------------------------------------------------------
# G functions
# ---------------------------------------------------------------------------


class GFunction(BaseModel):
    """Smooth, increasing, strictly concave ``G`` on ``(0, inf)``.

    ``power``: ``(d^theta - 1) / theta`` with ``0 < theta < 1/n``;
    ``log``: ``log d`` (the ``theta = 0`` member);
    ``loglog``: ``log d / log log(d + exp(exp(4 n)))``.
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["power", "log", "loglog"] = "power"
    theta: float = 0.25
    n: int = Field(default=2, ge=2)

    @model_validator(mode="after")
    def check_theta(self) -> "GFunction":
        if self.kind == "power" and not 0.0 < self.theta < 1.0 / self.n:
            raise ValueError(
                f"Power G needs 0 < theta < 1/n = {1.0 / self.n:.6g}, got {self.theta}; "
                "use kind='log' for theta = 0."
            )
        return self

    @property
    def is_affine_case(self) -> bool:
        """``theta = 1/(n+2)``: the affine mean curvature normalization."""
        return self.kind == "power" and abs(self.theta - 1.0 / (self.n + 2)) < 1e-12

    def _loglog_parts(self, d: FloatArray) -> tuple[FloatArray, ...]:
        big = math.exp(4.0 * self.n)
        tiny = math.exp(-big)
        s = big + np.log1p(d * tiny)
        s1 = tiny / (1.0 + d * tiny)
        s2 = -s1 * s1
        lg = np.log(s)
        l1 = s1 / s
        l2 = (s2 * s - s1 * s1) / (s * s)
        return lg, l1, l2

    def value(self, d: ArrayLike) -> FloatArray:
        x = np.asarray(d, dtype=float)
        if self.kind == "power":
            return np.asarray(np.expm1(self.theta * np.log(x)) / self.theta)
        if self.kind == "log":
            return np.asarray(np.log(x))
        lg, _, _ = self._loglog_parts(x)
        return np.asarray(np.log(x) / lg)

    def first(self, d: ArrayLike) -> FloatArray:
        """``G'(d)``."""
        x = np.asarray(d, dtype=float)
        if self.kind == "power":
            return np.asarray(x ** (self.theta - 1.0))
        if self.kind == "log":
            return np.asarray(1.0 / x)
        lg, l1, _ = self._loglog_parts(x)
        return np.asarray(1.0 / (x * lg) - np.log(x) * l1 / lg**2)

    def second(self, d: ArrayLike) -> FloatArray:
        """``G''(d)``."""
        x = np.asarray(d, dtype=float)
        if self.kind == "power":
            return np.asarray((self.theta - 1.0) * x ** (self.theta - 2.0))
        if self.kind == "log":
            return np.asarray(-1.0 / (x * x))
        lg, l1, l2 = self._loglog_parts(x)
        ln = np.log(x)
        return np.asarray(
            -1.0 / (x * x * lg)
            - 2.0 * l1 / (x * lg**2)
            - ln * l2 / lg**2
            + 2.0 * ln * l1 * l1 / lg**3
        )

    def inverse_first(self, w: ArrayLike) -> FloatArray:
        """``Theta(w) = (G')^{-1}(w)``."""
        y = np.asarray(w, dtype=float)
        if self.kind == "power":
            return np.asarray(y ** (1.0 / (self.theta - 1.0)))
        if self.kind == "log":
            return np.asarray(1.0 / y)
        flat = y.reshape(-1)
        out = np.empty_like(flat)
        for k, target in enumerate(flat):
            def gap(s: float, target: float = float(target)) -> float:
                return float(np.log(self.first(math.exp(s))) - math.log(target))

            try:
                out[k] = math.exp(brentq(gap, -700.0, 700.0, xtol=1e-14, rtol=1e-15))
            except ValueError as exc:
                raise AdmissibleRangeError("w left admissible range") from exc
        return out.reshape(y.shape)

    def dual(self, d: ArrayLike) -> FloatArray:
        """``w*(d) = G(d) - d G'(d)``."""
        x = np.asarray(d, dtype=float)
        return np.asarray(self.value(x) - x * self.first(x))


class ConditionVerdict(BaseModel):
    """Sampled verdict for one structural condition, with its witnessing samples."""

    name: str
    status: Literal["pass", "fail", "inconclusive"]
    detail: str = ""
    samples: list[tuple[float, float]] = Field(default_factory=list)


class ConditionReport(BaseModel):
    a1: ConditionVerdict
    a2: ConditionVerdict
    a3: ConditionVerdict

    @property
    def passed(self) -> bool:
        return all(v.status == "pass" for v in (self.a1, self.a2, self.a3))

    @property
    def failing(self) -> list[str]:
        return [v.name for v in (self.a1, self.a2, self.a3) if v.status != "pass"]


def _growth_verdict(
    name: str, d: FloatArray, values: FloatArray, first: int, margin: float
) -> ConditionVerdict:
    samples = [(float(a), float(b)) for a, b in zip(d, values)]
    if not np.all(np.isfinite(values)):
        return ConditionVerdict(
            name=name, status="inconclusive", detail="inconclusive at range edge", samples=samples
        )
    increasing = bool(np.all(np.diff(values) > 0))
    grew = bool(values[-1] > values[first] + margin)
    status: Literal["pass", "fail"] = "pass" if increasing and grew else "fail"
    detail = ""
    if status == "fail":
        detail = "not increasing" if not increasing else "growth below margin"
    return ConditionVerdict(name=name, status=status, detail=detail, samples=samples)


def check_A1_A2_A3(g: GFunction, margin: float = 0.5) -> ConditionReport:  # noqa: N802
    """Sampled checks of the three structural conditions on ``G``.

    A1: ``w' + (1 - 1/n) w / d <= 0`` with ``w = G'`` on ``d in [1e-4, 1e4]``.
    A2: ``G(d) - d G'(d)`` grows along ``d = 10^k``, ``k = 1..8``.
    A3: ``d^(1 - 1/n) G'(d)`` grows along ``d = 10^-k``, ``k = 1..8``.
    """
    n = g.n
    with np.errstate(all="ignore"):
        d1 = np.logspace(-4.0, 4.0, 81)
        expr = g.second(d1) + (1.0 - 1.0 / n) * g.first(d1) / d1
        scale = np.maximum(1e-300, np.abs(g.second(d1)))
        samples = [(float(a), float(b)) for a, b in zip(d1, expr)]
        if not np.all(np.isfinite(expr)):
            a1 = ConditionVerdict(
                name="A1", status="inconclusive", detail="inconclusive at range edge",
                samples=samples,
            )
        else:
            bad = expr > 1e-12 * scale
            a1 = ConditionVerdict(
                name="A1",
                status="fail" if np.any(bad) else "pass",
                detail=f"violated at d = {float(d1[np.argmax(bad)]):.3g}" if np.any(bad) else "",
                samples=samples,
            )
        d2 = 10.0 ** np.arange(1, 9)
        a2 = _growth_verdict("A2", d2, g.dual(d2), first=3, margin=margin)
        d3 = 10.0 ** -np.arange(1, 9, dtype=float)
        a3 = _growth_verdict(
            "A3", d3, d3 ** (1.0 - 1.0 / n) * g.first(d3), first=3, margin=margin
        )
    return ConditionReport(a1=a1, a2=a2, a3=a3)


# ---------------------------------------------------------------------------
# Problem and states
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SecondBVP:
    """Grid domain, right-hand side ``f`` and the boundary data of ``u`` and ``w``."""

    grid: GridFunction
    f: ScalarField
    phi: ScalarField
    psi: ScalarField
    g: GFunction = field(default_factory=GFunction)

    def __post_init__(self) -> None:
        if self.g.n != 2:
            raise ParameterError("The PDE pipeline runs in two dimensions (n = 2).")
        if not np.all(np.isfinite(self.f_values[self.grid.in_domain])):
            raise ParameterError("Right-hand side must be finite.")
        psi_b = self.psi_values[self.grid.boundary]
        if not np.all(np.isfinite(psi_b)) or float(np.min(psi_b)) <= 0:
            raise BoundaryDataError("Boundary data for w needs inf psi > 0.")

    @cached_property
    def f_values(self) -> FloatArray:
        return as_values(self.grid, self.f)

    @cached_property
    def phi_values(self) -> FloatArray:
        return as_values(self.grid, self.phi)

    @cached_property
    def psi_values(self) -> FloatArray:
        return as_values(self.grid, self.psi)

    @cached_property
    def mesh(self) -> tuple[TriMesh, IntArray]:
        """Grid mesh and the node index of every mesh vertex."""
        mesh, vertex_of = grid_mesh(self.grid)
        return mesh, np.flatnonzero(vertex_of >= 0)


@dataclass(frozen=True, eq=False)
class ContinuationState:
    """Iterate of the fixed-point map at parameter ``t``."""

    t: float
    u: GridFunction
    w: GridFunction
    sweeps: int = 0
    ma_residual: float = math.inf
    lin_residual: float = math.inf
    fp_gap: float = math.inf
    min_det: float = math.nan
    max_det: float = math.nan
    site_values: Optional[FloatArray] = None

    @classmethod
    def start(cls, problem: SecondBVP, w0: Optional[ScalarField] = None) -> "ContinuationState":
        grid = problem.grid
        w = grid.with_values(np.ones(grid.mask.shape) if w0 is None else as_values(grid, w0))
        return cls(t=0.0, u=grid.with_values(problem.phi_values), w=w)


def _check_range(w: FloatArray, where: NDArray[np.bool_]) -> None:
    vals = w[where]
    if not np.all(np.isfinite(vals)) or np.any(vals < W_MIN) or np.any(vals > W_MAX):
        raise AdmissibleRangeError(
            "w left admissible range",
            residual=float(np.max(np.abs(vals[np.isfinite(vals)]), initial=0.0)),
        )


def _ma_stage(
    problem: SecondBVP, w: GridFunction, initial: Optional[FloatArray], tol: Tolerances
) -> tuple[GridFunction, float, FloatArray]:
    """``det D^2 u = Theta(w)`` on the grid mesh, densities averaged to triangles."""
    grid = problem.grid
    _check_range(w.values, grid.in_domain)
    mesh, nodes = problem.mesh
    with np.errstate(all="ignore"):
        theta = problem.g.inverse_first(w.values.ravel()[nodes])
    if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
        raise AdmissibleRangeError("w left admissible range")
    density = theta[mesh.triangles].mean(axis=1)
    ma_problem = DirichletProblem.density(
        mesh, problem.phi_values.ravel()[nodes], density, staircase=True
    )
    solution = solve_density(ma_problem, initial=initial, tolerances=tol)
    values = np.zeros(grid.mask.size)
    values[nodes] = solution.u.values
    assert ma_problem.measure.indices is not None
    sites = solution.u.values[ma_problem.measure.indices]
    return grid.with_values(values.reshape(grid.mask.shape)), solution.max_relative_residual, sites


def phi_t_step(
    state: ContinuationState,
    problem: SecondBVP,
    *,
    damping: float = 0.5,
    tolerances: Optional[Tolerances] = None,
) -> ContinuationState:
    """One damped application of the fixed-point map at ``state.t``.

    Raises:
        AdmissibleRangeError: If ``w`` leaves ``[1e-8, 1e8]``.
        DegenerateHessianError: If the MA stage returns a non-convex grid function.
    """
    tol = tolerances or Tolerances()
    if not 0 < damping <= 1:
        raise ParameterError("Damping must lie in (0, 1].")
    grid = problem.grid
    t = state.t
    u, ma_residual, sites = _ma_stage(problem, state.w, state.site_values, tol)
    hess = discrete_hessian(u)
    det = hess.det[hess.nodes]
    cof = CofactorField.from_hessian(hess, tol.psd)
    boundary = t * problem.psi_values + (1.0 - t)
    lin = solve_cofactor_system(
        cof, u, grid.with_values(t * problem.f_values), grid.with_values(boundary), tol
    )
    inside = grid.in_domain
    w_old = state.w.values
    gap = float(np.max(np.abs(lin.v.values - w_old)[inside]))
    w_new = np.where(inside, w_old + damping * (lin.v.values - w_old), 0.0)
    _check_range(w_new, inside)
    logger.debug("t=%.4f sweep %d: fp gap %.3e", t, state.sweeps + 1, gap)
    return ContinuationState(
        t=t,
        u=u,
        w=grid.with_values(w_new),
        sweeps=state.sweeps + 1,
        ma_residual=ma_residual,
        lin_residual=lin.residual_norm / max(lin.rhs_norm, 1.0),
        fp_gap=gap,
        min_det=float(np.min(det)),
        max_det=float(np.max(det)),
        site_values=sites,
    )


class PathRow(BaseModel):
    """One accepted parameter value of the continuation."""

    t: float
    sweeps: int
    ma_residual: float
    lin_residual: float
    fp_gap: float
    min_det: float
    max_det: float


class ContinuationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    state: ContinuationState
    path: list[PathRow]
    conditions: ConditionReport


def _fixed_point(
    state: ContinuationState,
    problem: SecondBVP,
    t: float,
    damping: float,
    max_sweeps: int,
    tol: Tolerances,
) -> tuple[Optional[ContinuationState], int, list[float]]:
    current = replace(state, t=t)
    s = damping
    previous = math.inf
    gaps: list[float] = []
    for sweep in range(1, max_sweeps + 1):
        current = phi_t_step(current, problem, damping=s, tolerances=tol)
        gaps.append(current.fp_gap)
        if current.fp_gap <= tol.fp:
            return current, sweep, gaps
        if current.fp_gap > previous:
            s = max(0.5 * s, 1.0 / 1024.0)
        previous = current.fp_gap
    return None, max_sweeps, gaps


def continuation_solve(
    problem: SecondBVP,
    *,
    steps: int = 10,
    damping: float = 0.5,
    max_sweeps: int = 200,
    min_step: float = 1e-4,
    initial_w: Optional[ScalarField] = None,
    tolerances: Optional[Tolerances] = None,
) -> ContinuationResult:
    """March ``t`` over ``0, 1/steps, ..., 1``, bisecting steps that stall.

    Raises:
        FixedPointStall: If a step shorter than ``min_step`` still stalls.
    """
    tol = tolerances or Tolerances()
    conditions = check_A1_A2_A3(problem.g)
    if not conditions.passed:
        logger.warning("G fails %s; continuing anyway.", ", ".join(conditions.failing))

    path: list[PathRow] = []

    def record(state: ContinuationState, sweeps: int) -> None:
        path.append(
            PathRow(
                t=state.t,
                sweeps=sweeps,
                ma_residual=state.ma_residual,
                lin_residual=state.lin_residual,
                fp_gap=state.fp_gap,
                min_det=state.min_det,
                max_det=state.max_det,
            )
        )
        logger.info(
            "t=%.4f accepted after %d sweeps (det in [%.3g, %.3g])",
            state.t, sweeps, state.min_det, state.max_det,
        )

    state = ContinuationState.start(problem, initial_w)
    reached, sweeps, gaps = _fixed_point(state, problem, 0.0, damping, max_sweeps, tol)
    if reached is None:
        raise FixedPointStall(
            "Fixed-point iteration stalled at t = 0.", t_reached=0.0, residual=gaps[-1],
            history=gaps,
        )
    state = reached
    record(state, sweeps)
    t_done = 0.0
    for target in np.linspace(0.0, 1.0, steps + 1)[1:]:
        while t_done < target - 1e-14:
            step = float(target) - t_done
            while True:
                t_try = t_done + step
                reached, sweeps, gaps = _fixed_point(
                    state, problem, t_try, damping, max_sweeps, tol
                )
                if reached is not None:
                    break
                step *= 0.5
                logger.info("bisecting continuation step at t=%.4f to %.3g", t_done, step)
                if step < min_step:
                    raise FixedPointStall(
                        f"Fixed-point iteration stalled beyond t = {t_done:.6g}.",
                        t_reached=t_done,
                        residual=gaps[-1] if gaps else None,
                        history=gaps,
                    )
            state = reached
            t_done = t_try
            record(state, sweeps)
    return ContinuationResult(state=state, path=path, conditions=conditions)


# ---------------------------------------------------------------------------
# Residuals
# ---------------------------------------------------------------------------


class FourthOrderReport(BaseModel):
    """``U^ij w_ij - t f`` on nodes two layers inside the domain."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    residual: GridFunction
    max_norm: float
    nodes: int
    affine_curvature: Optional[GridFunction] = None


def _valid_nodes(grid: GridFunction) -> NDArray[np.bool_]:
    return np.asarray(binary_erosion(grid.interior, structure=_FULL))


def _on_nodes(grid: GridFunction, where: NDArray[np.bool_], values: FloatArray) -> GridFunction:
    mask = np.where(where, INTERIOR, EXTERIOR).astype(np.int8)
    return GridFunction(grid.origin, grid.h, mask, np.where(where, values, 0.0))


def _convex_hessian(u: GridFunction) -> tuple[CofactorField, FloatArray]:
    hess = discrete_hessian(u)
    det = hess.det
    cof = CofactorField.from_hessian(hess)
    bad = hess.nodes & (cof.nonpsd | ~(det > 0))
    if np.any(bad):
        raise DegenerateHessianError(f"degenerate Hessian nodes: {int(np.sum(bad))}")
    return cof, det


def _operator_of_g(u: GridFunction, g: GFunction, use_dual: bool) -> tuple[FloatArray, FloatArray]:
    """``U^ij w_ij`` with ``w = G'(det)`` (or ``w* = G(1/det) - G'(1/det)/det``)."""
    cof, det = _convex_hessian(u)
    with np.errstate(all="ignore"):
        w = g.dual(1.0 / det) if use_dual else g.first(det)
    w_grid = u.with_values(np.where(cof.nodes, w, 0.0))
    return apply_operator(cof, w_grid), det


def fourth_order_residual(
    u: GridFunction,
    g: GFunction,
    *,
    f: Optional[ScalarField] = None,
    t: float = 1.0,
) -> FourthOrderReport:
    """``L[u] - t f`` with ``L[u] = U^ij w_ij``, ``w = G'(det D^2 u)``.

    In the affine case ``theta = 1/(n+2)`` the affine mean curvature
    ``-L[u]/(n+1)`` is reported too.
    """
    valid = _valid_nodes(u)
    if not np.any(valid):
        raise StencilError("No node lies two layers inside the domain.")
    op, _ = _operator_of_g(u, g, use_dual=False)
    rhs = np.zeros(u.mask.shape) if f is None else t * as_values(u, f)
    res = op - rhs
    curvature = None
    if g.is_affine_case:
        curvature = _on_nodes(u, valid, -op / (g.n + 1))
    return FourthOrderReport(
        residual=_on_nodes(u, valid, res),
        max_norm=float(np.max(np.abs(res[valid]))),
        nodes=int(np.sum(valid)),
        affine_curvature=curvature,
    )


def affine_mean_curvature(u: GridFunction) -> GridFunction:
    """``-(1/(n+1)) U^ij w_ij`` with ``w = det^(-(n+1)/(n+2))``, on nodes two layers in."""
    report = fourth_order_residual(u, GFunction(kind="power", theta=0.25))
    assert report.affine_curvature is not None
    return report.affine_curvature


class PairReport(BaseModel):
    """Residuals of a discrete pair ``(u, w)`` on nodes two layers inside the domain.

    ``equation`` is ``max |U^ij w_ij - t f|`` with the solver's own ``w``;
    ``consistency`` is ``max |w - G'(det D^2 u)| / max |w|``.
    """

    equation: float
    consistency: float
    nodes: int


def pair_residuals(
    u: GridFunction,
    w: GridFunction,
    g: GFunction,
    *,
    f: Optional[ScalarField] = None,
    t: float = 1.0,
) -> PairReport:
    u.require_same_grid(w)
    valid = _valid_nodes(u)
    if not np.any(valid):
        raise StencilError("No node lies two layers inside the domain.")
    cof, det = _convex_hessian(u)
    rhs = np.zeros(u.mask.shape) if f is None else t * as_values(u, f)
    equation = apply_operator(cof, w) - rhs
    with np.errstate(all="ignore"):
        gap = np.abs(w.values - g.first(det))
    return PairReport(
        equation=float(np.max(np.abs(equation[valid]))),
        consistency=float(np.max(gap[valid]) / np.max(np.abs(w.values[valid]))),
        nodes=int(np.sum(valid)),
    )


class DualReport(BaseModel):
    """Residual of the Legendre-dual equation on the image grid."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    residual: GridFunction
    max_norm: float
    nodes: int
    spacing: float


def _pair_slices(dj: int, di: int) -> tuple[tuple[slice, slice], tuple[slice, slice]]:
    a = (slice(0, -dj or None), slice(max(-di, 0), (-di if di > 0 else None)))
    b = (slice(dj, None), slice(max(di, 0), (None if di >= 0 else di)))
    return a, b


def _require_injective_gradient(u: GridFunction) -> None:
    gx, gy = u.gradient()
    inner = u.interior
    for dj, di in ((0, 1), (1, 0), (1, 1), (1, -1)):
        a, b = _pair_slices(dj, di)
        both = inner[a] & inner[b]
        dot = (gx[b] - gx[a]) * di + (gy[b] - gy[a]) * dj
        if np.any(dot[both] <= 0):
            raise ParameterError("gradient map is not injective (monotonicity check failed)")


def dual_equation_residual(
    u: GridFunction,
    g: GFunction,
    *,
    f: Optional[Callable[[FloatArray], FloatArray]] = None,
    spacing: Optional[float] = None,
) -> DualReport:
    """``U*^ij w*_ij + f(Du*) det D^2 u*`` for the Legendre transform ``u*``.

    ``u*`` is evaluated exactly from the convex PL interpolant of ``u`` on an
    image grid aligned to integer multiples of ``spacing``, restricted to the
    slope hull shrunk by two spacings. ``w* = G(d) - d G'(d)`` with
    ``d = 1 / det D^2 u*``.
    """
    _require_injective_gradient(u)
    delta = float(spacing or u.h)
    pl = PLConvexFunction.from_samples(u.points(), u.values[u.in_domain])
    slopes = ConvexDomain.from_points(pl.gradients)
    lo = np.floor(slopes.vertices.min(axis=0) / delta) - 1
    hi = np.ceil(slopes.vertices.max(axis=0) / delta) + 1
    dims = (int(hi[0] - lo[0]) + 1, int(hi[1] - lo[1]) + 1)

    def inside(x: FloatArray, y: FloatArray) -> NDArray[np.bool_]:
        pts = np.column_stack([x.ravel(), y.ravel()])
        return np.asarray(slopes.signed_distance(pts) <= -2.0 * delta).reshape(x.shape)

    image = GridFunction.on_box(lo * delta, delta, dims, inside)
    if not np.any(image.interior):
        raise StencilError("Image grid has no interior node; refine the spacing.")
    values = np.zeros(image.mask.shape)
    values[image.in_domain] = conjugate_at(pl, image.points())
    ustar = image.with_values(values)
    op, det = _operator_of_g(ustar, g, use_dual=True)
    valid = _valid_nodes(ustar)
    if not np.any(valid):
        raise StencilError("No image node lies two layers inside the slope domain.")
    res = op.copy()
    if f is not None:
        gx, gy = ustar.gradient()
        pts = np.column_stack([gx[valid], gy[valid]])
        res[valid] += np.asarray(f(pts), dtype=float) * det[valid]
    return DualReport(
        residual=_on_nodes(ustar, valid, res),
        max_norm=float(np.max(np.abs(res[valid]))),
        nodes=int(np.sum(valid)),
        spacing=delta,
    )


# ---------------------------------------------------------------------------
# Singular radial profiles and rough data
# ---------------------------------------------------------------------------

Number = Union[int, Fraction, float]


def singular_profile_polynomial(alpha: Number, n: Number) -> Number:
    """``8 alpha^2 - (n^2 - 4n + 12) alpha + 2 (n - 1)^2``; exact for rational input."""
    a = Fraction(alpha) if not isinstance(alpha, float) else alpha
    m = Fraction(n) if not isinstance(n, float) else n
    return 8 * a * a - (m * m - 4 * m + 12) * a + 2 * (m - 1) ** 2


def singular_profile_exponents(n: int) -> tuple[float, ...]:
    """Real roots in ``alpha`` of the singular profile polynomial (empty if complex)."""
    b = n * n - 4 * n + 12
    disc = b * b - 64 * (n - 1) ** 2
    if disc < 0:
        return ()
    root = math.isqrt(disc) if math.isqrt(disc) ** 2 == disc else math.sqrt(disc)
    return tuple(sorted({(b - root) / 16.0, (b + root) / 16.0}))


def rough_rhs(c: float, gamma: float, r_min: float = 1e-3) -> Callable[..., FloatArray]:
    """``f(x) = c |x|^-gamma`` with ``|x|`` floored at ``r_min``."""
    if gamma < 0:
        raise ParameterError("gamma must be nonnegative.")

    def f(x: FloatArray, y: FloatArray) -> FloatArray:
        r = np.maximum(np.hypot(x, y), r_min)
        return np.asarray(c * r ** (-gamma))

    return f
