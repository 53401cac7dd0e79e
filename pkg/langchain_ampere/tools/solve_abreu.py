"""Second boundary value problem tool (prescribed affine mean curvature)."""

from __future__ import annotations

import logging
from typing import Any, Literal, Optional, Type

import numpy as np
from langchain_core.callbacks import CallbackManagerForToolRun
from pydantic import BaseModel, Field

from langchain_ampere.errors import SolverError
from langchain_ampere.numerics.abreu import (
    ContinuationResult,
    GFunction,
    SecondBVP,
    check_A1_A2_A3,
    continuation_solve,
    dual_equation_residual,
    fourth_order_residual,
    pair_residuals,
    rough_rhs,
)
from langchain_ampere.numerics.grid import GridFunction, ScalarField
from langchain_ampere.numerics.io import Table, rows_from
from langchain_ampere.numerics.render import ContourFigure
from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    OutputFormat,
)

logger = logging.getLogger(__name__)

PATH_COLUMNS = ["t", "sweeps", "ma_residual", "lin_residual", "fp_gap", "min_det", "max_det"]


class SolveAbreuInput(BaseModel):
    """Input schema for the second boundary value problem tool."""

    n: int = Field(
        default=32,
        ge=8,
        le=256,
        description="Grid cells across the unit disk; n = 32 gives a 33 x 33 grid.",
    )
    g_kind: Literal["power", "log", "loglog"] = Field(
        default="power",
        description="G family: (d^theta - 1)/theta, log d, or log d / log log.",
    )
    theta: float = Field(
        default=0.25,
        gt=0,
        description="Exponent of the power family, 0 < theta < 1/2.",
    )
    f: float = Field(
        default=0.0,
        description="Constant right-hand side (prescribed affine mean curvature), or the "
        "coefficient c of c |x|^-gamma in rough mode.",
    )
    steps: int = Field(
        default=10,
        ge=1,
        le=1000,
        description="Uniform continuation steps from t = 0 to t = 1.",
    )
    damping: float = Field(
        default=0.5,
        gt=0,
        le=1,
        description="Initial damping of the fixed-point update.",
    )
    rough_gamma: Optional[float] = Field(
        default=None,
        ge=0,
        description="Run the exploratory rough mode with f = c |x|^-gamma; checks are skipped.",
    )
    check_uniqueness: bool = Field(
        default=False,
        description="Solve a second time from a different initial w and compare.",
    )
    output_format: OutputFormat = Field(
        default="json",
        description="'json' returns the result, 'file_path' writes it to a temporary file.",
    )


class AmpereSolveAbreuTool(AmpereBaseTool):
    """Tool for ``U^ij w_ij = f``, ``w = G'(det D^2 u)`` with ``u`` and ``w`` given on the boundary.

    Data ``phi = |x|^2/2`` and ``psi = G'(1)`` on the unit disk. With ``f = 0``
    the quadratic ``|x|^2/2`` is the exact solution and every check is tight.

    Example:
        ```python
        from langchain_ampere import AmpereSolveAbreuTool

        tool = AmpereSolveAbreuTool()
        result = tool.invoke({"f": 0.0, "theta": 0.25, "steps": 10})
        ```
    """

    name: str = "ampere_solve_abreu"
    description: str = (
        "Solve the second boundary value problem of the prescribed affine mean curvature "
        "equation on the unit disk by continuation in t. Returns the continuation path, "
        "structural checks of G and residuals of the fourth-order and dual equations."
    )
    args_schema: Type[BaseModel] = SolveAbreuInput

    def _run(
        self,
        n: int = 32,
        g_kind: str = "power",
        theta: float = 0.25,
        f: float = 0.0,
        steps: int = 10,
        damping: float = 0.5,
        rough_gamma: Optional[float] = None,
        check_uniqueness: bool = False,
        output_format: str = "json",
        run_manager: Optional[CallbackManagerForToolRun] = None,
    ) -> str:
        """Solve synchronously.

        Returns:
            Result JSON or the path of a file holding it.
        """
        result = self.run_experiment(
            n=n, g_kind=g_kind, theta=theta, f=f, steps=steps, damping=damping,
            rough_gamma=rough_gamma, check_uniqueness=check_uniqueness,
        )
        return self._format_output(result, output_format)

    def run_experiment(
        self,
        n: int = 32,
        g_kind: str = "power",
        theta: float = 0.25,
        f: float = 0.0,
        steps: int = 10,
        damping: float = 0.5,
        rough_gamma: Optional[float] = None,
        check_uniqueness: bool = False,
        **_: Any,
    ) -> ExperimentResult:
        tol = self.tol
        g = GFunction(kind=g_kind, theta=theta)  # type: ignore[arg-type]
        grid = GridFunction.disk(n)
        rough = rough_gamma is not None
        rhs: ScalarField = rough_rhs(f or 1.0, rough_gamma) if rough_gamma is not None else f
        problem = SecondBVP(
            grid=grid,
            f=rhs,
            phi=lambda x, y: 0.5 * (x * x + y * y),
            psi=float(g.first(1.0)),
            g=g,
        )
        conditions = check_A1_A2_A3(g)
        checks: list[CheckResult] = []
        if conditions.passed:
            checks.append(CheckResult.holds("g_conditions", True))
        else:
            checks.append(
                CheckResult.skipped(
                    "g_conditions", f"failing: {', '.join(conditions.failing)}"
                )
            )
        cond_table = Table(name="g_conditions", columns=["condition", "status", "detail"])
        for v in (conditions.a1, conditions.a2, conditions.a3):
            cond_table.append(v.name, v.status, v.detail)

        try:
            result = continuation_solve(
                problem, steps=steps, damping=damping, tolerances=tol
            )
        except SolverError as exc:
            if not rough:
                raise
            logger.warning("rough run stopped: %s", exc)
            checks.append(CheckResult.skipped("continuation", f"stalled: {exc}"))
            return ExperimentResult(
                experiment="solve-abreu-rough",
                checks=checks,
                tables=[cond_table],
                artifacts={
                    "stall": {
                        "error": type(exc).__name__,
                        "message": str(exc),
                        "t_reached": getattr(exc, "t_reached", None),
                        "history": exc.history,
                    }
                },
            )

        state = result.state
        inside = grid.in_domain
        path = Table(name="path", columns=PATH_COLUMNS, rows=rows_from(result.path, PATH_COLUMNS))
        fourth = fourth_order_residual(state.u, g, f=rhs, t=1.0)
        artifacts: dict[str, Any] = {
            "u": state.u.to_dict(),
            "w": state.w.to_dict(),
            "fourth_order_residual": fourth.max_norm,
        }
        if rough:
            checks.append(
                CheckResult.skipped("continuation", "rough mode, reached t = 1")
            )
            checks.append(
                CheckResult.skipped(
                    "fourth_order_residual", "rough mode", value=fourth.max_norm
                )
            )
        else:
            checks.extend(self._path_checks(result, inside))
            checks.extend(self._residual_checks(result, g, f, fourth.max_norm))
            if check_uniqueness:
                checks.append(self._uniqueness_check(problem, result, steps, damping))
        return ExperimentResult(
            experiment="solve-abreu-rough" if rough else "solve-abreu",
            checks=checks,
            tables=[path, cond_table],
            artifacts=artifacts,
            figures={
                "u": ContourFigure(state.u, title="u"),
                "w": ContourFigure(state.w, title="w"),
            },
        )

    def _path_checks(
        self, result: ContinuationResult, inside: np.ndarray
    ) -> list[CheckResult]:
        min_det = min(row.min_det for row in result.path)
        min_w = float(np.min(result.state.w.values[inside]))
        return [
            CheckResult.at_least("det_lower_bound", min_det, 0.0, "min det D^2 u along the path"),
            CheckResult.at_least("w_positive", min_w, 0.0),
            CheckResult.at_most("final_fp_gap", result.state.fp_gap, self.tol.fp),
        ]

    def _residual_checks(
        self, result: ContinuationResult, g: GFunction, f: float, fourth: float
    ) -> list[CheckResult]:
        u = result.state.u
        if f != 0.0:
            h = u.h
            pair = pair_residuals(u, result.state.w, g, f=f)
            # Mesh error plus the last fixed-point gap seen through the stencil.
            limit = h * h + 16.0 * result.state.fp_gap / (h * h)
            return [
                CheckResult.at_most(
                    "curvature_equation", pair.equation, limit, f"U^ij w_ij = {f:g}"
                ),
                CheckResult.at_most(
                    "w_det_consistency", pair.consistency, h, "w against G'(det D^2 u)"
                ),
                CheckResult.skipped(
                    "fourth_order_residual", "four differences of u, reported only", value=fourth
                ),
            ]
        exact = u.sample(lambda x, y: 0.5 * (x * x + y * y))
        error = float(np.max(np.abs(u.values - exact.values)[u.in_domain]))
        dual = dual_equation_residual(u, g)
        return [
            CheckResult.at_most("quadratic_exact", error, 1e-8),
            CheckResult.at_most("fourth_order_residual", fourth, 1e-8),
            CheckResult.at_most("dual_residual", dual.max_norm, u.h * u.h),
        ]

    def _uniqueness_check(
        self, problem: SecondBVP, first: ContinuationResult, steps: int, damping: float
    ) -> CheckResult:
        second = continuation_solve(
            problem,
            steps=steps,
            damping=damping,
            initial_w=lambda x, y: 1.0 + 0.5 * (x * x + y * y),
            tolerances=self.tol,
        )
        inside = problem.grid.in_domain
        gap = float(np.max(np.abs(first.state.w.values - second.state.w.values)[inside]))
        return CheckResult.at_most("uniqueness", gap, 2.0 * self.tol.fp)
