"""Dirichlet Monge-Ampère solver tool."""

from __future__ import annotations

import math
from typing import Any, Literal, Optional, Type

import numpy as np
from langchain_core.callbacks import CallbackManagerForToolRun
from pydantic import BaseModel, Field

from langchain_ampere.config import Tolerances
from langchain_ampere.numerics.convex_core import (
    PLConvexFunction,
    aleksandrov_bound,
    comparison_check,
)
from langchain_ampere.numerics.io import Table
from langchain_ampere.numerics.ma_dirichlet import (
    AleksandrovSolution,
    DirichletProblem,
    DomainSpec,
    ProblemSpec,
    drop_sandwich,
    problem_from_json,
    solution_to_json,
    solve_density,
    solve_dirac,
    solve_homogeneous,
)
from langchain_ampere.numerics.render import SweepFigure
from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    OutputFormat,
)


def parse_diracs(text: str) -> tuple[list[tuple[float, float]], list[float]]:
    """``"x,y,mass;x,y,mass"`` to sites and masses."""
    sites, masses = [], []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = [float(p) for p in chunk.split(",")]
        if len(parts) != 3:
            raise ValueError(f"Dirac '{chunk}' must be 'x,y,mass'.")
        sites.append((parts[0], parts[1]))
        masses.append(parts[2])
    if not sites:
        raise ValueError("At least one Dirac mass is required.")
    return sites, masses


class SolveMAInput(BaseModel):
    """Input schema for the Monge-Ampère Dirichlet tool."""

    dirac: str = Field(
        default="0,0,1",
        description="Dirac masses as 'x,y,mass', several separated by ';'. Zero boundary data.",
    )
    domain: Literal["disk", "polar", "square"] = Field(
        default="disk",
        description="Domain mesh for the Dirac problem.",
    )
    levels: list[int] = Field(
        default_factory=lambda: [4, 8],
        min_length=1,
        description="Mesh levels for the refinement study.",
    )
    problem: Optional[dict[str, Any]] = Field(
        default=None,
        description="Full problem JSON {domain, boundary, diracs | density}. Overrides dirac, "
        "domain and levels.",
    )
    output_format: OutputFormat = Field(
        default="json",
        description="'json' returns the result, 'file_path' writes it to a temporary file.",
    )


def _maximum_principle_checks(
    problem: DirichletProblem, solution: AleksandrovSolution, tol: Tolerances, suffix: str
) -> list[CheckResult]:
    """Comparison with the homogeneous solution and, for zero data, the Aleksandrov bound."""
    checks = []
    homogeneous = solve_homogeneous(
        DirichletProblem.homogeneous(problem.mesh, problem.boundary_values), tol
    )
    verdict = comparison_check(homogeneous.u, solution.u, tol)
    checks.append(CheckResult.holds(f"comparison{suffix}", verdict.passed, verdict.detail))
    boundary = problem.boundary_values[problem.mesh.boundary_indices]
    if np.all(np.abs(boundary) <= tol.bc):
        report = aleksandrov_bound(solution.u, tol)
        checks.append(CheckResult.holds(f"aleksandrov_bound{suffix}", report.passed))
    else:
        checks.append(
            CheckResult.skipped(f"aleksandrov_bound{suffix}", "nonzero boundary data")
        )
    return checks


class AmpereSolveMATool(AmpereBaseTool):
    """Tool for Aleksandrov solutions of the Dirichlet Monge-Ampère problem.

    With a single unit mass at the center of the unit disk the solution is the
    cone ``sqrt(1/pi) (|x| - 1)``, which the tool uses as an oracle.

    Example:
        ```python
        from langchain_ampere import AmpereSolveMATool

        tool = AmpereSolveMATool()
        result = tool.invoke({"dirac": "0,0,1", "domain": "disk", "levels": [4, 8]})
        ```
    """

    name: str = "ampere_solve_ma"
    description: str = (
        "Solve det D^2 u = mu with u = g on the boundary of a convex domain for a sum of "
        "Dirac masses or a cell density. Returns the piecewise-linear solution, per-site "
        "residuals, the error against the cone solution and maximum-principle checks."
    )
    args_schema: Type[BaseModel] = SolveMAInput

    def _run(
        self,
        dirac: str = "0,0,1",
        domain: str = "disk",
        levels: Optional[list[int]] = None,
        problem: Optional[dict[str, Any]] = None,
        output_format: str = "json",
        run_manager: Optional[CallbackManagerForToolRun] = None,
    ) -> str:
        """Solve synchronously.

        Returns:
            Result JSON or the path of a file holding it.
        """
        result = self.run_experiment(
            dirac=dirac, domain=domain, levels=levels or [4, 8], problem=problem
        )
        return self._format_output(result, output_format)

    def run_experiment(
        self,
        dirac: str = "0,0,1",
        domain: str = "disk",
        levels: Optional[list[int]] = None,
        problem: Optional[dict[str, Any]] = None,
        **_: Any,
    ) -> ExperimentResult:
        if problem is not None:
            return self._run_problem(problem)
        return self._run_dirac(dirac, domain, levels or [4, 8])

    def _run_dirac(self, dirac: str, domain: str, levels: list[int]) -> ExperimentResult:
        tol = self.tol
        sites, masses = parse_diracs(dirac)
        cone = (
            len(sites) == 1
            and np.allclose(sites[0], (0.0, 0.0))
            and domain in ("disk", "polar")
        )
        slope = math.sqrt(masses[0] / math.pi)
        table = Table(
            name="solve_ma",
            columns=["level", "h", "vertices", "iterations", "max_relative_residual",
                     "cone_error"],
        )
        checks: list[CheckResult] = []
        hs: list[float] = []
        errors: list[float] = []
        solution: Optional[AleksandrovSolution] = None
        for level in sorted(set(levels)):
            mesh = DomainSpec(kind=domain, level=level).build_mesh()  # type: ignore[arg-type]
            prob = DirichletProblem.dirac(mesh, 0.0, sites, masses)
            solution = solve_dirac(prob, tolerances=tol)
            h = prob.mesh.h
            pts = solution.u.mesh.vertices
            exact = slope * (np.linalg.norm(pts, axis=1) - 1.0)
            error = float(np.max(np.abs(solution.u.values - exact))) if cone else math.nan
            suffix = f"_level_{level}"
            checks.append(
                CheckResult.at_most(
                    f"mass_residual{suffix}", solution.max_relative_residual, tol.solve
                )
            )
            if cone:
                checks.append(CheckResult.at_most(f"cone_error{suffix}", error, 5.0 * h))
                hs.append(h)
                errors.append(error)
            checks.extend(_maximum_principle_checks(prob, solution, tol, suffix))
            table.append(
                level, h, prob.mesh.n_vertices, solution.iterations,
                solution.max_relative_residual, error,
            )
        if cone and len(errors) >= 2:
            checks.append(
                CheckResult.holds(
                    "error_decreases",
                    all(b <= a for a, b in zip(errors, errors[1:])),
                    "cone error must not grow under refinement",
                )
            )
            rates = [
                (a / b if b > 0 else math.inf) / (ha / hb)
                for a, b, ha, hb in zip(errors, errors[1:], hs, hs[1:])
            ]
            checks.append(
                CheckResult.at_least(
                    "first_order_rate",
                    min(rates),
                    0.75,
                    "error ratio over h ratio between consecutive levels",
                )
            )
        assert solution is not None
        figures: dict[str, Any] = {}
        if cone:
            figures["cone_error"] = SweepFigure(
                x=hs,
                series={"L-inf error": errors, "5 h": [5.0 * h for h in hs]},
                title="error against the cone",
                xlabel="h",
                ylabel="error",
            )
        return ExperimentResult(
            experiment="solve-ma",
            checks=checks,
            tables=[table],
            artifacts={"solution": solution_to_json(solution)},
            figures=figures,
        )

    def _run_problem(self, data: dict[str, Any]) -> ExperimentResult:
        tol = self.tol
        spec = ProblemSpec.model_validate(data)
        prob = problem_from_json(data)
        checks: list[CheckResult] = []
        if prob.kind == "homogeneous":
            solution = solve_homogeneous(prob, tol)
            checks.append(
                CheckResult.at_most("interior_mass", float(np.sum(solution.residual)), tol.meas)
            )
        else:
            solver = solve_dirac if prob.kind == "dirac" else solve_density
            solution = solver(prob, tolerances=tol)
            checks.append(
                CheckResult.at_most("mass_residual", solution.max_relative_residual, tol.solve)
            )
        checks.extend(_maximum_principle_checks(prob, solution, tol, ""))
        zero_boundary = bool(
            np.all(np.abs(prob.boundary_values[prob.mesh.boundary_indices]) <= tol.bc)
        )
        if spec.density is not None and spec.domain.kind in ("disk", "polar") and zero_boundary:
            d = spec.density
            lam = d.low if d.low is not None else d.value
            big = d.high if d.high is not None else d.value
            radius = spec.domain.radius
            # scaled to the unit disk: u_r(x) = u(r x) / r^2
            scaled = AleksandrovSolution(
                u=PLConvexFunction(solution.u.mesh, solution.u.values / radius**2),
                residual=solution.residual,
                iterations=solution.iterations,
                sites=solution.sites,
                targets=solution.targets,
            )
            sandwich = drop_sandwich(scaled, lam, big)
            checks.append(
                CheckResult.holds(
                    "drop_sandwich",
                    sandwich.passed,
                    f"|min u| = {-sandwich.min_value:.4g} in [{sandwich.lower:.4g}, "
                    f"{sandwich.upper:.4g}]",
                )
            )
        table = Table(
            name="solve_ma",
            columns=["vertices", "iterations", "max_relative_residual", "boundary_mismatch"],
        )
        table.append(
            prob.mesh.n_vertices, solution.iterations, solution.max_relative_residual,
            solution.boundary_mismatch,
        )
        return ExperimentResult(
            experiment=f"solve-ma-{prob.kind}",
            checks=checks,
            tables=[table],
            artifacts={"solution": solution_to_json(solution)},
        )
