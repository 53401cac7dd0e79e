"""Linearized Monge-Ampère tool."""

from __future__ import annotations

from typing import Any, Optional, Type

import numpy as np
from langchain_core.callbacks import CallbackManagerForToolRun
from pydantic import BaseModel, Field

from langchain_ampere.numerics.grid import GridFunction
from langchain_ampere.numerics.io import Table
from langchain_ampere.numerics.linma_fd import (
    abp_check,
    affine_area,
    cofactor_field,
    divergence_free_residual,
    hoelder_probe,
    solve_linma,
)
from langchain_ampere.numerics.render import ContourFigure
from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    OutputFormat,
)


class SolveLinMAInput(BaseModel):
    """Input schema for the linearized Monge-Ampère tool."""

    eps: float = Field(
        default=0.1,
        gt=0,
        description="Eccentricity of u = x1^2/(2 eps) + eps x2^2/2 (det D^2 u = 1).",
    )
    n: int = Field(
        default=32,
        ge=4,
        le=512,
        description="Grid cells per side on the square [-w, w]^2.",
    )
    half_width: float = Field(
        default=1.0,
        gt=0,
        description="Half width w of the square domain.",
    )
    output_format: OutputFormat = Field(
        default="json",
        description="'json' returns the result, 'file_path' writes it to a temporary file.",
    )


class AmpereSolveLinMATool(AmpereBaseTool):
    """Tool for the linearized Monge-Ampère equation ``U^ij v_ij = g``.

    The coefficient is the cofactor matrix of an eccentric quadratic. The
    function ``x1^2/(2 eps) - eps x2^2/2 + 1`` is an exact solution and is
    recovered from its boundary trace.

    Example:
        ```python
        from langchain_ampere import AmpereSolveLinMATool

        tool = AmpereSolveLinMATool()
        result = tool.invoke({"eps": 0.1, "n": 32})
        ```
    """

    name: str = "ampere_solve_linma"
    description: str = (
        "Solve the linearized Monge-Ampère equation on a square grid with the cofactor "
        "coefficients of an eccentric quadratic. Checks exact recovery of a known solution, "
        "the M-matrix property, the ABP maximum principle and divergence-free cofactor rows."
    )
    args_schema: Type[BaseModel] = SolveLinMAInput

    def _run(
        self,
        eps: float = 0.1,
        n: int = 32,
        half_width: float = 1.0,
        output_format: str = "json",
        run_manager: Optional[CallbackManagerForToolRun] = None,
    ) -> str:
        """Solve synchronously.

        Returns:
            Result JSON or the path of a file holding it.
        """
        result = self.run_experiment(eps=eps, n=n, half_width=half_width)
        return self._format_output(result, output_format)

    def run_experiment(
        self, eps: float = 0.1, n: int = 32, half_width: float = 1.0, **_: Any
    ) -> ExperimentResult:
        tol = self.tol
        grid = GridFunction.square(n, half_width)
        u = grid.sample(lambda x, y: x * x / (2.0 * eps) + eps * y * y / 2.0)
        exact = grid.sample(lambda x, y: x * x / (2.0 * eps) - eps * y * y / 2.0 + 1.0)
        checks: list[CheckResult] = []

        solution = solve_linma(u, 0.0, exact, tol)
        error = float(np.max(np.abs(solution.v.values - exact.values)[grid.in_domain]))
        checks.append(CheckResult.at_most("exact_recovery", error, 1e-8))
        checks.append(
            CheckResult.holds("monotone_stencil", solution.monotone, "M-matrix sign pattern")
        )

        divergence, _ = divergence_free_residual(u)
        checks.append(CheckResult.at_most("cofactor_divergence", divergence.max_norm, 1e-6))

        cof = cofactor_field(u, tol)
        source = solve_linma(u, -1.0, 0.0, tol)
        abp = abp_check(cof, source.v, -1.0, tol)
        checks.append(
            CheckResult(
                name="abp_bound",
                status="pass" if abp.passed else "fail",
                value=abp.sup_interior,
                limit=abp.bound,
                detail=f"{abp.contact_nodes} contact nodes",
            )
        )

        hoelder = hoelder_probe(solution.v)
        checks.append(
            CheckResult.skipped(
                "hoelder_exponent", "reported only", value=hoelder.interior_exponent
            )
        )

        table = Table(
            name="solve_linma",
            columns=["eps", "n", "h", "iterations", "residual_norm", "error", "monotone",
                     "abp_sup", "abp_bound", "abp_refined_bound"],
        )
        table.append(
            eps, n, grid.h, solution.iterations, solution.residual_norm, error,
            solution.monotone, abp.sup_interior, abp.bound, abp.refined_bound,
        )
        bins = Table(
            name="hoelder_bins",
            columns=["distance", "interior_oscillation", "boundary_oscillation"],
        )
        for b in hoelder.bins:
            bins.append(b.distance, b.interior_oscillation, b.boundary_oscillation)
        return ExperimentResult(
            experiment="solve-linma",
            checks=checks,
            tables=[table, bins],
            artifacts={
                "solution": solution.v.to_dict(),
                "abp": abp.model_dump(),
                "affine_area": affine_area(u),
            },
            figures={"solution": ContourFigure(solution.v, title="v")},
        )
