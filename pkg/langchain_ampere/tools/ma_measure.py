"""Monge-Ampère measure tool."""

from __future__ import annotations

import math
from typing import Any, Literal, Optional, Type

import numpy as np
from langchain_core.callbacks import CallbackManagerForToolRun
from pydantic import BaseModel, Field

from langchain_ampere.numerics.convex_core import (
    PLConvexFunction,
    conjugate_at,
    convexity_certificate,
    legendre_transform,
    ma_measure,
    subdifferential,
)
from langchain_ampere.numerics.geometry import convex_hull_2d, polygon_area
from langchain_ampere.numerics.io import Table
from langchain_ampere.numerics.mesh import disk_mesh, polar_mesh
from langchain_ampere.numerics.render import PolygonFigure
from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    OutputFormat,
)


class MAMeasureInput(BaseModel):
    """Input schema for the Monge-Ampère measure tool."""

    function: Literal["cone", "quadratic", "max_affine"] = Field(
        default="cone",
        description="Convex function to interpolate: the cone |x|, |x|^2/2, or a seeded "
        "maximum of affine functions.",
    )
    level: int = Field(
        default=8,
        ge=1,
        le=64,
        description="Mesh level (number of rings of the disk mesh).",
    )
    degree: int = Field(
        default=32,
        ge=3,
        description="Number of rays, i.e. the incidence degree of the center vertex (cone only).",
    )
    pieces: int = Field(
        default=12,
        ge=3,
        description="Number of affine pieces (max_affine only).",
    )
    output_format: OutputFormat = Field(
        default="json",
        description="'json' returns the result, 'file_path' writes it to a temporary file.",
    )


class AmpereMAMeasureTool(AmpereBaseTool):
    """Tool for the Monge-Ampère measure of piecewise-linear convex functions.

    The measure of an interior vertex is the area of the convex hull of the
    gradients of its incident triangles.

    Example:
        ```python
        from langchain_ampere import AmpereMAMeasureTool

        tool = AmpereMAMeasureTool()
        result = tool.invoke({"function": "cone", "degree": 32})
        ```
    """

    name: str = "ampere_ma_measure"
    description: str = (
        "Compute the Monge-Ampère measure of a piecewise-linear convex function on a disk "
        "mesh. For the cone |x| the whole mass sits at the apex and approaches pi. "
        "Returns per-vertex masses and pass/fail checks."
    )
    args_schema: Type[BaseModel] = MAMeasureInput

    def _run(
        self,
        function: str = "cone",
        level: int = 8,
        degree: int = 32,
        pieces: int = 12,
        output_format: str = "json",
        run_manager: Optional[CallbackManagerForToolRun] = None,
    ) -> str:
        """Compute the measure synchronously.

        Returns:
            Result JSON or the path of a file holding it.
        """
        result = self.run_experiment(
            function=function, level=level, degree=degree, pieces=pieces
        )
        return self._format_output(result, output_format)

    def run_experiment(
        self,
        function: str = "cone",
        level: int = 8,
        degree: int = 32,
        pieces: int = 12,
        **_: Any,
    ) -> ExperimentResult:
        tol = self.tol
        checks: list[CheckResult] = []
        slopes: Optional[np.ndarray] = None
        if function == "cone":
            mesh = polar_mesh(level, degree)
            f = PLConvexFunction(mesh, np.linalg.norm(mesh.vertices, axis=1))
        elif function == "quadratic":
            mesh = disk_mesh(level)
            f = PLConvexFunction(mesh, 0.5 * np.sum(mesh.vertices**2, axis=1))
        elif function == "max_affine":
            rng = np.random.default_rng(self.rng_seed)
            slopes = rng.standard_normal((pieces, 2))
            offsets = rng.uniform(-0.5, 0.5, pieces)
            f = PLConvexFunction.from_affine_pieces(slopes, offsets, disk_mesh(level).vertices)
        else:
            raise ValueError(f"Unknown function '{function}'.")

        cert = convexity_certificate(f, tol)
        checks.append(
            CheckResult.holds("convexity", cert.passed, f"worst slack {cert.worst_slack:.3e}")
        )
        measure = ma_measure(f, tol)
        assert measure.indices is not None
        image = polygon_area(convex_hull_2d(f.gradients))
        checks.append(
            CheckResult.at_most(
                "mass_within_gradient_image",
                measure.total,
                image * (1.0 + tol.ineq) + tol.meas,
            )
        )

        table = Table(name="masses", columns=["vertex", "x", "y", "mass"])
        for k, m in zip(measure.indices, measure.masses):
            x, y = f.mesh.vertices[k]
            table.append(int(k), float(x), float(y), float(m))

        figures: dict[str, Any] = {}
        artifacts: dict[str, Any] = {"total_mass": measure.total, "h": f.mesh.h}
        if function == "cone":
            apex = int(np.argmin(np.linalg.norm(f.mesh.vertices, axis=1)))
            position = int(np.flatnonzero(measure.indices == apex)[0])
            apex_mass = float(measure.masses[position])
            rest = float(np.sum(np.abs(np.delete(measure.masses, position))))
            checks.append(
                CheckResult.at_most(
                    "apex_mass_near_pi", abs(apex_mass - math.pi) / math.pi, 0.02,
                    f"apex mass {apex_mass:.6f}",
                )
            )
            checks.append(CheckResult.at_most("mass_off_apex", rest, tol.meas * math.pi))
            artifacts["apex_mass"] = apex_mass
            circle = np.linspace(0.0, 2.0 * math.pi, 128, endpoint=False)
            figures["apex_subdifferential"] = PolygonFigure(
                polygons=[
                    np.column_stack([np.cos(circle), np.sin(circle)]),
                    subdifferential(f, apex).slopes,
                ],
                title="subdifferential at the apex",
                labels=["unit disk", "subdifferential"],
            )
        elif function == "max_affine":
            assert slopes is not None
            star = legendre_transform(f, tol)
            if isinstance(star, PLConvexFunction):
                error = float(np.max(np.abs(conjugate_at(star, f.mesh.vertices) - f.values)))
                bound = 2.0 * float(np.max(np.linalg.norm(slopes, axis=1))) * f.mesh.h
                checks.append(CheckResult.at_most("legendre_involution", error, bound))
            else:
                checks.append(
                    CheckResult.holds("legendre_involution", False, "degenerate conjugate")
                )

        return ExperimentResult(
            experiment=f"ma-measure-{function}",
            checks=checks,
            tables=[table],
            artifacts=artifacts,
            figures=figures,
        )
