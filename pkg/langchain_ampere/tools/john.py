"""John ellipsoid tool."""

from __future__ import annotations

from typing import Any, Optional, Type

import numpy as np
from langchain_core.callbacks import CallbackManagerForToolRun
from pydantic import BaseModel, Field, model_validator

from langchain_ampere.numerics.io import Table
from langchain_ampere.numerics.mesh import ConvexDomain
from langchain_ampere.numerics.render import PolygonFigure
from langchain_ampere.numerics.sections import john_containment, john_ellipsoid, normalize
from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    OutputFormat,
)


class JohnInput(BaseModel):
    """Input schema for the John ellipsoid tool."""

    polygons: int = Field(
        default=50,
        ge=0,
        le=10_000,
        description="Number of seeded random convex polygons.",
    )
    min_points: int = Field(
        default=5,
        ge=3,
        description="Fewest random points whose hull forms a polygon.",
    )
    max_points: int = Field(
        default=16,
        ge=3,
        description="Most random points whose hull forms a polygon.",
    )
    output_format: OutputFormat = Field(
        default="json",
        description="'json' returns the result, 'file_path' writes it to a temporary file.",
    )

    @model_validator(mode="after")
    def check_range(self) -> "JohnInput":
        if self.min_points > self.max_points:
            raise ValueError("min_points must not exceed max_points.")
        return self


def random_polygons(
    rng: np.random.Generator, count: int, min_points: int, max_points: int
) -> list[ConvexDomain]:
    """Hulls of Gaussian point clouds; clouds with fewer than three hull vertices are redrawn."""
    out: list[ConvexDomain] = []
    while len(out) < count:
        k = int(rng.integers(min_points, max_points + 1))
        pts = rng.standard_normal((k, 2)) * rng.uniform(0.5, 2.0, 2)
        try:
            out.append(ConvexDomain.from_points(pts))
        except ValueError:
            continue
    return out


class AmpereJohnTool(AmpereBaseTool):
    """Tool for the maximum-volume inscribed ellipse of convex polygons.

    Checks ``E inside K inside c + 2 (E - c)`` and the incircle of the unit square.

    Example:
        ```python
        from langchain_ampere import AmpereJohnTool

        tool = AmpereJohnTool(seed=7)
        result = tool.invoke({"polygons": 50})
        ```
    """

    name: str = "ampere_john"
    description: str = (
        "Compute John ellipses (maximum-volume inscribed ellipses) of the unit square and "
        "of seeded random convex polygons, and check both containments of John's lemma."
    )
    args_schema: Type[BaseModel] = JohnInput

    def _run(
        self,
        polygons: int = 50,
        min_points: int = 5,
        max_points: int = 16,
        output_format: str = "json",
        run_manager: Optional[CallbackManagerForToolRun] = None,
    ) -> str:
        """Compute ellipses synchronously.

        Returns:
            Result JSON or the path of a file holding it.
        """
        result = self.run_experiment(
            polygons=polygons, min_points=min_points, max_points=max_points
        )
        return self._format_output(result, output_format)

    def run_experiment(
        self, polygons: int = 50, min_points: int = 5, max_points: int = 16, **_: Any
    ) -> ExperimentResult:
        checks: list[CheckResult] = []
        square = ConvexDomain.square(0.5, center=(0.5, 0.5))
        incircle = john_ellipsoid(square)
        center_error = float(np.max(np.abs(incircle.center - 0.5)))
        shape_error = float(np.max(np.abs(incircle.axes - 0.5 * np.eye(2))))
        checks.append(CheckResult.at_most("square_center", center_error, 1e-4))
        checks.append(CheckResult.at_most("square_shape", shape_error, 1e-4))

        rng = np.random.default_rng(self.rng_seed)
        domains = random_polygons(rng, polygons, min_points, max_points)
        table = Table(
            name="john",
            columns=["polygon", "vertices", "area", "ellipse_area", "area_ratio",
                     "inner_violation", "outer_violation", "normalized"],
        )
        inner = outer = -np.inf
        normalized = True
        figure_polygons: list[np.ndarray] = [square.vertices, incircle.boundary_points()]
        for k, domain in enumerate(domains):
            ellipse = john_ellipsoid(domain)
            report = john_containment(domain, ellipse)
            norm, _ = normalize(domain)
            inner = max(inner, report.inner_violation)
            outer = max(outer, report.outer_violation)
            normalized = normalized and norm.passed
            table.append(
                k, len(domain.vertices), domain.area, ellipse.volume,
                ellipse.volume / domain.area, report.inner_violation,
                report.outer_violation, norm.passed,
            )
            if k == 0:
                figure_polygons = [
                    domain.vertices,
                    ellipse.boundary_points(),
                    ellipse.dilate(2.0).boundary_points(),
                ]
        if domains:
            checks.append(CheckResult.at_most("inner_containment", float(inner), 1e-6))
            checks.append(CheckResult.at_most("outer_containment", float(outer), 1e-6))
            checks.append(CheckResult.holds("normalization", normalized, "B_1 in T(K) in B_2"))
        labels = ["K", "E", "2E"] if domains else ["square", "incircle"]
        return ExperimentResult(
            experiment="john",
            checks=checks,
            tables=[table],
            artifacts={"square_ellipse": incircle.to_dict()},
            figures={
                "john": PolygonFigure(
                    polygons=figure_polygons, title="John ellipse", labels=labels
                )
            },
        )
