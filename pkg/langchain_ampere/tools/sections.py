"""Sections tool: volume law, engulfing and the covering lemmas."""

from __future__ import annotations

import math
from typing import Any, Optional, Type

import numpy as np
from langchain_core.callbacks import CallbackManagerForToolRun
from pydantic import BaseModel, Field

from langchain_ampere.numerics.grid import GridFunction
from langchain_ampere.numerics.io import Table
from langchain_ampere.numerics.ma_dirichlet import DirichletProblem, solve_density
from langchain_ampere.numerics.mesh import disk_mesh
from langchain_ampere.numerics.render import PolygonFigure
from langchain_ampere.numerics.sections import (
    c1alpha_inclusion_probe,
    eccentric_quadratic,
    ellipse_section_volume,
    engulfing_constant,
    inclusion_exclusion_probe,
    section_size_exponent,
    section_volume_sweep,
    theta_probe,
    trace_section,
    vitali_select,
)
from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    OutputFormat,
)


class SectionsInput(BaseModel):
    """Input schema for the sections tool."""

    eps: float = Field(
        default=0.1,
        gt=0,
        description="Eccentricity of the quadratic x1^2/(2 eps) + eps x2^2/2 for the volume law.",
    )
    pairs: int = Field(
        default=100,
        ge=1,
        le=10_000,
        description="Number of sampled sections for the engulfing constant.",
    )
    grid_n: int = Field(
        default=64,
        ge=16,
        le=512,
        description="Grid cells per side of the square [-2, 2]^2 holding |x|^2/2.",
    )
    density_level: int = Field(
        default=8,
        ge=2,
        le=64,
        description="Disk mesh level for the density solve whose sections are measured.",
    )
    output_format: OutputFormat = Field(
        default="json",
        description="'json' returns the result, 'file_path' writes it to a temporary file.",
    )


def _seeded_family(
    rng: np.random.Generator, count: int, radius: float, heights: tuple[float, float]
) -> list[tuple[np.ndarray, float]]:
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, count))
    a = rng.uniform(0.0, 2.0 * math.pi, count)
    h = rng.uniform(heights[0], heights[1], count)
    return [
        (np.array([r[k] * math.cos(a[k]), r[k] * math.sin(a[k])]), float(h[k]))
        for k in range(count)
    ]


class AmpereSectionsTool(AmpereBaseTool):
    """Tool for sections ``S_u(x, h) = {u < u(x) + Du(x).(y - x) + h}``.

    Example:
        ```python
        from langchain_ampere import AmpereSectionsTool

        tool = AmpereSectionsTool(seed=42)
        result = tool.invoke({"pairs": 100})
        ```
    """

    name: str = "ampere_sections"
    description: str = (
        "Measure sections of convex functions: the volume law |S(x, h)| = 2 pi h for "
        "quadratics with det D^2 u = 1, volume ratios for a Monge-Ampère solution with "
        "density in [1, 2], the engulfing constant and the covering and inclusion probes."
    )
    args_schema: Type[BaseModel] = SectionsInput

    def _run(
        self,
        eps: float = 0.1,
        pairs: int = 100,
        grid_n: int = 64,
        density_level: int = 8,
        output_format: str = "json",
        run_manager: Optional[CallbackManagerForToolRun] = None,
    ) -> str:
        """Run the section probes synchronously.

        Returns:
            Result JSON or the path of a file holding it.
        """
        result = self.run_experiment(
            eps=eps, pairs=pairs, grid_n=grid_n, density_level=density_level
        )
        return self._format_output(result, output_format)

    def run_experiment(
        self,
        eps: float = 0.1,
        pairs: int = 100,
        grid_n: int = 64,
        density_level: int = 8,
        **_: Any,
    ) -> ExperimentResult:
        checks: list[CheckResult] = []
        tables: list[Table] = []
        rng = np.random.default_rng(self.rng_seed)

        # volume law on the analytic quadratic
        u_eps = eccentric_quadratic(eps)
        heights = np.logspace(-2.0, 0.0, 9)
        volume = Table(name="volume_law", columns=["h", "volume", "ratio", "relative_error"])
        worst = 0.0
        polygons = []
        for h in heights:
            sec = trace_section(u_eps, (0.0, 0.0), float(h))
            expected = ellipse_section_volume(eps, float(h))
            rel = abs(sec.volume / expected - 1.0)
            worst = max(worst, rel)
            volume.append(float(h), sec.volume, sec.volume / h, rel)
            polygons.append(sec.polygon)
        checks.append(CheckResult.at_most("volume_law", worst, 0.01, "|S|/h against 2 pi"))
        tables.append(volume)

        # Monge-Ampère solution with density in [1, 2]
        mesh = disk_mesh(density_level)
        density = rng.uniform(1.0, 2.0, len(mesh.triangles))
        solution = solve_density(
            DirichletProblem.density(mesh, 0.0, density), tolerances=self.tol
        )
        sweep = section_volume_sweep(solution.u, (0.0, 0.0), np.logspace(-1.5, -0.5, 5), 4.0)
        density_table = Table(
            name="density_volume", columns=["h", "volume", "ratio", "clipped"]
        )
        for row in sweep.rows:
            density_table.append(row.h, row.volume, row.ratio, row.clipped)
        tables.append(density_table)
        checks.append(
            CheckResult.skipped(
                "density_volume_spread",
                f"reported only; spread {'within' if sweep.passed else 'above'} 4",
                value=sweep.spread,
            )
        )

        # engulfing and the probes on |x|^2/2
        quad = GridFunction.square(grid_n, 2.0).sample(lambda x, y: 0.5 * (x * x + y * y))
        family = _seeded_family(rng, pairs, 0.5, (0.05, 0.25))
        engulf = engulfing_constant(quad, family, seed=self.rng_seed)
        checks.append(
            CheckResult.at_most(
                "engulfing_constant", engulf.theta, 4.1,
                f"{engulf.pairs} pairs, {engulf.skipped} skipped",
            )
        )
        theta = theta_probe(quad, 1.0)
        checks.append(
            CheckResult.at_most("theta_probe", abs(theta.theta - 1.0 / math.sqrt(2.0)), 0.02)
        )
        size = section_size_exponent(quad, (0.0, 0.0), list(np.logspace(-1.0, 0.0, 5)))
        checks.append(CheckResult.at_most("size_exponent", abs(size.mu - 0.5), 0.05))
        covering = vitali_select(quad, _seeded_family(rng, 20, 0.5, (0.05, 0.2)))
        checks.append(
            CheckResult.at_most(
                "vitali_covering", covering.required_dilation, covering.dilation,
                f"{len(covering.chosen)} disjoint sections",
            )
        )
        inclusion = inclusion_exclusion_probe(
            quad, (0.0, 0.0), 0.5, 0.25, 0.5, samples=50, seed=self.rng_seed
        )
        checks.append(
            CheckResult.at_least("inclusion_constant", inclusion.inclusion_c, 0.0)
        )
        c1alpha = c1alpha_inclusion_probe(quad)
        checks.append(CheckResult.holds("strict_half_section", not c1alpha.flagged))

        probes = Table(name="probes", columns=["probe", "value"])
        probes.append("engulfing_theta", engulf.theta)
        probes.append("theta", theta.theta)
        probes.append("size_exponent", size.mu)
        probes.append("required_dilation", covering.required_dilation)
        probes.append("inclusion_c", inclusion.inclusion_c)
        probes.append("exclusion_c", inclusion.exclusion_c)
        probes.append("c1alpha_delta", c1alpha.delta)
        tables.append(probes)

        return ExperimentResult(
            experiment="sections",
            checks=checks,
            tables=tables,
            artifacts={"engulfing": engulf.model_dump(), "covering": covering.model_dump()},
            figures={
                "nested_sections": PolygonFigure(
                    polygons=polygons,
                    title=f"sections of the eccentric quadratic, eps = {eps:g}",
                    labels=[f"h = {h:.3g}" for h in heights],
                )
            },
        )
