"""Harnack probe tool on eccentric quadratics."""

from __future__ import annotations

from typing import Any, Optional, Type

from langchain_core.callbacks import CallbackManagerForToolRun
from pydantic import BaseModel, Field, field_validator

from langchain_ampere.numerics.io import Table
from langchain_ampere.numerics.linma_fd import eccentric_solution, harnack_probe
from langchain_ampere.numerics.render import SweepFigure
from langchain_ampere.numerics.sections import eccentric_quadratic
from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    OutputFormat,
)


class HarnackInput(BaseModel):
    """Input schema for the Harnack tool."""

    epsilon: list[float] = Field(
        default_factory=lambda: [1.0, 0.1, 0.01],
        min_length=1,
        description="Eccentricities of u = x1^2/(2 eps) + eps x2^2/2.",
    )
    t: list[float] = Field(
        default_factory=lambda: [0.25, 0.5],
        min_length=1,
        description="Section heights; the solve runs in S(0, 2t), sup/inf over S(0, t).",
    )
    ball_radius: float = Field(
        default=0.25,
        gt=0,
        description="Radius of the Euclidean ball used for comparison.",
    )
    resolution: int = Field(
        default=88,
        ge=16,
        le=512,
        description="Grid cells per side of the normalized probe box.",
    )
    output_format: OutputFormat = Field(
        default="json",
        description="'json' returns the result, 'file_path' writes it to a temporary file.",
    )

    @field_validator("epsilon")
    @classmethod
    def check_epsilon(cls, value: list[float]) -> list[float]:
        if any(e <= 0 for e in value):
            raise ValueError("Eccentricities must be positive.")
        return value

    @field_validator("t")
    @classmethod
    def check_t(cls, value: list[float]) -> list[float]:
        if any(not 0.0 < t < 1.0 for t in value):
            raise ValueError("Heights must lie in (0, 1) so that the solution stays positive.")
        return value


class AmpereHarnackTool(AmpereBaseTool):
    """Tool comparing Harnack ratios over sections and over Euclidean balls.

    ``v = x1^2/(2 eps) - eps x2^2/2 + 1`` solves the linearized equation of the
    eccentric quadratic. Over sections its sup/inf ratio is ``(1 + t)/(1 - t)``
    for every ``eps``; over the ball ``B_r(0)`` it grows like ``1/eps``.

    Example:
        ```python
        from langchain_ampere import AmpereHarnackTool

        tool = AmpereHarnackTool()
        result = tool.invoke({"epsilon": [0.01], "t": [0.25, 0.5]})
        ```
    """

    name: str = "ampere_harnack"
    description: str = (
        "Solve the linearized Monge-Ampère equation of eccentric quadratics in sections "
        "and in balls and report sup/inf ratios. Section ratios do not depend on the "
        "eccentricity, ball ratios blow up as it tends to zero."
    )
    args_schema: Type[BaseModel] = HarnackInput

    def _run(
        self,
        epsilon: Optional[list[float]] = None,
        t: Optional[list[float]] = None,
        ball_radius: float = 0.25,
        resolution: int = 88,
        output_format: str = "json",
        run_manager: Optional[CallbackManagerForToolRun] = None,
    ) -> str:
        """Run the probes synchronously.

        Returns:
            Result JSON or the path of a file holding it.
        """
        result = self.run_experiment(
            epsilon=epsilon, t=t, ball_radius=ball_radius, resolution=resolution
        )
        return self._format_output(result, output_format)

    def run_experiment(
        self,
        epsilon: Optional[list[float]] = None,
        t: Optional[list[float]] = None,
        ball_radius: float = 0.25,
        resolution: int = 88,
        **_: Any,
    ) -> ExperimentResult:
        epsilons = sorted(set(epsilon or [1.0, 0.1, 0.01]), reverse=True)
        heights = sorted(set(t or [0.25, 0.5]))
        table = Table(
            name="harnack",
            columns=["epsilon", "t", "sup", "inf", "ratio", "expected", "ratio_error",
                     "ball_sup", "ball_inf", "ball_ratio", "ball_bound", "nodes", "monotone"],
        )
        checks: list[CheckResult] = []
        ball_ratios: list[float] = []
        section_ratios: dict[str, list[float]] = {f"S(0, {h:g})": [] for h in heights}
        for eps in epsilons:
            u = eccentric_quadratic(eps)
            v = eccentric_solution(eps)
            for k, h in enumerate(heights):
                report = harnack_probe(
                    u, v, (0.0, 0.0), h,
                    ball_radius=ball_radius if k == 0 else None,
                    resolution=resolution,
                    tolerances=self.tol,
                )
                if k == 0:
                    ball = report
                    assert ball.ball_ratio is not None
                    ball_ratios.append(ball.ball_ratio)
                    checks.append(
                        CheckResult.at_least(
                            f"ball_ratio_eps_{eps:g}", ball.ball_ratio, 1.0 / (32.0 * eps)
                        )
                    )
                expected = (1.0 + h) / (1.0 - h)
                error = abs(report.ratio - expected)
                checks.append(CheckResult.at_most(f"ratio_eps_{eps:g}_t_{h:g}", error, 1e-6))
                section_ratios[f"S(0, {h:g})"].append(report.ratio)
                table.append(
                    eps, h, report.sup, report.inf, report.ratio, expected, error,
                    ball.ball_sup, ball.ball_inf, ball.ball_ratio, 1.0 / (32.0 * eps),
                    report.nodes, report.monotone,
                )
        series = {"ball": ball_ratios, "1/(32 eps)": [1.0 / (32.0 * e) for e in epsilons]}
        series.update(section_ratios)
        return ExperimentResult(
            experiment="harnack",
            checks=checks,
            tables=[table],
            figures={
                "harnack_ratios": SweepFigure(
                    x=epsilons,
                    series=series,
                    title="sup / inf over sections and balls",
                    xlabel="eps",
                    ylabel="ratio",
                )
            },
        )
