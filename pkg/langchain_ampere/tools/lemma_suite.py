"""Matrix inequalities, structural conditions and exponent algebra in one suite."""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Optional, Type

import numpy as np
from langchain_core.callbacks import CallbackManagerForToolRun
from pydantic import BaseModel, Field

from langchain_ampere.numerics.abreu import (
    GFunction,
    check_A1_A2_A3,
    singular_profile_exponents,
    singular_profile_polynomial,
)
from langchain_ampere.numerics.convex_core import matrix_lemma_checks, random_psd
from langchain_ampere.numerics.grid import GridFunction
from langchain_ampere.numerics.io import Table
from langchain_ampere.numerics.linma_fd import divergence_free_residual
from langchain_ampere.numerics.render import SweepFigure
from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    OutputFormat,
)

G_FAMILY = {
    "power": GFunction(kind="power", theta=0.25),
    "log": GFunction(kind="log"),
    "loglog": GFunction(kind="loglog"),
}


class LemmaSuiteInput(BaseModel):
    """Input schema for the lemma suite."""

    pairs: int = Field(
        default=1000,
        ge=1,
        le=1_000_000,
        description="Number of seeded random PSD matrix pairs.",
    )
    dimensions: list[int] = Field(
        default_factory=lambda: [2, 3, 10],
        min_length=1,
        description="Dimensions n at which the singular profile exponents are tabulated.",
    )
    grids: list[int] = Field(
        default_factory=lambda: [16, 32, 64],
        min_length=3,
        description="Grid sizes of the Richardson study, each twice the previous.",
    )
    output_format: OutputFormat = Field(
        default="json",
        description="'json' returns the result, 'file_path' writes it to a temporary file.",
    )


class AmpereLemmaSuiteTool(AmpereBaseTool):
    """Tool running the algebraic and sampled checks that need no PDE solve.

    * the singular profile polynomial vanishes exactly at ``n = 10``, ``alpha = 9/2``;
    * ``det^theta`` concavity, the trace inequality and the ``uv`` trace bound on
      random PSD pairs;
    * conditions A1-A3 and the dual formula of the ``G`` family;
    * second order decay of the cofactor divergence of ``exp(|x|^2/2)``.

    Example:
        ```python
        from langchain_ampere import AmpereLemmaSuiteTool

        tool = AmpereLemmaSuiteTool(seed=42)
        result = tool.invoke({"pairs": 1000})
        ```
    """

    name: str = "ampere_lemma_suite"
    description: str = (
        "Run the matrix-lemma, G-condition, exponent-algebra and divergence-free checks of "
        "the Monge-Ampère toolkit. Everything is seeded and deterministic."
    )
    args_schema: Type[BaseModel] = LemmaSuiteInput

    def _run(
        self,
        pairs: int = 1000,
        dimensions: Optional[list[int]] = None,
        grids: Optional[list[int]] = None,
        output_format: str = "json",
        run_manager: Optional[CallbackManagerForToolRun] = None,
    ) -> str:
        """Run the suite synchronously.

        Returns:
            Result JSON or the path of a file holding it.
        """
        result = self.run_experiment(pairs=pairs, dimensions=dimensions, grids=grids)
        return self._format_output(result, output_format)

    def run_experiment(
        self,
        pairs: int = 1000,
        dimensions: Optional[list[int]] = None,
        grids: Optional[list[int]] = None,
        **_: Any,
    ) -> ExperimentResult:
        checks: list[CheckResult] = []
        tables: list[Table] = []

        root = singular_profile_polynomial(Fraction(9, 2), 10)
        checks.append(CheckResult.holds("profile_root_n10", root == 0, f"value {root}"))
        exponents = Table(name="profile_exponents", columns=["n", "alpha"])
        for n in sorted(set(dimensions or [2, 3, 10])):
            roots = singular_profile_exponents(n)
            if not roots:
                exponents.append(n, None)
            for alpha in roots:
                exponents.append(n, alpha)
        tables.append(exponents)

        checks.append(self._matrix_lemmas(pairs))

        conditions = Table(name="g_conditions", columns=["g", "condition", "status", "detail"])
        for label, g in G_FAMILY.items():
            report = check_A1_A2_A3(g)
            for v in (report.a1, report.a2, report.a3):
                conditions.append(label, v.name, v.status, v.detail)
            if label != "loglog":
                checks.append(
                    CheckResult.holds(
                        f"conditions_{label}", report.passed, ", ".join(report.failing)
                    )
                )
        tables.append(conditions)
        checks.extend(self._g_identities())

        richardson, figure = self._richardson(grids or [16, 32, 64])
        tables.append(richardson)
        ratios = [r for r in richardson.column("ratio") if isinstance(r, float)]
        checks.append(
            CheckResult(
                name="divergence_order",
                status="pass" if ratios and all(3.5 <= r <= 4.5 for r in ratios) else "fail",
                value=min(ratios, default=float("nan")),
                detail="Richardson ratios in [3.5, 4.5]",
            )
        )
        return ExperimentResult(
            experiment="lemma-suite",
            checks=checks,
            tables=tables,
            figures={"divergence_decay": figure},
        )

    def _matrix_lemmas(self, pairs: int) -> CheckResult:
        tol = self.tol.with_overrides([f"ineq={min(self.tol.ineq, 1e-12)}"])
        rng = np.random.default_rng(self.rng_seed)
        failures: dict[str, int] = {"concavity": 0, "trace": 0, "uv_trace": 0}
        for _ in range(pairs):
            a = random_psd(rng, 2)
            b = random_psd(rng, 2)
            lam = float(rng.uniform())
            vector = rng.standard_normal(2)
            verdicts = matrix_lemma_checks(a, b, lam, 0.5, vector=vector, tolerances=tol)
            for v in (verdicts.concavity, verdicts.trace, verdicts.uv_trace):
                failures[v.name] += not v.passed
        failed = sum(failures.values())
        return CheckResult.at_most(
            "matrix_lemmas",
            float(failed),
            0.0,
            f"{pairs} pairs; failures " + ", ".join(f"{k}={v}" for k, v in failures.items()),
        )

    def _g_identities(self) -> list[CheckResult]:
        d = np.array([0.5, 1.0, 2.0])
        log_g = G_FAMILY["log"]
        dual_gap = float(np.max(np.abs(log_g.dual(d) - (np.log(d) - 1.0))))
        checks = [CheckResult.at_most("log_dual_exact", dual_gap, 0.0)]
        samples = np.logspace(-3.0, 3.0, 13)
        for label, g in G_FAMILY.items():
            back = g.inverse_first(g.first(samples))
            rel = float(np.max(np.abs(back / samples - 1.0)))
            checks.append(CheckResult.at_most(f"inverse_first_{label}", rel, 1e-12))
            shape_ok = bool(np.all(g.first(samples) > 0) and np.all(g.second(samples) < 0))
            checks.append(
                CheckResult.holds(f"increasing_concave_{label}", shape_ok, "G' > 0, G'' < 0")
            )
        return checks

    def _richardson(self, grids: list[int]) -> tuple[Table, SweepFigure]:
        table = Table(name="divergence_richardson", columns=["n", "h", "max_norm", "ratio"])
        hs: list[float] = []
        norms: list[float] = []
        previous: Optional[float] = None
        for n in sorted(set(grids)):
            grid = GridFunction.square(n, 1.0)
            u = grid.sample(lambda x, y: np.exp(0.5 * (x * x + y * y)))
            report, _ = divergence_free_residual(u, window=(-0.5, 0.5, -0.5, 0.5))
            ratio = previous / report.max_norm if previous is not None else None
            table.append(n, grid.h, report.max_norm, ratio)
            hs.append(grid.h)
            norms.append(report.max_norm)
            previous = report.max_norm
        figure = SweepFigure(
            x=hs,
            series={"max divergence": norms},
            title="cofactor divergence of exp(|x|^2/2)",
            xlabel="h",
            ylabel="max |div U|",
        )
        return table, figure
