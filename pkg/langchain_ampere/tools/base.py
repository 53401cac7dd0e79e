"""Base class for Ampere LangChain tools."""

from __future__ import annotations

import asyncio
import os
import tempfile
from abc import ABC
from typing import Any, Literal, Optional

from langchain_core.callbacks import AsyncCallbackManagerForToolRun
from langchain_core.tools import BaseTool
from pydantic import BaseModel, ConfigDict, Field, model_validator

from langchain_ampere.config import SEED_ENV_VAR, Tolerances
from langchain_ampere.numerics.io import Table, dumps

OutputFormat = Literal["json", "file_path"]


class CheckResult(BaseModel):
    """Verdict of one declared check."""

    name: str
    status: Literal["pass", "fail", "skip"]
    value: Optional[float] = None
    limit: Optional[float] = None
    detail: str = ""

    @classmethod
    def at_most(cls, name: str, value: float, limit: float, detail: str = "") -> "CheckResult":
        return cls(
            name=name,
            status="pass" if value <= limit else "fail",
            value=value,
            limit=limit,
            detail=detail,
        )

    @classmethod
    def at_least(cls, name: str, value: float, limit: float, detail: str = "") -> "CheckResult":
        return cls(
            name=name,
            status="pass" if value >= limit else "fail",
            value=value,
            limit=limit,
            detail=detail,
        )

    @classmethod
    def holds(cls, name: str, ok: bool, detail: str = "") -> "CheckResult":
        return cls(name=name, status="pass" if ok else "fail", detail=detail)

    @classmethod
    def skipped(cls, name: str, detail: str, value: Optional[float] = None) -> "CheckResult":
        return cls(name=name, status="skip", value=value, detail=detail)


class ExperimentResult(BaseModel):
    """Checks, tables, JSON artifacts and figures of one experiment."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    experiment: str
    checks: list[CheckResult] = Field(default_factory=list)
    tables: list[Table] = Field(default_factory=list)
    artifacts: dict[str, Any] = Field(default_factory=dict)
    figures: dict[str, Any] = Field(default_factory=dict, exclude=True)

    @model_validator(mode="after")
    def check_unique_names(self) -> "ExperimentResult":
        names = [c.name for c in self.checks]
        if len(names) != len(set(names)):
            raise ValueError(f"Duplicate check names in experiment '{self.experiment}'.")
        return self

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def failed(self) -> list[str]:
        return [c.name for c in self.checks if c.status == "fail"]

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_payload(self) -> dict[str, Any]:
        return {
            "experiment": self.experiment,
            "passed": self.passed,
            "checks": [c.model_dump() for c in self.checks],
            "tables": [t.model_dump() for t in self.tables],
            "artifacts": self.artifacts,
        }


class RunReport(BaseModel):
    """What a CLI run checked, how long it took and what it wrote."""

    subcommand: str
    seed: int
    passed: bool
    checks: list[CheckResult]
    timings: dict[str, float] = Field(default_factory=dict)
    files: list[str] = Field(default_factory=list)


class AmpereBaseTool(BaseTool, ABC):
    """Base class for Ampere tools.

    Holds the tolerance record and the seed shared by every experiment.
    """

    tolerances: Optional[Tolerances] = Field(
        default=None,
        description="Numerical tolerances. Falls back to the AMPERE_TOL environment variable.",
    )
    seed: Optional[int] = Field(
        default=None,
        description="Seed for randomized sweeps. Falls back to AMPERE_SEED, then 0.",
    )

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def resolve_environment(self) -> "AmpereBaseTool":
        """Fill tolerances and seed from the environment when not given."""
        if self.tolerances is None:
            self.tolerances = Tolerances.from_env()
        if self.seed is None:
            raw = os.environ.get(SEED_ENV_VAR, "0")
            try:
                self.seed = int(raw)
            except ValueError as exc:
                raise ValueError(f"{SEED_ENV_VAR} must be an integer, got '{raw}'.") from exc
        if self.seed < 0:
            raise ValueError("Seed must be nonnegative.")
        return self

    @property
    def tol(self) -> Tolerances:
        assert self.tolerances is not None
        return self.tolerances

    @property
    def rng_seed(self) -> int:
        assert self.seed is not None
        return self.seed

    async def _arun(
        self,
        *args: Any,
        run_manager: Optional[AsyncCallbackManagerForToolRun] = None,
        **kwargs: Any,
    ) -> str:
        """Run the experiment in a worker thread."""
        return await asyncio.to_thread(self._run, *args, **kwargs)

    def _format_output(self, result: ExperimentResult, output_format: str) -> str:
        """Result JSON, or the path of a temporary file holding it."""
        text = dumps(result.to_payload())
        if output_format == "json":
            return text
        with tempfile.NamedTemporaryFile(
            mode="w", suffix=".json", prefix=f"{result.experiment}-", delete=False,
            encoding="utf-8",
        ) as f:
            f.write(text)
            return f.name
