"""Ampere toolkit that bundles all Ampere tools."""

from __future__ import annotations

from typing import Any, Dict, List, Optional, Type

from langchain_core.tools import BaseTool
from pydantic import BaseModel, ConfigDict, Field

from langchain_ampere.config import Tolerances
from langchain_ampere.tools import (
    AmpereBaseTool,
    AmpereHarnackTool,
    AmpereJohnTool,
    AmpereLemmaSuiteTool,
    AmpereMAMeasureTool,
    AmpereSectionsTool,
    AmpereSolveAbreuTool,
    AmpereSolveLinMATool,
    AmpereSolveMATool,
)

SUBCOMMANDS: Dict[str, Type[AmpereBaseTool]] = {
    "ma-measure": AmpereMAMeasureTool,
    "solve-ma": AmpereSolveMATool,
    "solve-linma": AmpereSolveLinMATool,
    "solve-abreu": AmpereSolveAbreuTool,
    "sections": AmpereSectionsTool,
    "john": AmpereJohnTool,
    "harnack": AmpereHarnackTool,
    "lemma-suite": AmpereLemmaSuiteTool,
}


class AmpereToolkit(BaseModel):
    """Toolkit that bundles all Ampere tools.

    Provides access to the Monge-Ampère experiments:
    - Monge-Ampère measure of piecewise-linear convex functions
    - Dirichlet problem (Aleksandrov solutions)
    - Linearized Monge-Ampère equation
    - Second boundary value problem by continuation
    - Sections, engulfing and covering
    - John ellipses
    - Harnack ratios
    - Matrix lemmas and exponent algebra

    Example:
        ```python
        from langchain_ampere import AmpereToolkit
        from langchain_openai import ChatOpenAI
        from langgraph.prebuilt import create_react_agent

        toolkit = AmpereToolkit(seed=42)
        agent = create_react_agent(ChatOpenAI(), toolkit.get_tools())
        agent.invoke({
            "messages": [{"role": "user", "content": "Check the engulfing constant"}]
        })
        ```
    """

    tolerances: Optional[Tolerances] = Field(
        default=None,
        description="Numerical tolerances shared by every tool. Falls back to AMPERE_TOL.",
    )
    seed: Optional[int] = Field(
        default=None,
        description="Seed shared by every tool. Falls back to AMPERE_SEED, then 0.",
    )
    include_ma_measure: bool = Field(
        default=True,
        description="Include the Monge-Ampère measure tool.",
    )
    include_solve_ma: bool = Field(
        default=True,
        description="Include the Dirichlet Monge-Ampère tool.",
    )
    include_solve_linma: bool = Field(
        default=True,
        description="Include the linearized Monge-Ampère tool.",
    )
    include_solve_abreu: bool = Field(
        default=True,
        description="Include the second boundary value problem tool.",
    )
    include_sections: bool = Field(
        default=True,
        description="Include the sections tool.",
    )
    include_john: bool = Field(
        default=True,
        description="Include the John ellipsoid tool.",
    )
    include_harnack: bool = Field(
        default=True,
        description="Include the Harnack tool.",
    )
    include_lemma_suite: bool = Field(
        default=True,
        description="Include the lemma suite tool.",
    )

    model_config = ConfigDict(arbitrary_types_allowed=True)

    def get_tools(self) -> List[BaseTool]:
        """Get all enabled Ampere tools.

        Returns:
            List of LangChain tools configured with the toolkit's tolerances and seed.
        """
        common_kwargs: Dict[str, Any] = {"tolerances": self.tolerances, "seed": self.seed}
        enabled = {
            "ma-measure": self.include_ma_measure,
            "solve-ma": self.include_solve_ma,
            "solve-linma": self.include_solve_linma,
            "solve-abreu": self.include_solve_abreu,
            "sections": self.include_sections,
            "john": self.include_john,
            "harnack": self.include_harnack,
            "lemma-suite": self.include_lemma_suite,
        }
        tools: List[BaseTool] = []
        for subcommand, tool_cls in SUBCOMMANDS.items():
            if enabled[subcommand]:
                tools.append(tool_cls(**common_kwargs))
        return tools
