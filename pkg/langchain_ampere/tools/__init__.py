"""Ampere LangChain tools."""

from langchain_ampere.tools.base import (
    AmpereBaseTool,
    CheckResult,
    ExperimentResult,
    RunReport,
)
from langchain_ampere.tools.harnack import AmpereHarnackTool, HarnackInput
from langchain_ampere.tools.john import AmpereJohnTool, JohnInput
from langchain_ampere.tools.lemma_suite import AmpereLemmaSuiteTool, LemmaSuiteInput
from langchain_ampere.tools.ma_measure import AmpereMAMeasureTool, MAMeasureInput
from langchain_ampere.tools.sections import AmpereSectionsTool, SectionsInput
from langchain_ampere.tools.solve_abreu import AmpereSolveAbreuTool, SolveAbreuInput
from langchain_ampere.tools.solve_linma import AmpereSolveLinMATool, SolveLinMAInput
from langchain_ampere.tools.solve_ma import AmpereSolveMATool, SolveMAInput

__all__ = [
    # Base
    "AmpereBaseTool",
    "CheckResult",
    "ExperimentResult",
    "RunReport",
    # Tools
    "AmpereMAMeasureTool",
    "AmpereSolveMATool",
    "AmpereSolveLinMATool",
    "AmpereSolveAbreuTool",
    "AmpereSectionsTool",
    "AmpereJohnTool",
    "AmpereHarnackTool",
    "AmpereLemmaSuiteTool",
    # Input schemas
    "MAMeasureInput",
    "SolveMAInput",
    "SolveLinMAInput",
    "SolveAbreuInput",
    "SectionsInput",
    "JohnInput",
    "HarnackInput",
    "LemmaSuiteInput",
]
