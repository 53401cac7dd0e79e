"""LangChain integration for Monge-Ampère numerics.

The toolkit wraps discrete solvers and probes for the Monge-Ampère equation:
- Monge-Ampère measures of piecewise-linear convex functions
- Aleksandrov solutions of the Dirichlet problem
- the linearized Monge-Ampère equation and its maximum principles
- the second boundary value problem of prescribed affine mean curvature
- sections, John ellipses, engulfing and covering
- matrix inequalities and exponent algebra

Example:
    ```python
    from langchain_ampere import AmpereToolkit, AmpereSolveMATool

    # Use individual tools
    solver = AmpereSolveMATool()
    result = solver.invoke({"dirac": "0,0,1", "domain": "disk"})

    # Or hand every tool to an agent
    toolkit = AmpereToolkit(seed=42)
    tools = toolkit.get_tools()
    ```
"""

from langchain_ampere.config import Tolerances, configure_logging
from langchain_ampere.toolkits import AmpereToolkit
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
    CheckResult,
    ExperimentResult,
    HarnackInput,
    JohnInput,
    LemmaSuiteInput,
    MAMeasureInput,
    RunReport,
    SectionsInput,
    SolveAbreuInput,
    SolveLinMAInput,
    SolveMAInput,
)
from langchain_ampere.version import __version__

__all__ = [
    # Version
    "__version__",
    # Configuration
    "Tolerances",
    "configure_logging",
    # Toolkit
    "AmpereToolkit",
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
