"""Version information for langchain-ampere."""

__version__ = "0.1.0"
