"""Ampere LangChain toolkits."""

from langchain_ampere.toolkits.ampere_toolkit import AmpereToolkit

__all__ = ["AmpereToolkit"]
