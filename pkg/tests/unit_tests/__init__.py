"""Unit tests using LangChain standard test framework."""
