"""Unit tests for langchain-ampere."""
