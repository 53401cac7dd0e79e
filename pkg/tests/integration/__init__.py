"""Integration tests for langchain-ampere."""
