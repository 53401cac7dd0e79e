"""Tests for langchain-ampere."""
