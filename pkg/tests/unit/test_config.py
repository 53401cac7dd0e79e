"""Unit tests for tolerances, logging setup and the error hierarchy."""

import logging

import pytest
from pydantic import ValidationError

from langchain_ampere.config import Tolerances, configure_logging
from langchain_ampere.errors import (
    AmpereError,
    DomainError,
    FixedPointStall,
    LinearSolveError,
    SolverError,
)


class TestTolerances:
    """Tests for Tolerances."""

    def test_defaults(self):
        """Documented default values."""
        tol = Tolerances()
        assert tol.geom == 1e-12
        assert tol.meas == 1e-6
        assert tol.lin == 1e-10
        assert tol.fp == 1e-6

    def test_overrides(self):
        """name=value pairs replace single fields and leave the rest."""
        tol = Tolerances().with_overrides(["meas=1e-4", " lin = 1e-8 ", ""])
        assert tol.meas == 1e-4
        assert tol.lin == 1e-8
        assert tol.geom == 1e-12

    def test_unknown_name(self):
        """Unknown names are rejected with the valid list."""
        with pytest.raises(ValueError, match="Unknown tolerance override"):
            Tolerances().with_overrides(["speed=1"])

    def test_bad_value(self):
        """Values must parse as numbers."""
        with pytest.raises(ValueError, match="needs a number"):
            Tolerances().with_overrides(["meas=small"])

    def test_positive(self):
        """Tolerances are positive."""
        with pytest.raises(ValidationError):
            Tolerances(meas=0.0)

    def test_frozen_and_closed(self):
        """The record is immutable and rejects extra fields."""
        with pytest.raises(ValidationError):
            Tolerances(speed=1.0)
        tol = Tolerances()
        with pytest.raises(ValidationError):
            tol.meas = 1.0

    def test_from_env(self, monkeypatch):
        """AMPERE_TOL holds comma separated overrides."""
        monkeypatch.setenv("AMPERE_TOL", "meas=1e-3,bc=1e-8")
        tol = Tolerances.from_env()
        assert tol.meas == 1e-3
        assert tol.bc == 1e-8

    def test_from_env_unset(self, monkeypatch):
        """No variable means defaults."""
        monkeypatch.delenv("AMPERE_TOL", raising=False)
        assert Tolerances.from_env() == Tolerances()


class TestConfigureLogging:
    """Tests for configure_logging."""

    def test_level_from_env(self, monkeypatch):
        """AMPERE_LOG sets the package level."""
        monkeypatch.setenv("AMPERE_LOG", "debug")
        configure_logging()
        assert logging.getLogger("langchain_ampere").level == logging.DEBUG
        configure_logging("warning")
        assert logging.getLogger("langchain_ampere").level == logging.WARNING

    def test_single_handler(self):
        """Repeated calls do not stack handlers."""
        configure_logging("info")
        configure_logging("info")
        assert len(logging.getLogger("langchain_ampere").handlers) == 1

    def test_unknown_level(self):
        """Unknown level names are rejected."""
        with pytest.raises(ValueError, match="Unknown log level"):
            configure_logging("chatty")


class TestErrors:
    """Tests for the exception hierarchy."""

    def test_input_errors_are_value_errors(self):
        """Contract violations can be caught as ValueError."""
        err = DomainError("outside")
        assert isinstance(err, ValueError)
        assert isinstance(err, AmpereError)

    def test_solver_errors_carry_history(self):
        """Solver failures keep their residual trail."""
        err = LinearSolveError("stalled", residual=1e-3, history=(1.0, 1e-3))
        assert isinstance(err, RuntimeError)
        assert isinstance(err, SolverError)
        assert err.residual == 1e-3
        assert err.history == [1.0, 1e-3]
        assert SolverError("x").history == []

    def test_stall_reports_progress(self):
        """FixedPointStall records the last converged parameter."""
        err = FixedPointStall("stuck", t_reached=0.4, residual=0.2)
        assert err.t_reached == 0.4
        assert err.residual == 0.2
