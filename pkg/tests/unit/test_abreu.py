"""Unit tests for the second boundary value problem of affine mean curvature type."""

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from pydantic import ValidationError

from langchain_ampere.errors import (
    BoundaryDataError,
    DegenerateHessianError,
    MeshMismatchError,
    ParameterError,
)
from langchain_ampere.numerics.abreu import (
    ContinuationState,
    GFunction,
    SecondBVP,
    affine_mean_curvature,
    check_A1_A2_A3,
    continuation_solve,
    dual_equation_residual,
    fourth_order_residual,
    pair_residuals,
    phi_t_step,
    rough_rhs,
    singular_profile_exponents,
    singular_profile_polynomial,
)
from langchain_ampere.numerics.grid import GridFunction


def _half_square(x, y):
    return 0.5 * (x * x + y * y)


class TestGFunction:
    """Tests for the G family."""

    def test_affine_case(self):
        """theta = 1/4 is the affine normalization in the plane."""
        assert GFunction(kind="power", theta=0.25).is_affine_case
        assert not GFunction(kind="power", theta=0.2).is_affine_case

    def test_theta_range(self):
        """Power G needs 0 < theta < 1/n."""
        with pytest.raises(ValidationError):
            GFunction(kind="power", theta=0.6)
        with pytest.raises(ValidationError):
            GFunction(kind="power", theta=0.0)

    def test_log_closed_forms(self):
        """G = log d, G' = 1/d, w* = log d - 1."""
        g = GFunction(kind="log")
        assert float(g.value(math.e)) == pytest.approx(1.0)
        assert float(g.first(2.0)) == pytest.approx(0.5)
        assert float(g.dual(math.e)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("kind, theta", [("power", 0.25), ("log", 0.0), ("loglog", 0.0)])
    def test_inverse_first(self, kind, theta):
        """Theta inverts G'."""
        g = GFunction(kind=kind, theta=theta) if kind == "power" else GFunction(kind=kind)
        d = np.array([0.5, 2.0, 5.0])
        assert g.inverse_first(g.first(d)) == pytest.approx(d, rel=1e-9)

    @pytest.mark.parametrize("kind", ["power", "log", "loglog"])
    def test_derivatives_match_differences(self, kind):
        """G' and G'' agree with centered difference quotients."""
        g = GFunction(kind=kind)
        d, step = 1.7, 1e-5
        fd1 = (g.value(d + step) - g.value(d - step)) / (2.0 * step)
        fd2 = (g.first(d + step) - g.first(d - step)) / (2.0 * step)
        assert float(g.first(d)) == pytest.approx(float(fd1), rel=1e-6)
        assert float(g.second(d)) == pytest.approx(float(fd2), rel=1e-6)


class TestStructuralConditions:
    """Tests for check_A1_A2_A3."""

    @pytest.mark.parametrize("kind", ["power", "log"])
    def test_standard_members_pass(self, kind):
        """The power and log members satisfy all three conditions."""
        report = check_A1_A2_A3(GFunction(kind=kind))
        assert report.passed
        assert report.failing == []

    def test_growth_margin(self):
        """log G grows by log 10^4 along A2, short of a margin of 100."""
        report = check_A1_A2_A3(GFunction(kind="log"), margin=100.0)
        assert report.failing == ["A2"]
        assert report.a2.detail == "growth below margin"


class TestSecondBVP:
    """Tests for the continuation solver."""

    def test_psi_must_be_positive(self):
        """Boundary data for w needs a positive infimum."""
        with pytest.raises(BoundaryDataError):
            SecondBVP(GridFunction.square(8), 0.0, _half_square, 0.0)

    def test_plane_only(self):
        """The PDE pipeline runs for n = 2."""
        with pytest.raises(ParameterError):
            SecondBVP(GridFunction.square(8), 0.0, _half_square, 1.0, GFunction(kind="log", n=3))

    def test_damping_range(self):
        """Damping lies in (0, 1]."""
        problem = SecondBVP(GridFunction.square(8), 0.0, _half_square, 1.0)
        with pytest.raises(ParameterError):
            phi_t_step(ContinuationState.start(problem), problem, damping=0.0)

    def test_zero_curvature_keeps_the_paraboloid(self):
        """With f = 0 and psi = 1 the solution is |x|^2/2 with w = 1 at every t."""
        grid = GridFunction.square(8)
        problem = SecondBVP(grid, 0.0, _half_square, 1.0)
        result = continuation_solve(problem, steps=2)
        assert [row.t for row in result.path] == pytest.approx([0.0, 0.5, 1.0])
        state = result.state
        inside = grid.in_domain
        assert state.w.values[inside] == pytest.approx(1.0, abs=1e-5)
        expected = grid.sample(_half_square).values
        assert state.u.values[inside] == pytest.approx(expected[inside], abs=1e-5)
        assert result.conditions.passed

    def test_disk_grid(self):
        """The staircase boundary of the disk grid keeps the paraboloid."""
        grid = GridFunction.disk(8)
        result = continuation_solve(SecondBVP(grid, 0.0, _half_square, 1.0), steps=2)
        assert [row.t for row in result.path] == pytest.approx([0.0, 0.5, 1.0])
        inside = grid.in_domain
        assert result.state.w.values[inside] == pytest.approx(1.0, abs=1e-5)
        expected = grid.sample(_half_square).values
        assert result.state.u.values[inside] == pytest.approx(expected[inside], abs=1e-5)

    def test_step_with_curvature(self):
        """A step at t > 0 feeds t f to the linear stage."""
        problem = SecondBVP(GridFunction.square(8), 0.1, _half_square, 1.0)
        state = replace(ContinuationState.start(problem), t=0.5)
        step = phi_t_step(state, problem)
        assert step.sweeps == 1
        assert math.isfinite(step.fp_gap)
        assert step.min_det > 0

    def test_initial_w_does_not_change_the_limit(self):
        """Starting from another w reaches the same fixed point."""
        grid = GridFunction.square(8)
        problem = SecondBVP(grid, 0.0, _half_square, 1.0)
        first = continuation_solve(problem, steps=1)
        second = continuation_solve(
            problem, steps=1, initial_w=lambda x, y: 1.0 + 0.5 * (x * x + y * y)
        )
        inside = grid.in_domain
        gap = np.abs(first.state.w.values - second.state.w.values)[inside]
        assert float(np.max(gap)) <= 2e-6


class TestResiduals:
    """Tests for the fourth-order and dual residuals."""

    def test_paraboloid_has_zero_affine_curvature(self):
        """det = 1 makes w constant, so L[u] = 0."""
        u = GridFunction.square(16).sample(_half_square)
        report = fourth_order_residual(u, GFunction(kind="power", theta=0.25))
        assert report.max_norm == pytest.approx(0.0, abs=1e-8)
        assert report.affine_curvature is not None
        curvature = affine_mean_curvature(u)
        assert np.max(np.abs(curvature.values)) == pytest.approx(0.0, abs=1e-8)

    def test_right_hand_side_scaling(self):
        """The residual is L[u] - t f."""
        u = GridFunction.square(16).sample(_half_square)
        report = fourth_order_residual(u, GFunction(kind="log"), f=2.0, t=0.5)
        assert report.max_norm == pytest.approx(1.0, abs=1e-8)
        assert report.affine_curvature is None

    def test_concave_rejected(self):
        """A concave u has det > 0 but no positive semidefinite cofactor."""
        u = GridFunction.square(16).sample(lambda x, y: -_half_square(x, y))
        with pytest.raises(DegenerateHessianError):
            fourth_order_residual(u, GFunction())

    def test_pair_of_paraboloid(self):
        """u = |x|^2/2 with w = 1 solves the pair for f = 0 and leaves t f otherwise."""
        u = GridFunction.square(16).sample(_half_square)
        w = u.with_values(np.ones(u.mask.shape))
        g = GFunction(kind="power", theta=0.25)
        report = pair_residuals(u, w, g)
        assert report.nodes > 0
        assert report.equation == pytest.approx(0.0, abs=1e-8)
        assert report.consistency == pytest.approx(0.0, abs=1e-12)
        shifted = pair_residuals(u, w, g, f=0.1, t=0.5)
        assert shifted.equation == pytest.approx(0.05, abs=1e-8)

    def test_pair_needs_one_grid(self):
        """u and w share a grid."""
        u = GridFunction.square(16).sample(_half_square)
        w = GridFunction.square(8).sample(lambda x, y: 1.0 + 0.0 * x)
        with pytest.raises(MeshMismatchError):
            pair_residuals(u, w, GFunction())

    def test_dual_residual_of_paraboloid(self):
        """|p|^2/2 is self-dual and w* is constant."""
        u = GridFunction.square(16).sample(_half_square)
        report = dual_equation_residual(u, GFunction(kind="power", theta=0.25))
        assert report.nodes > 0
        assert report.max_norm == pytest.approx(0.0, abs=1e-8)

    def test_dual_needs_injective_gradient(self):
        """A function of x alone has a degenerate gradient map."""
        u = GridFunction.square(16).sample(lambda x, y: x * x + 0.0 * y)
        with pytest.raises(ParameterError, match="not injective"):
            dual_equation_residual(u, GFunction())


class TestSingularProfiles:
    """Tests for the radial profile exponents."""

    @pytest.mark.parametrize("n, expected", [(2, (0.5,)), (3, ()), (10, (4.5,))])
    def test_exponents(self, n, expected):
        """Double roots in dimensions 2 and 10, none in dimension 3."""
        assert singular_profile_exponents(n) == expected

    def test_polynomial_is_exact(self):
        """Rational roots evaluate to exactly zero."""
        assert singular_profile_polynomial(Fraction(1, 2), 2) == 0
        assert singular_profile_polynomial(Fraction(9, 2), 10) == 0
        assert singular_profile_polynomial(1, 3) != 0


class TestRoughRhs:
    """Tests for rough_rhs."""

    def test_values(self):
        """c |x|^-gamma, floored at r_min."""
        f = rough_rhs(2.0, 0.5)
        out = f(np.array([1.0, 0.0]), np.array([0.0, 0.0]))
        assert out == pytest.approx([2.0, 2.0 * 1e-3**-0.5])

    def test_negative_gamma(self):
        """gamma must be nonnegative."""
        with pytest.raises(ParameterError):
            rough_rhs(1.0, -0.1)
