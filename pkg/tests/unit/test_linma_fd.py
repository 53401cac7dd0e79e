"""Unit tests for the finite-difference linearized Monge-Ampère operator."""

import numpy as np
import pytest

from langchain_ampere.errors import DegenerateHessianError, ParameterError, StencilError
from langchain_ampere.numerics.convex_core import SymmetricMatrix2
from langchain_ampere.numerics.grid import GridFunction
from langchain_ampere.numerics.linma_fd import (
    CofactorField,
    abp_check,
    affine_area,
    affine_area_first_variation,
    apply_operator,
    cofactor_field,
    discrete_hessian,
    divergence_free_residual,
    eccentric_solution,
    harnack_probe,
    hoelder_probe,
    oscillation_decay,
    solve_cofactor_system,
    solve_linma,
)
from langchain_ampere.numerics.sections import eccentric_quadratic


def _paraboloid(n: int = 16) -> GridFunction:
    return GridFunction.square(n).sample(lambda x, y: 0.5 * (x * x + y * y))


class TestHessianAndCofactors:
    """Tests for discrete_hessian and cofactor_field."""

    def test_exact_on_quadratics(self):
        """Second differences reproduce a quadratic's Hessian."""
        u = GridFunction.square(8).sample(lambda x, y: 1.5 * x * x + 0.5 * x * y + y * y)
        hess = discrete_hessian(u)
        inner = hess.nodes
        assert hess.u11[inner] == pytest.approx(3.0)
        assert hess.u12[inner] == pytest.approx(0.5)
        assert hess.u22[inner] == pytest.approx(2.0)
        assert np.all(np.isnan(hess.u11[~inner]))

    def test_cofactor_layout(self):
        """U = [[u22, -u12], [-u12, u11]]."""
        u = GridFunction.square(8).sample(lambda x, y: 1.5 * x * x + 0.5 * x * y + y * y)
        cof = cofactor_field(u)
        node = (4, 4)
        m = cof.at(node)
        assert (m.a11, m.a12, m.a22) == pytest.approx((2.0, -0.5, 3.0))
        assert not np.any(cof.nonpsd)

    def test_boundary_nodes_lack_stencil(self):
        """Boundary nodes cannot carry the nine-point stencil."""
        u = _paraboloid(8)
        with pytest.raises(StencilError):
            discrete_hessian(u, u.in_domain)

    def test_saddle_is_flagged(self):
        """An indefinite Hessian is marked non-PSD."""
        cof = cofactor_field(GridFunction.square(8).sample(lambda x, y: x * x - y * y))
        assert np.all(cof.nonpsd[cof.nodes])

    def test_constant_field_operator(self):
        """The identity field applies the Laplacian."""
        v = GridFunction.square(8).sample(lambda x, y: x * x + y * y)
        cof = CofactorField.constant(v, SymmetricMatrix2(1.0, 0.0, 1.0))
        out = apply_operator(cof, v)
        assert out[v.interior] == pytest.approx(4.0)
        assert np.all(np.isnan(out[v.boundary]))


class TestDivergence:
    """Tests for divergence_free_residual."""

    def test_quadratic_has_constant_cofactors(self):
        """Constant cofactors have zero divergence."""
        report, norms = divergence_free_residual(_paraboloid())
        assert report.max_norm == pytest.approx(0.0, abs=1e-9)
        assert report.nodes > 0
        assert norms.shape == (17, 17)

    def test_window_without_nodes(self):
        """A window outside the grid has no stencil."""
        with pytest.raises(StencilError):
            divergence_free_residual(_paraboloid(), window=(5.0, 6.0, 5.0, 6.0))


class TestLinearSolve:
    """Tests for solve_linma and solve_cofactor_system."""

    def test_eccentric_solution_is_recovered(self):
        """The quadratic solution of L_u v = 0 is reproduced to solver precision."""
        eps = 0.1
        quad = eccentric_quadratic(eps)
        exact = eccentric_solution(eps)
        grid = GridFunction.square(16)
        u = grid.sample(lambda x, y: quad(np.column_stack([x.ravel(), y.ravel()])).reshape(x.shape))
        truth = exact(grid.points(grid.in_domain)).reshape(grid.mask.shape)
        report = solve_linma(u, 0.0, grid.with_values(truth))
        assert report.monotone
        assert float(np.max(np.abs(report.v.values - truth))) <= 1e-8

    def test_poisson(self):
        """Identity coefficients solve Poisson exactly on quadratics."""
        grid = GridFunction.square(16)
        cof = CofactorField.constant(grid, SymmetricMatrix2(1.0, 0.0, 1.0))
        report = solve_cofactor_system(cof, grid, 4.0, lambda x, y: x * x + y * y)
        xx, yy = grid.coords
        assert report.v.values == pytest.approx(xx * xx + yy * yy, abs=1e-9)

    def test_degenerate_hessian(self):
        """A saddle gives no elliptic operator."""
        u = GridFunction.square(8).sample(lambda x, y: x * x - y * y)
        with pytest.raises(DegenerateHessianError, match="degenerate Hessian nodes"):
            solve_linma(u, 0.0, 0.0)

    def test_partial_coefficients(self):
        """Coefficients must cover every interior node."""
        grid = GridFunction.square(8)
        full = CofactorField.constant(grid, SymmetricMatrix2(1.0, 0.0, 1.0))
        nodes = full.nodes.copy()
        nodes[4, 4] = False
        cof = CofactorField(full.u11, full.u12, full.u22, nodes, full.nonpsd)
        with pytest.raises(StencilError):
            solve_cofactor_system(cof, grid, 0.0, 0.0)

    def test_unimodular_change_of_variables(self):
        """u(Tx) and v(Tx) solve the pulled-back problem when det T = 1."""
        t = np.array([[1.0, 0.5], [0.0, 1.0]])

        def pulled(fn):
            return lambda x, y: fn(t[0, 0] * x + t[0, 1] * y, t[1, 0] * x + t[1, 1] * y)

        def u(x, y):
            return 0.5 * (x * x + y * y)

        def v(x, y):
            return x * x + 1.0

        grid = GridFunction.square(16)
        for u_fn, v_fn in ((u, v), (pulled(u), pulled(v))):
            truth = grid.sample(v_fn)
            report = solve_linma(grid.sample(u_fn), 2.0, truth)
            assert float(np.max(np.abs(report.v.values - truth.values))) <= 1e-8

    def test_comparison(self):
        """A larger right-hand side gives a smaller solution for the same boundary data."""
        grid = GridFunction.square(16)
        u = grid.sample(lambda x, y: x * x / 0.4 + 0.1 * y * y)
        rng = np.random.default_rng(4)
        low = rng.uniform(-1.0, 0.0, grid.mask.shape)
        high = low + rng.uniform(0.0, 1.0, grid.mask.shape)
        v_low = solve_linma(u, grid.with_values(low), 0.0)
        v_high = solve_linma(u, grid.with_values(high), 0.0)
        assert v_low.monotone
        assert np.all(v_high.v.values <= v_low.v.values + 1e-8)


class TestABP:
    """Tests for abp_check."""

    def test_concave_function(self):
        """A concave function touches its envelope everywhere and obeys the bound."""
        grid = GridFunction.square(16)
        v = grid.sample(lambda x, y: 1.0 - 0.25 * (x * x + y * y))
        cof = CofactorField.constant(grid, SymmetricMatrix2(1.0, 0.0, 1.0))
        report = abp_check(cof, v, -1.0)
        assert report.passed
        assert report.contact_nodes == int(np.sum(grid.interior))
        assert report.sup_boundary == pytest.approx(0.75)
        assert report.sup_interior <= report.bound

    def test_degenerate_coefficients(self):
        """The bound needs det > 0."""
        grid = GridFunction.square(8)
        cof = CofactorField.constant(grid, SymmetricMatrix2(1.0, 0.0, 0.0))
        with pytest.raises(ParameterError):
            abp_check(cof, grid.sample(lambda x, y: x), 1.0)


class TestAffineArea:
    """Tests for affine_area and its first variation."""

    def test_paraboloid_density_is_one(self):
        """det = 1 at every interior node."""
        u = _paraboloid(16)
        assert affine_area(u, "nodes") == pytest.approx(225.0 / 64.0)
        assert affine_area(u, "cells") == pytest.approx(196.0 / 64.0)

    def test_unknown_rule(self):
        """Only the nodes and cells rules exist."""
        with pytest.raises(ParameterError):
            affine_area(_paraboloid(), "simpson")

    def test_concave_rejected(self):
        """A concave function has no affine area."""
        u = GridFunction.square(8).sample(lambda x, y: -(x * x + y * y))
        with pytest.raises(DegenerateHessianError):
            affine_area(u)

    def test_invariant_under_unimodular_scaling(self):
        """u(2 x1, x2 / 2) over the preimage box has the same affine area."""

        def u(x, y):
            return 0.5 * (x * x + y * y) + 0.1 * x**4

        box = GridFunction.on_box((-2.0, -0.5), 1.0 / 64.0, (257, 65)).sample(u)
        square = GridFunction.square(128).sample(lambda x, y: u(2.0 * x, 0.5 * y))
        assert affine_area(square) == pytest.approx(affine_area(box), rel=0.02)

    def test_first_variation_matches_difference_quotient(self):
        """The first variation is the derivative of the nodes rule."""
        u = GridFunction.square(16).sample(lambda x, y: 0.5 * (x * x + y * y) + 0.1 * x**4)
        phi = u.sample(lambda x, y: (1.0 - x * x) * (1.0 - y * y) * (x + 0.5))
        t = 1e-5
        plus = affine_area(u.with_values(u.values + t * phi.values), "nodes")
        minus = affine_area(u.with_values(u.values - t * phi.values), "nodes")
        expected = (plus - minus) / (2.0 * t)
        assert affine_area_first_variation(u, phi) == pytest.approx(expected, rel=1e-5)


class TestDiagnostics:
    """Tests for the Harnack, Hölder and decay probes."""

    def test_eccentricity_must_be_positive(self):
        """eps <= 0 is rejected."""
        with pytest.raises(ParameterError):
            eccentric_solution(0.0)

    def test_harnack_round_section(self):
        """For eps = 1 the ratio on S(0, t) is (1 + t) / (1 - t)."""
        report = harnack_probe(eccentric_quadratic(1.0), eccentric_solution(1.0), (0.0, 0.0), 0.25)
        assert report.ratio == pytest.approx(5.0 / 3.0, rel=1e-4)

    def test_harnack_height(self):
        """Heights must be positive."""
        with pytest.raises(ParameterError):
            harnack_probe(eccentric_quadratic(1.0), eccentric_solution(1.0), (0.0, 0.0), 0.0)

    def test_lipschitz_exponent(self):
        """A linear function has exponent one and seminorm one."""
        v = GridFunction.square(32).sample(lambda x, y: x + 0.0 * y)
        report = hoelder_probe(v)
        assert report.interior_exponent == pytest.approx(1.0, abs=1e-9)
        assert report.interior_seminorm == pytest.approx(1.0, abs=1e-9)
        assert report.boundary_exponent == pytest.approx(1.0, abs=1e-9)
        assert len(report.bins) == 5

    def test_constant_has_no_exponent(self):
        """A constant has no oscillation to fit."""
        with pytest.raises(ParameterError):
            hoelder_probe(GridFunction.square(16).sample(lambda x, y: 1.0 + 0.0 * x))

    def test_oscillation_decay_of_paraboloid(self):
        """The oscillation of u over its own sections is linear in the height."""
        u = _paraboloid(64)
        report = oscillation_decay(u, u, (0.0, 0.0), 0.25)
        assert report.alpha == pytest.approx(1.0, abs=0.1)
        assert len(report.heights) == 5
