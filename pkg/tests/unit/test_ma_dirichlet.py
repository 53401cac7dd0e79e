"""Unit tests for the Dirichlet problem solvers."""

import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from langchain_ampere.errors import DomainError, MeshMismatchError, ParameterError
from langchain_ampere.numerics.convex_core import convexity_certificate
from langchain_ampere.numerics.ma_dirichlet import (
    DirichletProblem,
    DomainSpec,
    ProblemSpec,
    barrier,
    drop_sandwich,
    problem_from_json,
    solution_to_json,
    solve_density,
    solve_dirac,
    solve_homogeneous,
    symmetry_residual,
)
from langchain_ampere.numerics.mesh import disk_mesh


@pytest.fixture(scope="module")
def mesh():
    """Quasi-uniform disk mesh with 61 vertices."""
    return disk_mesh(4)


@pytest.fixture(scope="module")
def center_solution(mesh):
    """Unit Dirac mass at the center with zero boundary data."""
    return solve_dirac(DirichletProblem.dirac(mesh, 0.0, [(0.0, 0.0)], [1.0]))


class TestDirichletProblem:
    """Tests for problem construction."""

    def test_dirac_site_at_vertex(self, mesh):
        """A site at a mesh vertex reuses it."""
        problem = DirichletProblem.dirac(mesh, 0.0, [(0.0, 0.0)], [1.0])
        assert problem.mesh.n_vertices == mesh.n_vertices
        assert problem.measure.indices.tolist() == [0]

    def test_dirac_site_inserted(self, mesh):
        """A site between vertices is added to the mesh."""
        problem = DirichletProblem.dirac(mesh, 0.0, [(0.11, 0.07)], [1.0])
        assert problem.mesh.n_vertices == mesh.n_vertices + 1
        assert not problem.mesh.boundary[problem.measure.indices[0]]

    def test_site_on_boundary(self, mesh):
        """Sites must be interior."""
        with pytest.raises(DomainError):
            DirichletProblem.dirac(mesh, 0.0, [(1.0, 0.0)], [1.0])

    def test_nonpositive_mass(self, mesh):
        """Dirac masses must be positive."""
        with pytest.raises(ParameterError):
            DirichletProblem.dirac(mesh, 0.0, [(0.0, 0.0)], [-1.0])

    def test_duplicate_sites(self, mesh):
        """Two masses at one vertex are rejected."""
        with pytest.raises(ParameterError):
            DirichletProblem.dirac(mesh, 0.0, [(0.0, 0.0), (0.0, 0.0)], [1.0, 1.0])

    def test_nonpositive_density(self, mesh):
        """Density must be positive on every triangle."""
        with pytest.raises(ParameterError, match="non-positive density"):
            DirichletProblem.density(mesh, 0.0, 0.0)

    def test_density_targets(self, mesh):
        """Dual-cell targets of a unit density sum to the interior dual area."""
        problem = DirichletProblem.density(mesh, 0.0, 1.0)
        expected = float(np.sum(mesh.dual_areas()[mesh.interior]))
        assert problem.measure.total == pytest.approx(expected)

    def test_boundary_data_length(self, mesh):
        """Boundary data needs one value per vertex or per boundary vertex."""
        with pytest.raises(MeshMismatchError):
            DirichletProblem.homogeneous(mesh, np.zeros(5))


class TestSolvers:
    """Tests for solve_homogeneous, solve_dirac and solve_density."""

    def test_homogeneous_affine_data(self, mesh):
        """Affine boundary data extends to the affine function with no mass."""
        problem = DirichletProblem.homogeneous(mesh, lambda p: p[:, 0] + 2.0 * p[:, 1])
        solution = solve_homogeneous(problem)
        expected = mesh.vertices[:, 0] + 2.0 * mesh.vertices[:, 1]
        assert solution.u.values == pytest.approx(expected, abs=1e-9)
        assert float(np.sum(solution.residual)) <= 1e-6

    def test_homogeneous_rejects_mass(self, mesh):
        """solve_homogeneous needs the zero measure."""
        with pytest.raises(ParameterError):
            solve_homogeneous(DirichletProblem.dirac(mesh, 0.0, [(0.0, 0.0)], [1.0]))

    def test_dirac_matches_cone(self, center_solution):
        """The center mass gives the cone sqrt(1/pi)(|x| - 1) within 5 h."""
        u = center_solution.u
        exact = math.sqrt(1.0 / math.pi) * (np.linalg.norm(u.mesh.vertices, axis=1) - 1.0)
        assert float(np.max(np.abs(u.values - exact))) <= 5.0 * u.mesh.h
        assert center_solution.max_relative_residual <= 1e-6
        assert convexity_certificate(u).passed

    def test_boundary_data_is_kept(self, center_solution):
        """Boundary values stay zero."""
        assert center_solution.boundary_mismatch <= 1e-10

    def test_warm_start(self, mesh, center_solution):
        """Starting from the solution stays there."""
        problem = DirichletProblem.dirac(mesh, 0.0, [(0.0, 0.0)], [1.0])
        initial = center_solution.u.values[center_solution.sites]
        warm = solve_dirac(problem, initial=initial)
        assert warm.max_relative_residual <= 1e-6
        assert warm.u.values == pytest.approx(center_solution.u.values, abs=1e-6)

    def test_warm_start_length(self, mesh):
        """A warm start needs one value per site."""
        problem = DirichletProblem.dirac(mesh, 0.0, [(0.0, 0.0)], [1.0])
        with pytest.raises(MeshMismatchError):
            solve_dirac(problem, initial=[0.0, 0.0])

    def test_symmetric_solution(self, center_solution):
        """The disk mesh is symmetric under y -> -y and so is the solution."""
        assert symmetry_residual(center_solution, np.diag([1.0, -1.0])) <= 1e-4

    def test_density_needs_density_problem(self, mesh):
        """solve_density rejects Dirac problems."""
        with pytest.raises(ParameterError):
            solve_density(DirichletProblem.dirac(mesh, 0.0, [(0.0, 0.0)], [1.0]))

    def test_constant_density_depth(self, mesh):
        """Unit density on the unit disk sinks to about -1/2."""
        solution = solve_density(DirichletProblem.density(mesh, 0.0, 1.0))
        assert solution.max_relative_residual <= 1e-6
        report = drop_sandwich(solution, 1.0, 1.0, slack=0.1)
        assert report.passed
        assert 0.45 <= -report.min_value <= 0.55


class TestOrderAndUniqueness:
    """Tests for monotonicity in the data and independence of the start."""

    SITES = [(0.0, 0.0), (0.3, 0.2)]

    def test_more_mass_lowers_the_solution(self, mesh):
        """Raising one Dirac mass lowers u everywhere and strictly at that site."""
        light = solve_dirac(DirichletProblem.dirac(mesh, 0.0, self.SITES, [0.5, 0.5]))
        heavy = solve_dirac(DirichletProblem.dirac(mesh, 0.0, self.SITES, [0.5, 1.0]))
        assert np.all(heavy.u.values <= light.u.values + 1e-8)
        site = int(light.sites[1])
        assert heavy.u.values[site] < light.u.values[site] - 1e-3

    def test_start_does_not_change_the_solution(self, mesh):
        """A deeper starting guess converges to the same solution."""
        problem = DirichletProblem.dirac(mesh, 0.0, self.SITES, [0.5, 1.0])
        first = solve_dirac(problem)
        second = solve_dirac(problem, initial=2.0 * first.u.values[first.sites])
        assert second.max_relative_residual <= 1e-6
        assert second.u.values == pytest.approx(first.u.values, abs=1e-8)


class TestBarrierAndDiagnostics:
    """Tests for barrier and drop_sandwich."""

    def test_barrier_for_convex_data(self, mesh):
        """Convex data needs no correction."""
        b = barrier(mesh, lambda p: np.sum(p**2, axis=1))
        assert b.mu == 0.0

    def test_barrier_for_concave_data(self, mesh):
        """Concave data needs a positive coefficient; boundary values are kept."""
        phi = -np.sum(mesh.vertices**2, axis=1)
        b = barrier(mesh, phi)
        assert b.mu > 0.0
        assert convexity_certificate(b.function).passed
        bidx = mesh.boundary_indices
        assert b.function.values[bidx] == pytest.approx(phi[bidx], abs=1e-9)

    def test_barrier_rejects_small_mu(self, mesh):
        """A coefficient that leaves the barrier non-convex is rejected."""
        with pytest.raises(ParameterError):
            barrier(mesh, -np.sum(mesh.vertices**2, axis=1), mu=0.0)

    def test_sandwich_parameters(self, center_solution):
        """lambda must be positive and at most Lambda."""
        with pytest.raises(ParameterError):
            drop_sandwich(center_solution, 2.0, 1.0)


class TestProblemJson:
    """Tests for the JSON problem interface."""

    def test_dirac_problem(self):
        """A JSON string with Dirac masses."""
        text = json.dumps(
            {"domain": {"kind": "disk", "level": 3}, "diracs": [{"x": 0, "y": 0, "mass": 1}]}
        )
        problem = problem_from_json(text)
        assert problem.kind == "dirac"
        assert problem.measure.total == pytest.approx(1.0)

    def test_homogeneous_problem(self):
        """No measure means the homogeneous problem."""
        problem = problem_from_json(
            {"domain": {"kind": "polar", "level": 2}, "boundary": {"kind": "half_square"}}
        )
        assert problem.kind == "homogeneous"
        assert problem.mesh.n_vertices == 1 + 2 * 32

    def test_both_measures(self):
        """Dirac masses and a density are mutually exclusive."""
        with pytest.raises(ValidationError):
            ProblemSpec.model_validate(
                {"diracs": [{"x": 0, "y": 0, "mass": 1}], "density": {"value": 1.0}}
            )

    def test_polygon_needs_vertices(self):
        """A polygon domain without vertices is invalid."""
        with pytest.raises(ValidationError):
            DomainSpec(kind="polygon")

    def test_solution_json(self, center_solution):
        """Solutions serialize to plain lists."""
        data = solution_to_json(center_solution)
        assert set(data) >= {"u", "sites", "targets", "residual", "iterations"}
        json.dumps(data)
