"""Unit tests for Ampere tools."""

import json
import os
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError

from langchain_ampere import (
    AmpereHarnackTool,
    AmpereJohnTool,
    AmpereLemmaSuiteTool,
    AmpereMAMeasureTool,
    AmpereSectionsTool,
    AmpereSolveAbreuTool,
    AmpereSolveLinMATool,
    AmpereSolveMATool,
    HarnackInput,
    JohnInput,
    LemmaSuiteInput,
    MAMeasureInput,
    SectionsInput,
    SolveAbreuInput,
    SolveLinMAInput,
    SolveMAInput,
    Tolerances,
)
from langchain_ampere.tools.base import CheckResult, ExperimentResult
from langchain_ampere.tools.john import random_polygons
from langchain_ampere.tools.solve_ma import parse_diracs


class TestInputSchemas:
    """Tests for tool input schemas."""

    def test_ma_measure_defaults(self):
        """Cone on a polar mesh by default."""
        schema = MAMeasureInput()
        assert schema.function == "cone"
        assert schema.output_format == "json"

    def test_ma_measure_unknown_function(self):
        """Only the three test functions are accepted."""
        with pytest.raises(ValidationError):
            MAMeasureInput(function="sphere")

    def test_john_point_range(self):
        """min_points may not exceed max_points."""
        with pytest.raises(ValidationError):
            JohnInput(min_points=10, max_points=5)

    def test_harnack_t_range(self):
        """Heights lie strictly between 0 and 1."""
        with pytest.raises(ValidationError):
            HarnackInput(t=[1.0])
        with pytest.raises(ValidationError):
            HarnackInput(epsilon=[-1.0])

    def test_linma_grid_size(self):
        """Grids need at least four cells per side."""
        with pytest.raises(ValidationError):
            SolveLinMAInput(n=2)

    def test_abreu_damping(self):
        """Damping lies in (0, 1]."""
        with pytest.raises(ValidationError):
            SolveAbreuInput(damping=0.0)
        assert SolveAbreuInput(damping=1.0).damping == 1.0

    def test_sections_pairs(self):
        """At least one engulfing pair."""
        with pytest.raises(ValidationError):
            SectionsInput(pairs=0)

    def test_lemma_suite_defaults(self):
        """Dimensions default to the plane and above."""
        schema = LemmaSuiteInput()
        assert schema.pairs > 0
        assert schema.dimensions

    def test_solve_ma_domain(self):
        """Unknown domains are rejected."""
        with pytest.raises(ValidationError):
            SolveMAInput(domain="triangle")


class TestExperimentResult:
    """Tests for CheckResult and ExperimentResult."""

    def test_check_helpers(self):
        """Bounds pass inclusively."""
        assert CheckResult.at_most("a", 1.0, 1.0).status == "pass"
        assert CheckResult.at_most("a", 1.1, 1.0).status == "fail"
        assert CheckResult.at_least("a", 0.5, 1.0).status == "fail"
        assert CheckResult.holds("a", True).status == "pass"
        assert CheckResult.skipped("a", "why").status == "skip"

    def test_skips_do_not_fail(self):
        """A run passes when no check fails."""
        result = ExperimentResult(
            experiment="x",
            checks=[CheckResult.holds("a", True), CheckResult.skipped("b", "n/a")],
        )
        assert result.passed
        assert result.failed == []

    def test_failed_names(self):
        """Failing checks are listed by name."""
        result = ExperimentResult(
            experiment="x",
            checks=[CheckResult.holds("a", True), CheckResult.holds("b", False)],
        )
        assert not result.passed
        assert result.failed == ["b"]

    def test_duplicate_check_names(self):
        """Check names are unique within one experiment."""
        with pytest.raises(ValidationError):
            ExperimentResult(
                experiment="x",
                checks=[CheckResult.holds("a", True), CheckResult.holds("a", False)],
            )

    def test_lookup(self):
        """Unknown tables and checks raise KeyError."""
        result = ExperimentResult(experiment="x")
        with pytest.raises(KeyError):
            result.table("missing")
        with pytest.raises(KeyError):
            result.check("missing")


class TestAmpereBaseTool:
    """Tests for the shared tool configuration."""

    def test_seed_defaults_to_zero(self):
        """No seed and no environment means seed 0."""
        with patch.dict(os.environ, {}, clear=True):
            tool = AmpereJohnTool()
        assert tool.rng_seed == 0
        assert tool.tol == Tolerances()

    def test_seed_from_environment(self):
        """AMPERE_SEED fills in a missing seed."""
        with patch.dict(os.environ, {"AMPERE_SEED": "17"}):
            assert AmpereJohnTool().rng_seed == 17
            assert AmpereJohnTool(seed=3).rng_seed == 3

    def test_bad_seed_environment(self):
        """A non-integer AMPERE_SEED is rejected."""
        with patch.dict(os.environ, {"AMPERE_SEED": "abc"}):
            with pytest.raises(ValidationError):
                AmpereJohnTool()

    def test_negative_seed(self):
        """Seeds are nonnegative."""
        with pytest.raises(ValidationError):
            AmpereJohnTool(seed=-1)

    def test_tolerances_from_environment(self):
        """AMPERE_TOL overrides the defaults."""
        with patch.dict(os.environ, {"AMPERE_TOL": "meas=1e-4"}):
            tool = AmpereMAMeasureTool()
        assert tool.tol.meas == 1e-4

    def test_file_path_output(self):
        """file_path output writes the result JSON to a temporary file."""
        tool = AmpereJohnTool()
        path = Path(tool._run(polygons=0, output_format="file_path"))
        try:
            assert path.name.startswith("john-")
            assert path.suffix == ".json"
            payload = json.loads(path.read_text(encoding="utf-8"))
            assert payload["experiment"] == "john"
        finally:
            path.unlink()


class TestAmpereMAMeasureTool:
    """Tests for AmpereMAMeasureTool."""

    def test_tool_attributes(self):
        """Name, description and schema."""
        tool = AmpereMAMeasureTool()
        assert tool.name == "ampere_ma_measure"
        assert "Monge-Ampère" in tool.description
        assert tool.args_schema == MAMeasureInput

    def test_cone_mass_at_apex(self):
        """The cone carries about pi at its apex and nothing elsewhere."""
        result = AmpereMAMeasureTool().run_experiment(function="cone", level=4, degree=32)
        assert result.experiment == "ma-measure-cone"
        assert result.check("apex_mass_near_pi").status == "pass"
        assert result.check("mass_off_apex").status == "pass"
        assert result.passed
        assert "apex_subdifferential" in result.figures

    def test_quadratic(self):
        """A sampled paraboloid is convex and its mass fits in its gradient image."""
        result = AmpereMAMeasureTool().run_experiment(function="quadratic", level=3)
        assert result.passed
        assert len(result.table("masses").rows) > 0

    def test_max_affine(self):
        """A seeded maximum of affine pieces is convex."""
        result = AmpereMAMeasureTool(seed=5).run_experiment(
            function="max_affine", level=3, pieces=6
        )
        assert result.check("convexity").status == "pass"
        assert {c.name for c in result.checks} >= {"legendre_involution"}

    def test_unknown_function(self):
        """run_experiment rejects unknown functions."""
        with pytest.raises(ValueError):
            AmpereMAMeasureTool().run_experiment(function="sphere")

    def test_invoke_returns_json(self):
        """invoke returns the payload as JSON."""
        out = AmpereMAMeasureTool().invoke({"function": "cone", "level": 2, "degree": 16})
        payload = json.loads(out)
        assert payload["experiment"] == "ma-measure-cone"
        assert {t["name"] for t in payload["tables"]} == {"masses"}

    async def test_ainvoke(self):
        """ainvoke runs the same experiment in a worker thread."""
        out = await AmpereMAMeasureTool().ainvoke({"function": "cone", "level": 2, "degree": 16})
        assert json.loads(out)["experiment"] == "ma-measure-cone"


class TestAmpereSolveMATool:
    """Tests for AmpereSolveMATool."""

    def test_parse_diracs(self):
        """x,y,m triples separated by semicolons."""
        sites, masses = parse_diracs("0,0,1; 0.2,-0.1,0.5")
        assert sites == [(0.0, 0.0), (0.2, -0.1)]
        assert masses == [1.0, 0.5]

    @pytest.mark.parametrize("text", ["", "0,0", "a,b,c"])
    def test_parse_diracs_errors(self, text):
        """Malformed lists raise ValueError."""
        with pytest.raises(ValueError):
            parse_diracs(text)

    def test_center_dirac(self):
        """The center mass matches the cone and conserves mass."""
        result = AmpereSolveMATool().run_experiment(levels=[4])
        assert result.experiment == "solve-ma"
        assert result.check("mass_residual_level_4").status == "pass"
        assert result.check("cone_error_level_4").status == "pass"
        assert "solution" in result.artifacts
        assert len(result.table("solve_ma").rows) == 1

    def test_problem_dictionary(self):
        """A JSON problem without a measure is homogeneous."""
        result = AmpereSolveMATool().run_experiment(
            problem={"domain": {"kind": "polar", "level": 2}, "boundary": {"kind": "half_square"}}
        )
        assert result.experiment == "solve-ma-homogeneous"
        assert result.check("interior_mass").status == "pass"


class TestAmpereSolveLinMATool:
    """Tests for AmpereSolveLinMATool."""

    def test_eccentric_recovery(self):
        """The quadratic solution is recovered on a coarse grid."""
        result = AmpereSolveLinMATool().run_experiment(eps=0.1, n=16)
        assert result.experiment == "solve-linma"
        assert result.check("exact_recovery").status == "pass"
        assert result.check("monotone_stencil").status == "pass"
        assert result.check("hoelder_exponent").status == "skip"
        assert result.passed
        assert {t.name for t in result.tables} == {"solve_linma", "hoelder_bins"}


class TestAmpereSolveAbreuTool:
    """Tests for AmpereSolveAbreuTool."""

    def test_path_and_tables(self):
        """A short continuation records one path row per step."""
        result = AmpereSolveAbreuTool().run_experiment(n=8, steps=2)
        assert result.experiment == "solve-abreu"
        assert len(result.table("path").rows) == 3
        assert result.check("g_conditions").status == "pass"
        assert result.check("w_positive").status == "pass"
        assert result.check("det_lower_bound").status == "pass"
        assert {"u", "w", "fourth_order_residual"} <= set(result.artifacts)

    def test_invalid_theta(self):
        """Power G outside 0 < theta < 1/2 is rejected."""
        with pytest.raises(ValueError):
            AmpereSolveAbreuTool().run_experiment(n=8, theta=0.6)

    def test_rough_mode_never_fails(self):
        """Rough runs record outcomes as skipped checks."""
        result = AmpereSolveAbreuTool().run_experiment(n=8, steps=2, f=1.0, rough_gamma=0.5)
        assert result.experiment == "solve-abreu-rough"
        assert result.check("continuation").status == "skip"


class TestAmpereSectionsTool:
    """Tests for AmpereSectionsTool."""

    def test_small_sweep(self):
        """Volume law, engulfing and covering on a few pairs."""
        result = AmpereSectionsTool().run_experiment(eps=0.1, pairs=5, density_level=4)
        assert result.experiment == "sections"
        assert result.check("volume_law").status == "pass"
        assert result.check("density_volume_spread").status == "skip"
        assert result.check("vitali_covering").status == "pass"
        assert {t.name for t in result.tables} == {"volume_law", "density_volume", "probes"}


class TestAmpereJohnTool:
    """Tests for AmpereJohnTool."""

    def test_square_only(self):
        """polygons = 0 checks only the square."""
        result = AmpereJohnTool().run_experiment(polygons=0)
        assert [c.name for c in result.checks] == ["square_center", "square_shape"]
        assert result.passed

    def test_random_polygons(self):
        """Random hulls satisfy both containments."""
        result = AmpereJohnTool(seed=1).run_experiment(polygons=3)
        assert result.check("inner_containment").status == "pass"
        assert result.check("outer_containment").status == "pass"
        assert result.check("normalization").status == "pass"

    def test_polygon_generation_is_seeded(self):
        """Equal seeds give equal polygons."""
        first = random_polygons(np.random.default_rng(4), 2, 5, 8)
        second = random_polygons(np.random.default_rng(4), 2, 5, 8)
        assert len(first) == 2
        for a, b in zip(first, second):
            assert a.vertices.tolist() == b.vertices.tolist()


class TestAmpereHarnackTool:
    """Tests for AmpereHarnackTool."""

    def test_ratios_match_closed_form(self):
        """Grid ratios on normalized sections match the exact ones."""
        result = AmpereHarnackTool().run_experiment(epsilon=[1.0], t=[0.25], resolution=32)
        assert result.experiment == "harnack"
        assert result.check("ratio_eps_1_t_0.25").status == "pass"
        assert result.check("ball_ratio_eps_1").status == "pass"


class TestAmpereLemmaSuiteTool:
    """Tests for AmpereLemmaSuiteTool."""

    def test_suite_passes(self):
        """Matrix lemmas, G identities and divergence order all hold."""
        result = AmpereLemmaSuiteTool().run_experiment(pairs=50)
        assert result.experiment == "lemma-suite"
        assert result.check("profile_root_n10").status == "pass"
        assert result.check("matrix_lemmas").status == "pass"
        assert result.check("log_dual_exact").status == "pass"
        assert result.check("inverse_first_loglog").status == "pass"
        assert result.table("profile_exponents").rows
