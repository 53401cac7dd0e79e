"""Unit tests for sections and John ellipsoids."""

import math

import numpy as np
import pytest

from langchain_ampere.errors import DomainError, ParameterError
from langchain_ampere.numerics.grid import GridFunction
from langchain_ampere.numerics.mesh import ConvexDomain
from langchain_ampere.numerics.sections import (
    Ellipsoid,
    c1alpha_inclusion_probe,
    eccentric_quadratic,
    ellipse_section_volume,
    engulfing_constant,
    extract_section,
    inclusion_exclusion_probe,
    john_containment,
    john_ellipsoid,
    normalize,
    quadratic_section_volume,
    section_size_exponent,
    section_volume_sweep,
    theta_probe,
    trace_section,
    vitali_select,
)

TRIANGLE = np.array(
    [[1.0, 0.0], [-0.5, math.sqrt(3.0) / 2.0], [-0.5, -math.sqrt(3.0) / 2.0]]
)
PENTAGON = np.array([[0.0, 0.0], [3.0, 0.0], [4.0, 1.5], [2.0, 3.0], [-0.5, 1.5]])


@pytest.fixture(scope="module")
def paraboloid():
    """|x|^2 / 2 on a 65 x 65 grid over [-1, 1]^2."""
    return GridFunction.square(64).sample(lambda x, y: 0.5 * (x * x + y * y))


class TestEllipsoid:
    """Tests for Ellipsoid and the John ellipse."""

    def test_from_axes(self):
        """Axes (2, 1) give area 2 pi."""
        e = Ellipsoid.from_axes((0.0, 0.0), np.diag([2.0, 1.0]))
        assert e.volume == pytest.approx(2.0 * math.pi)
        assert e.contains([[1.9, 0.0], [0.0, 1.1]]).tolist() == [True, False]
        assert e.axes == pytest.approx(np.diag([2.0, 1.0]))

    def test_dilate(self):
        """Dilation by r scales the area by r^2."""
        e = Ellipsoid.from_axes((1.0, 2.0), np.eye(2))
        assert e.dilate(2.0).volume == pytest.approx(4.0 * math.pi)

    def test_shape_must_be_definite(self):
        """An indefinite shape matrix is rejected."""
        with pytest.raises(ParameterError):
            Ellipsoid(np.zeros(2), np.diag([1.0, -1.0]))

    def test_square_john_is_incircle(self):
        """The John ellipse of a square is its incircle."""
        e = john_ellipsoid(ConvexDomain.square(1.0))
        assert e.center == pytest.approx([0.0, 0.0], abs=1e-6)
        assert e.volume == pytest.approx(math.pi, rel=1e-6)
        assert john_containment(ConvexDomain.square(1.0), e).passed

    def test_triangle_area_ratio(self):
        """Equilateral triangles hold pi / (3 sqrt 3) of their area in the John ellipse."""
        domain = ConvexDomain(TRIANGLE)
        e = john_ellipsoid(domain)
        assert e.volume / domain.area == pytest.approx(math.pi / (3.0 * math.sqrt(3.0)), rel=1e-6)

    def test_john_is_a_local_maximum(self):
        """No nearby ellipse that fits in the pentagon has more area."""
        domain = ConvexDomain(PENTAGON)
        best = john_ellipsoid(domain)
        hp = domain.half_planes
        rng = np.random.default_rng(5)
        tried = 0
        while tried < 50:
            noise = rng.normal(scale=0.02, size=(2, 2))
            axes = best.axes + 0.5 * (noise + noise.T)
            center = best.center + rng.normal(scale=0.02, size=2)
            room = hp[:, 2] - hp[:, :2] @ center
            if np.any(room <= 0) or np.linalg.eigvalsh(axes)[0] <= 0:
                continue
            reach = np.linalg.norm(hp[:, :2] @ axes, axis=1)
            fitted = Ellipsoid.from_axes(center, float(np.min(room / reach)) * axes)
            assert fitted.volume <= best.volume * (1.0 + 1e-8)
            tried += 1

    def test_normalize_square(self):
        """Normalization sends the square to [-1, 1]^2."""
        report, image = normalize(ConvexDomain.square(3.0, center=(1.0, -2.0)))
        assert report.passed
        assert report.inner_radius == pytest.approx(1.0, abs=1e-6)
        assert report.outer_radius == pytest.approx(math.sqrt(2.0), abs=1e-6)
        assert image.area == pytest.approx(4.0, rel=1e-6)


class TestSectionExtraction:
    """Tests for extract_section and trace_section."""

    def test_grid_section_is_a_disk(self, paraboloid):
        """S(0, 1/8) of |x|^2/2 is the disk of radius 1/2."""
        sec = extract_section(paraboloid, (0.0, 0.0), 0.125)
        assert not sec.clipped
        assert sec.volume == pytest.approx(math.pi / 4.0, rel=0.02)
        assert sec.contains([[0.0, 0.0], [0.6, 0.0]]).tolist() == [True, False]

    def test_large_section_is_clipped(self, paraboloid):
        """A section reaching the boundary is marked clipped."""
        assert extract_section(paraboloid, (0.0, 0.0), 1.0).clipped

    def test_center_on_boundary(self, paraboloid):
        """Sections are centered at interior nodes."""
        with pytest.raises(DomainError):
            extract_section(paraboloid, (1.0, 1.0), 0.1)

    def test_height_must_be_positive(self, paraboloid):
        """h <= 0 is rejected."""
        with pytest.raises(ParameterError):
            extract_section(paraboloid, (0.0, 0.0), 0.0)

    def test_traced_round_section(self):
        """For eps = 1 the traced section of height 1/2 is the unit disk."""
        sec = trace_section(eccentric_quadratic(1.0), (0.0, 0.0), 0.5)
        assert sec.volume == pytest.approx(math.pi, rel=1e-3)
        assert sec.volume == pytest.approx(ellipse_section_volume(1.0, 0.5), rel=1e-3)
        assert not sec.clipped

    def test_affine_covariance(self):
        """Sections of u(T x) are the preimages under T of sections of u."""
        transform = np.array([[1.5, 0.4], [0.2, 0.8]])

        def u(points):
            p = np.asarray(points, dtype=float).reshape(-1, 2)
            return 0.5 * np.sum(p * p, axis=1) + 0.1 * p[:, 0] ** 4

        def v(points):
            return u(np.asarray(points, dtype=float).reshape(-1, 2) @ transform.T)

        y0 = np.array([0.2, -0.1])
        outer = trace_section(u, y0, 0.3)
        inner = trace_section(v, np.linalg.solve(transform, y0), 0.3)
        det = float(np.linalg.det(transform))
        assert inner.volume * det == pytest.approx(outer.volume, rel=5e-3)
        mapped = inner.polygon @ transform.T
        assert u(mapped) - outer.support(mapped) == pytest.approx(0.3, abs=1e-6)

    def test_traced_section_in_domain(self):
        """Rays stop at the domain boundary."""
        sec = trace_section(
            eccentric_quadratic(1.0), (0.0, 0.0), 0.5, domain=ConvexDomain.square(0.5)
        )
        assert sec.clipped
        assert sec.volume == pytest.approx(1.0, rel=1e-3)

    def test_closed_form_volumes(self):
        """|S| = 2 pi h / sqrt(det Q), independent of eccentricity."""
        assert quadratic_section_volume(np.diag([1.0, 4.0]), 1.0) == pytest.approx(math.pi)
        assert ellipse_section_volume(0.01, 0.3) == pytest.approx(0.6 * math.pi)


class TestSectionProbes:
    """Tests for the engulfing, inclusion, covering and size probes."""

    def test_volume_sweep(self, paraboloid):
        """|S(0, h)| / h is close to 2 pi at every height."""
        sweep = section_volume_sweep(paraboloid, (0.0, 0.0), [0.02, 0.05, 0.1], ratio_bound=1.1)
        assert sweep.passed
        for row in sweep.rows:
            assert row.ratio == pytest.approx(2.0 * math.pi, rel=0.05)

    def test_engulfing_of_paraboloid(self, paraboloid):
        """Round sections engulf with constant about 4."""
        report = engulfing_constant(paraboloid, [((0.0, 0.0), 0.05), ((0.1, 0.1), 0.05)])
        assert report.pairs > 0
        assert 2.0 <= report.theta <= 4.1

    def test_engulfing_needs_samples(self, paraboloid):
        """Every pair clipped means nothing to measure."""
        with pytest.raises(ParameterError):
            engulfing_constant(paraboloid, [((0.0, 0.0), 2.0)])

    def test_inclusion(self, paraboloid):
        """Sections of points of S(0, r t) stay inside S(0, s t)."""
        report = inclusion_exclusion_probe(paraboloid, (0.0, 0.0), 0.1, 0.25, 0.5, samples=10)
        assert report.passed
        assert report.inclusion_c > 0

    def test_inclusion_parameters(self, paraboloid):
        """r must be below s."""
        with pytest.raises(ParameterError):
            inclusion_exclusion_probe(paraboloid, (0.0, 0.0), 0.1, 0.5, 0.25)

    def test_vitali_selection(self, paraboloid):
        """The tallest section is chosen first and the family is covered."""
        family = [((0.1, 0.0), 0.04), ((0.0, 0.0), 0.05), ((-0.3, 0.2), 0.02)]
        selection = vitali_select(paraboloid, family)
        assert selection.chosen[0].center == pytest.approx([0.0, 0.0])
        assert selection.covered
        assert selection.dilation == pytest.approx(32.0)

    def test_vitali_empty_family(self, paraboloid):
        """An empty family is trivially covered."""
        assert vitali_select(paraboloid, []).covered

    def test_half_section_inclusion(self, paraboloid):
        """Round sections: inner slack 1/sqrt 2 - 1/2, outer slack 1 - 1/sqrt 2."""
        report = c1alpha_inclusion_probe(paraboloid, height=0.2)
        assert not report.flagged
        assert report.inner_delta == pytest.approx(1.0 / math.sqrt(2.0) - 0.5, abs=0.02)
        assert report.outer_delta == pytest.approx(1.0 - 1.0 / math.sqrt(2.0), abs=0.02)

    def test_theta(self, paraboloid):
        """Halving u - l on a quadratic needs theta = 1/sqrt 2."""
        report = theta_probe(paraboloid, 0.1)
        assert report.passed
        assert report.theta == pytest.approx(1.0 / math.sqrt(2.0), abs=0.02)

    def test_size_exponent(self, paraboloid):
        """Diameters of round sections scale like h^(1/2)."""
        report = section_size_exponent(paraboloid, (0.0, 0.0), [0.02, 0.05, 0.1, 0.2])
        assert report.mu == pytest.approx(0.5, abs=0.05)
        assert report.passed

    def test_size_exponent_needs_two_heights(self, paraboloid):
        """One height gives no slope."""
        with pytest.raises(ParameterError):
            section_size_exponent(paraboloid, (0.0, 0.0), [0.1])
