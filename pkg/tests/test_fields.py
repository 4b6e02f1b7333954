"""Grid, field, projection, scaling, and snapshot-file contracts."""

import numpy as np
import pytest

from nslab import (
    AnalyticField,
    Ball,
    GridSpec,
    ScalarField,
    SpectralField,
    leray_project,
    read_snapshot,
    scale_field,
    write_snapshot,
)
from nslab.errors import BallTooLarge, DomainExceeded
from nslab.field import inner_product
from nslab.geometry import AnnulusDecomposition, ParabolicCylinder
from nslab.quadrature import sample_on_ball


@pytest.fixture(scope="module")
def grid():
    return GridSpec(box_length=2 * np.pi, resolution=32)


def single_mode(grid, axis_of=1, axis_in=0, amp=1.0):
    X = grid.mesh
    comps = [np.zeros_like(X[0]) for _ in range(3)]
    comps[axis_in] = amp * np.sin(X[axis_of])
    return SpectralField.from_physical(grid, np.stack(comps))


class TestGridSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            GridSpec(resolution=7)
        with pytest.raises(ValueError):
            GridSpec(resolution=48)  # not a power of two
        with pytest.raises(ValueError):
            GridSpec(box_length=-1.0)
        with pytest.raises(ValueError):
            GridSpec(dealias_fraction=0.0)

    def test_wavenumbers(self, grid):
        k1 = grid.wavenumbers_1d
        assert k1[0] == 0.0
        assert k1[1] == pytest.approx(1.0)
        assert grid.dealias_mask[0, 0, 0]
        assert not grid.dealias_mask[grid.resolution // 2, 0, 0]

    def test_min_image(self, grid):
        L = grid.box_length
        d = grid.min_image(np.array([L - 0.1, 0.0, 0.0]), (0.0, 0.0, 0.0))
        assert d[0] == pytest.approx(-0.1)


class TestLerayProjection:
    def test_pure_gradient_projects_to_zero(self, grid):
        X = grid.mesh
        v = SpectralField.from_physical(
            grid, np.stack([np.cos(X[0]), np.zeros_like(X[0]), np.zeros_like(X[0])]))
        pv = leray_project(v)
        assert np.max(np.abs(pv.physical)) < 1e-13

    def test_divergence_free_unchanged(self, grid):
        v = single_mode(grid)
        pv = leray_project(v)
        assert np.max(np.abs(pv.physical - v.physical)) < 1e-13

    def test_split_mixed_field(self, grid):
        X = grid.mesh
        z = np.zeros_like(X[0])
        v = SpectralField.from_physical(grid, np.stack([np.sin(X[0]) + np.sin(X[1]), z, z]))
        pv = leray_project(v)
        expect = np.stack([np.sin(X[1]), z, z])
        assert np.max(np.abs(pv.physical - expect)) < 1e-12

    def test_idempotent(self, grid):
        rng = np.random.default_rng(7)
        samples = rng.standard_normal((3, 32, 32, 32))
        v = SpectralField.from_physical(grid, samples)
        p1 = leray_project(v)
        p2 = leray_project(p1)
        scale = np.max(np.abs(p1.coeffs))
        assert np.max(np.abs(p2.coeffs - p1.coeffs)) / scale < 1e-14

    def test_orthogonal(self, grid):
        rng = np.random.default_rng(8)
        v = SpectralField.from_physical(grid, rng.standard_normal((3, 32, 32, 32)))
        pv = leray_project(v)
        resid = SpectralField(grid, v.coeffs - pv.coeffs)
        denom = inner_product(v, v)
        assert abs(inner_product(pv, resid)) / denom < 1e-12

    def test_divergence_invariant(self, grid):
        rng = np.random.default_rng(9)
        v = SpectralField.from_physical(grid, rng.standard_normal((3, 32, 32, 32)))
        pv = leray_project(v)
        assert pv.divergence_residual() < 1e-12

    def test_mean_flow_preserved(self, grid):
        samples = np.ones((3, 32, 32, 32)) * np.array([1.0, 2.0, -0.5])[:, None, None, None]
        v = SpectralField.from_physical(grid, samples)
        pv = leray_project(v)
        assert np.allclose(pv.physical, samples)


class TestRoundTrip:
    def test_physical_spectral_physical(self, grid):
        rng = np.random.default_rng(11)
        coeffs = np.zeros((3, 32, 32, 32), dtype=complex)
        # band-limited random field via masked white noise, symmetrized
        raw = rng.standard_normal((3, 32, 32, 32))
        v = SpectralField.from_physical(grid, raw)
        masked = SpectralField(grid, v.coeffs * grid.dealias_mask)
        samples = masked.physical
        again = SpectralField.from_physical(grid, samples).physical
        assert np.max(np.abs(again - samples)) / np.max(np.abs(samples)) < 1e-12

    def test_hermitian_defect(self, grid):
        v = single_mode(grid)
        assert v.hermitian_defect() < 1e-14


class TestScaleField:
    def test_identity(self, grid):
        v = single_mode(grid)
        s = scale_field(v, 1.0)
        assert np.allclose(s.physical, v.physical)

    def test_minus_one_homogeneous_invariant(self):
        f = AnalyticField(lambda x, t: x / np.maximum(
            np.sum(x * x, axis=-1), 1e-300)[..., None])
        s = scale_field(f, 2.0)
        pts = np.array([[0.3, 0.5, -0.7], [1.0, 0.0, 0.0]])
        assert np.allclose(s.eval_at(pts), f.eval_at(pts), atol=1e-14)

    def test_analytic_pointwise(self):
        f = AnalyticField(lambda x, t: np.stack(
            [np.sin(x[..., 0]), np.zeros_like(x[..., 0]), np.zeros_like(x[..., 0])], axis=-1))
        s = scale_field(f, 2.0)
        val = s.eval_at(np.array([np.pi / 4, 0.0, 0.0]))
        assert val[0] == pytest.approx(2.0)

    def test_spectral_scaling_matches_pointwise(self, grid):
        v = single_mode(grid)
        s = scale_field(v, 2.0)
        pts = np.array([[0.3, 0.7, 0.1], [1.1, 2.2, 0.5]])
        expect = 2.0 * np.sin(2.0 * pts[:, 1])
        assert np.allclose(s.eval_at(pts)[:, 0], expect, atol=1e-12)

    def test_composition(self, grid):
        v = single_mode(grid)
        a = scale_field(scale_field(v, 2.0), 2.0)
        b = scale_field(v, 4.0)
        assert np.allclose(a.coeffs, b.coeffs)
        f = AnalyticField(lambda x, t: np.stack(
            [np.cos(x[..., 2]), np.zeros_like(x[..., 0]), np.zeros_like(x[..., 0])], axis=-1))
        pts = np.array([[0.2, 0.4, 0.6]])
        ab = scale_field(scale_field(f, 1.5), 2.0)
        c = scale_field(f, 3.0)
        assert np.allclose(ab.eval_at(pts), c.eval_at(pts))

    def test_out_of_band_rejected(self, grid):
        X = grid.mesh
        z = np.zeros_like(X[0])
        v = SpectralField.from_physical(grid, np.stack([np.sin(12 * X[1]), z, z]))
        with pytest.raises(DomainExceeded):
            scale_field(v, 2.0)


class TestBallQuadrature:
    def test_unit_ball_volume(self):
        one = AnalyticField(lambda x, t: np.ones(x.shape[:-1]), components=1)
        s = sample_on_ball(one, Ball((0.0, 0.0, 0.0), 1.0))
        assert s.integral == pytest.approx(4.0 * np.pi / 3.0, abs=1e-6)

    def test_zero_field(self):
        zero = AnalyticField(lambda x, t: np.zeros(x.shape[:-1]), components=1)
        s = sample_on_ball(zero, Ball((0.0, 0.0, 0.0), 1.0))
        assert s.integral == 0.0

    def test_radial_quadratic(self):
        # integral over B_1(x0) of |x - x0|^2 = 4 pi / 5
        x0 = np.array([0.5, -0.25, 1.0])
        f = AnalyticField(lambda x, t: np.sum((x - x0) ** 2, axis=-1), components=1)
        s = sample_on_ball(f, Ball(tuple(x0), 1.0))
        assert s.integral == pytest.approx(4.0 * np.pi / 5.0, rel=1e-10)

    def test_ball_too_large(self, grid):
        one = AnalyticField(lambda x, t: np.ones(x.shape[:-1]), components=1)
        with pytest.raises(BallTooLarge):
            sample_on_ball(one, Ball((0.0, 0.0, 0.0), 0.51 * grid.box_length), grid=grid)

    def test_grid_route_constant(self, grid):
        ones = ScalarField.from_physical(grid, np.ones((32, 32, 32)))
        ball = Ball((np.pi, np.pi, np.pi), 1.0)
        s = sample_on_ball(ones, ball)
        assert abs(s.integral - ball.volume) <= s.quadrature_error + 1e-12


class TestGeometry:
    def test_cylinder(self):
        c = ParabolicCylinder((0.0, 0.0, 0.0), 1.0, 0.5)
        assert c.t_start == pytest.approx(0.75)
        assert c.volume == pytest.approx(4.0 / 3.0 * np.pi * 0.5 ** 5)
        with pytest.raises(ValueError):
            ParabolicCylinder((0.0, 0.0, 0.0), 0.0, -1.0)

    def test_annulus_decomposition_disjoint_union(self):
        d = AnnulusDecomposition(-2, 3)
        shells = d.shells
        for (k1, s1), (k2, s2) in zip(shells, shells[1:]):
            assert s1.outer == pytest.approx(s2.inner)
        assert shells[0][1].inner == pytest.approx(2.0 ** (d.k_min - 1))
        assert shells[-1][1].outer == pytest.approx(2.0 ** d.k_max)

    def test_for_grid_defaults(self, grid):
        d = AnnulusDecomposition.for_grid(grid)
        assert 2.0 ** (d.k_min - 1) >= 2.0 * grid.cell
        assert 2.0 ** d.k_max <= grid.box_length / 2.0


class TestSnapshotIO:
    def test_bit_exact_roundtrip(self, grid, tmp_path):
        rng = np.random.default_rng(3)
        v = SpectralField.from_physical(grid, rng.standard_normal((3, 32, 32, 32)), time=0.25)
        p1 = tmp_path / "a.snap"
        p2 = tmp_path / "b.snap"
        write_snapshot(p1, v)
        loaded = read_snapshot(p1)
        write_snapshot(p2, loaded)
        assert p1.read_bytes() == p2.read_bytes()
        assert loaded.time == 0.25
        assert np.array_equal(loaded.physical, v.physical)

    def test_scalar_roundtrip(self, grid, tmp_path):
        rng = np.random.default_rng(4)
        f = ScalarField.from_physical(grid, rng.standard_normal((32, 32, 32)), time=1.5)
        p = tmp_path / "s.snap"
        write_snapshot(p, f)
        g = read_snapshot(p)
        assert isinstance(g, ScalarField)
        assert np.array_equal(g.physical, f.physical)
