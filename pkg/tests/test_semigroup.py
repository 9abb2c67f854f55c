"""Tests for the discrete linear semigroup: operator assembly, evolution,
kernel probes, smoothing, and the kernel-bound invariants."""

import math

import numpy as np
import pytest
from scipy.special import j0, jn_zeros

from degenheat.errors import ConfigError
from degenheat.grids import Field, gaussian_field
from degenheat.semigroup import (apply_semigroup, boundary_leak, build_operator,
                                 kernel_column, semigroup_defect,
                                 smoothing_norm_check)

from conftest import axis_weight, line_grid, radial_grid, radial_weight


class TestBuildOperator:
    def test_classical_second_difference(self):
        g = line_grid(2.0, 9)
        op = build_operator(g, axis_weight(0.0))
        inv_dx2 = 1.0 / g.spacing ** 2
        assert np.allclose(op.diag[1:-1], -2.0 * inv_dx2)
        assert np.allclose(op.sup[1:], inv_dx2)
        assert np.allclose(op.sub[:-1][op.sub[:-1] != 0], inv_dx2)
        # Dirichlet rows are zero
        assert op.diag[0] == op.diag[-1] == 0.0

    def test_faces_straddle_degeneracy(self):
        g = line_grid(1.0, 9)
        op = build_operator(g, axis_weight(0.5))
        # both faces adjacent to x = 0 carry omega = (dx/2)^0.5 > 0
        expected = (g.spacing / 2.0) ** 0.5
        mid = g.nodes // 2
        assert op.face_weights[mid - 1] == pytest.approx(expected, rel=1e-12)
        assert op.face_weights[mid] == pytest.approx(expected, rel=1e-12)
        assert np.all(op.face_weights > 0.0)

    def test_sign_pattern_and_row_sums(self):
        for grid, weight in ((line_grid(2.0, 21), axis_weight(0.5)),
                             (radial_grid(2.0, 21, 2), radial_weight(0.3, 2))):
            op = build_operator(grid, weight)
            assert np.all(op.diag <= 0.0)
            assert np.all(op.sup >= 0.0) and np.all(op.sub >= 0.0)
            # interior row sums vanish (conservation in flux form)
            row_sums = op.apply(np.ones(grid.nodes))
            assert np.allclose(row_sums[1:-1], 0.0, atol=1e-10)

    def test_geometry_weight_mismatch(self):
        with pytest.raises(ConfigError):
            build_operator(line_grid(1.0, 5), axis_weight(0.5, 2))
        with pytest.raises(ConfigError):
            build_operator(radial_grid(1.0, 5, 2), axis_weight(0.5, 2))
        with pytest.raises(ConfigError):
            build_operator(radial_grid(1.0, 5, 2), radial_weight(0.5, 3))


class TestApplySemigroup:
    def test_identity_at_zero(self):
        g = line_grid(5.0, 101)
        op = build_operator(g, axis_weight(0.0))
        u0 = gaussian_field(g)
        out = apply_semigroup(op, u0, 0.0)
        assert np.array_equal(out.values, u0.values)

    def test_validation(self):
        g = line_grid(5.0, 101)
        op = build_operator(g, axis_weight(0.0))
        with pytest.raises(ConfigError):
            apply_semigroup(op, gaussian_field(g), -1.0)
        with pytest.raises(ConfigError):
            apply_semigroup(op, gaussian_field(line_grid(5.0, 51)), 1.0)

    def test_gaussian_oracle(self):
        # exact solution: amplitude shrinks by sigma/sqrt(sigma^2 + 2t)
        g = line_grid(15.0, 601)
        op = build_operator(g, axis_weight(0.0))
        u0 = gaussian_field(g, 1.0, 1.0)
        t = 1.0
        evolved = apply_semigroup(op, u0, t, tol=1e-5, scheme="cn")
        s2 = 1.0 + 2.0 * t
        exact = (1.0 / math.sqrt(s2)) * np.exp(-g.positions() ** 2 / (2.0 * s2))
        assert np.max(np.abs(evolved.values - exact)) <= 1e-3

    def test_mass_conservation_fixed_step(self):
        g = line_grid(40.0, 801)
        for alpha in (0.0, 0.5):
            op = build_operator(g, axis_weight(alpha))
            u0 = gaussian_field(g, 1.0, 1.0)
            out = apply_semigroup(op, u0, 2.0, n_steps=32)
            assert boundary_leak(out) < 1e-12
            assert out.mass() == pytest.approx(u0.mass(), rel=1e-10)

    def test_positivity(self):
        g = line_grid(10.0, 201)
        op = build_operator(g, axis_weight(0.5))
        u0 = gaussian_field(g, 1.0, 0.5)
        out = apply_semigroup(op, u0, 1.0, tol=1e-6)
        assert np.min(out.values) >= -1e-12 * u0.sup()

    def test_ordering(self):
        g = line_grid(10.0, 201)
        op = build_operator(g, axis_weight(0.3))
        small = gaussian_field(g, 0.5, 1.0)
        big = gaussian_field(g, 1.0, 1.5)
        a = apply_semigroup(op, small, 1.0, n_steps=64)
        b = apply_semigroup(op, big, 1.0, n_steps=64)
        assert np.all(a.values <= b.values + 1e-14)


class TestKernelColumn:
    def test_mass_one(self):
        g = line_grid(25.0, 1001)
        op = build_operator(g, axis_weight(0.5))
        probe = kernel_column(op, g.nodes // 2, 1.0, tol=1e-6)
        assert probe.mass() == pytest.approx(1.0, rel=1e-6)

    def test_classical_kernel_shape(self):
        g = line_grid(10.0, 1601)
        op = build_operator(g, axis_weight(0.0))
        t = 0.5
        assert t >= 10.0 * g.spacing ** 2
        probe = kernel_column(op, g.nodes // 2, t, tol=1e-7)
        exact = np.exp(-g.positions() ** 2 / (4.0 * t)) / math.sqrt(4.0 * math.pi * t)
        assert np.max(np.abs(probe.values - exact)) <= 0.02 * exact.max()

    def test_validation(self):
        g = line_grid(5.0, 11)
        op = build_operator(g, axis_weight(0.0))
        with pytest.raises(ConfigError):
            kernel_column(op, 0, 0.0)
        with pytest.raises(ConfigError):
            kernel_column(op, 99, 1.0)


class TestSemigroupDefect:
    def test_halves_under_refinement(self):
        g = line_grid(15.0, 601)
        op = build_operator(g, axis_weight(0.0))
        u0 = gaussian_field(g)
        defects = [semigroup_defect(op, u0, 1.0, 0.5, n_steps=n) for n in (16, 32, 64)]
        for coarse, fine in zip(defects, defects[1:]):
            assert math.log2(coarse / fine) >= 0.9

    def test_split_symmetry(self):
        g = line_grid(15.0, 601)
        op = build_operator(g, axis_weight(0.5))
        u0 = gaussian_field(g)
        d2 = semigroup_defect(op, u0, 1.0, 0.5, n_steps=64)
        d4 = semigroup_defect(op, u0, 1.0, 0.25, n_steps=64)
        assert 0.5 <= d2 / d4 <= 2.0

    def test_validation(self):
        g = line_grid(5.0, 11)
        op = build_operator(g, axis_weight(0.0))
        with pytest.raises(ConfigError):
            semigroup_defect(op, gaussian_field(g), 1.0, 1.5)


class TestSmoothing:
    def test_contraction_case(self):
        g = line_grid(30.0, 601)
        op = build_operator(g, axis_weight(0.5))
        u0 = gaussian_field(g)
        for t in (0.5, 2.0, 20.0):
            assert smoothing_norm_check(op, u0, t, 2.0, 2.0) <= 1.0 + 1e-6
            assert smoothing_norm_check(op, u0, t, math.inf, math.inf) <= 1.0 + 1e-6

    def test_classical_constant(self):
        # q1=1, q2=inf, alpha=0, delta-like data: ratio -> (4 pi)^{-1/2}
        g = line_grid(40.0, 3201)
        op = build_operator(g, axis_weight(0.0))
        t = 2.0
        probe = kernel_column(op, g.nodes // 2, t, tol=1e-7)
        # probe has unit mass, so sup * t^{1/2} is the smoothing ratio
        ratio = probe.sup() * math.sqrt(t)
        assert ratio == pytest.approx(1.0 / math.sqrt(4.0 * math.pi), rel=0.01)

    def test_bounded_ratio_over_decade(self):
        g = line_grid(120.0, 2401)
        ts = np.geomspace(1.0, 100.0, 8)
        for alpha in (0.0, 0.5):
            op = build_operator(g, axis_weight(alpha))
            u0 = gaussian_field(g, 1.0, 0.5)
            ratios = [smoothing_norm_check(op, u0, t, 1.0, math.inf) for t in ts]
            slope = np.polyfit(np.log(ts), np.log(ratios), 1)[0]
            assert abs(slope) <= 0.05

    def test_validation(self):
        g = line_grid(5.0, 11)
        op = build_operator(g, axis_weight(0.0))
        with pytest.raises(ConfigError):
            smoothing_norm_check(op, gaussian_field(g), 1.0, 3.0, 2.0)
        with pytest.raises(ConfigError):
            smoothing_norm_check(op, gaussian_field(g), 0.0, 1.0, 2.0)


class TestKernelBoundInvariants:
    def test_lower_bound_lemma(self):
        # min over |x| <= t^{1/(2-a)} of S(t)u0 / (t^{-1/(2-a)} window integral)
        # stays positive with near-zero log-log slope across a decade
        for alpha in (0.0, 0.5):
            g = line_grid(60.0, 1201)
            op = build_operator(g, axis_weight(alpha))
            u0 = gaussian_field(g, 1.0, 1.0)
            se = 2.0 - alpha
            ts = np.geomspace(2.0, 20.0, 6)
            kappas = []
            for t in ts:
                evolved = apply_semigroup(op, u0, t, tol=1e-6)
                rad = t ** (1.0 / se)
                inside = g.radii() <= rad
                denom = t ** (-1.0 / se) * u0.window_mass(rad)
                kappas.append(evolved.values[inside].min() / denom)
            assert min(kappas) > 0.0
            slope = np.polyfit(np.log(ts), np.log(kappas), 1)[0]
            assert abs(slope) <= 0.1

    def test_jensen_property(self):
        g = line_grid(30.0, 601)
        op = build_operator(g, axis_weight(0.5))
        u0 = gaussian_field(g, 2.0, 1.5)
        convex = [lambda s: s ** 2, lambda s: (1.0 + s) * np.log1p(s) ** 2]
        for f in convex:
            lhs = apply_semigroup(op, u0, 1.0, n_steps=64)
            rhs = apply_semigroup(op, Field(g, f(u0.values)), 1.0, n_steps=64)
            scale = float(np.max(f(u0.values)))
            assert np.max(f(lhs.values) - rhs.values) <= 1e-8 * scale

    def test_bessel_mode_radial_oracle(self):
        # N=2 disk, alpha=0: the first Bessel mode decays at rate j01^2
        lam0 = jn_zeros(0, 1)[0]
        g = radial_grid(1.0, 161, 2)
        op = build_operator(g, radial_weight(0.0, 2))
        u0 = Field(g, j0(lam0 * g.positions()))
        a = apply_semigroup(op, u0, 0.05, n_steps=400, scheme="cn")
        b = apply_semigroup(op, u0, 0.10, n_steps=800, scheme="cn")
        rate = math.log(a.sup() / b.sup()) / 0.05
        assert rate == pytest.approx(lam0 ** 2, rel=0.02)


class TestBoundaryLeak:
    def test_monitor(self):
        g = line_grid(8.0, 161)
        op = build_operator(g, axis_weight(0.0))
        narrow = apply_semigroup(op, gaussian_field(g, 1.0, 0.5), 0.1, tol=1e-6)
        wide = apply_semigroup(op, gaussian_field(g, 1.0, 0.5), 50.0, tol=1e-4)
        assert boundary_leak(narrow) < 1e-12
        assert boundary_leak(wide) > boundary_leak(narrow)
