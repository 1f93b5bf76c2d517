import json
import math

import numpy as np
import pytest

from fracwave.spectral import (
    ModeCoefficients,
    build_interval,
    build_rectangle,
    coeffs_from_csv,
    coeffs_to_csv,
    domain_from_config,
    domain_to_config,
    eval_modes,
    frac_power_norm,
    pairwise_sum,
    project,
    synthesize,
    tail_stabilizes,
)


class TestInterval:
    def test_first_eigenvalue(self):
        d = build_interval(1.0, 4)
        assert abs(d.eigenvalues[0] - math.pi**2) < 1e-12

    def test_scaling(self):
        d = build_interval(2.0, 4)
        assert abs(d.eigenvalues[0] - math.pi**2 / 4.0) < 1e-12

    def test_normalization(self):
        d = build_interval(1.0, 1)
        E = eval_modes(d, d.quad_points)
        norm = math.sqrt(float((E[0] ** 2 * d.quad_weights).sum()))
        assert abs(norm - 1.0) < 1e-12

    def test_orthonormality(self):
        d = build_interval(1.0, 64)
        E = eval_modes(d, d.quad_points)
        gram = (E * d.quad_weights) @ E.T
        assert np.max(np.abs(gram - np.eye(64))) < 1e-10

    def test_normal_derivatives(self):
        d = build_interval(1.0, 3)
        amp = math.sqrt(2.0)
        assert abs(d.boundary_normal_deriv[0, 0] + amp * math.pi) < 1e-12
        assert abs(d.boundary_normal_deriv[0, 1] - amp * math.pi * math.cos(math.pi)) < 1e-12

    def test_validation(self):
        with pytest.raises(ValueError):
            build_interval(-1.0, 4)
        with pytest.raises(ValueError):
            build_interval(1.0, 0)


class TestRectangle:
    def test_first_eigenvalue(self):
        r = build_rectangle(1.0, 1.0, 4)
        assert abs(r.eigenvalues[0] - 2.0 * math.pi**2) < 1e-10

    def test_degenerate_pair_lexicographic(self):
        r = build_rectangle(1.0, 1.0, 4)
        assert abs(r.eigenvalues[1] - 5.0 * math.pi**2) < 1e-10
        assert abs(r.eigenvalues[2] - 5.0 * math.pi**2) < 1e-10
        assert tuple(r.mode_index[1]) == (1, 2)
        assert tuple(r.mode_index[2]) == (2, 1)

    def test_sorted_for_hundred_modes(self):
        r = build_rectangle(1.0, 2.0, 100)
        assert np.all(np.diff(r.eigenvalues) >= -1e-12)
        assert r.mode_count == 100

    def test_orthonormality(self):
        r = build_rectangle(1.0, 1.5, 16)
        E = eval_modes(r, r.quad_points)
        gram = (E * r.quad_weights) @ E.T
        assert np.max(np.abs(gram - np.eye(16))) < 1e-10

    def test_boundary_normal_derivative(self):
        r = build_rectangle(1.0, 1.0, 4)
        i = int(np.argmin(np.sum((r.boundary_points - np.array([0.0, 0.5])) ** 2, axis=1)))
        y = r.boundary_points[i, 1]
        expected = -2.0 * math.pi * math.sin(math.pi * y)
        assert abs(r.boundary_normal_deriv[0, i] - expected) < 1e-10


class TestProject:
    def test_eigenfunction_projection(self):
        d = build_interval(1.0, 8)
        c = project(d, lambda x: math.sqrt(2.0) * np.sin(3.0 * math.pi * x))
        assert abs(c[2] - 1.0) < 1e-10
        assert np.max(np.abs(np.delete(c, 2))) < 1e-10

    def test_poly_bump_coefficients(self):
        # analytic sine transform of x(1-x): 4 sqrt(2)/(n pi)^3 on odd modes
        d = build_interval(1.0, 16)
        c = project(d, lambda x: x * (1.0 - x))
        n = np.arange(1, 17)
        ref = np.where(n % 2 == 1, 4.0 * math.sqrt(2.0) / (n * math.pi) ** 3, 0.0)
        assert np.max(np.abs(c - ref)) < 1e-12

    def test_zero(self):
        d = build_interval(1.0, 8)
        assert np.max(np.abs(project(d, lambda x: 0.0 * x))) == 0.0

    def test_non_finite_rejected(self):
        d = build_interval(1.0, 4)
        bad = np.full(d.quad_points.shape[0], np.nan)
        with pytest.raises(ValueError):
            project(d, bad)

    def test_rectangle_projection(self):
        r = build_rectangle(1.0, 1.0, 6)
        c = project(r, lambda x, y: 2.0 * np.sin(math.pi * x) * np.sin(2.0 * math.pi * y))
        k = next(i for i, jk in enumerate(r.mode_index) if tuple(jk) == (1, 2))
        assert abs(c[k] - 1.0) < 1e-10


class TestSynthesize:
    def test_single_mode_midpoint(self):
        d = build_interval(1.0, 4)
        c = np.array([1.0, 0.0, 0.0, 0.0])
        val = synthesize(d, c, np.array([0.5]))
        assert abs(val[0] - math.sqrt(2.0)) < 1e-13

    def test_roundtrip(self):
        d = build_interval(1.0, 32)
        rng = np.random.default_rng(2)
        c = rng.standard_normal(32)
        back = project(d, synthesize(d, c, d.quad_points))
        assert np.max(np.abs(back - c)) < 1e-9

    def test_boundary_zero(self):
        d = build_interval(1.0, 16)
        c = np.random.default_rng(3).standard_normal(16)
        vals = synthesize(d, c, np.array([0.0, 1.0]))
        assert np.max(np.abs(vals)) < 1e-12

    def test_outside_domain_rejected(self):
        d = build_interval(1.0, 4)
        with pytest.raises(ValueError):
            synthesize(d, np.ones(4), np.array([1.5]))

    def test_parseval(self):
        d = build_interval(1.0, 32)
        c = np.random.default_rng(4).standard_normal(32)
        vals = synthesize(d, c, d.quad_points)
        quad_norm = math.sqrt(float((vals**2 * d.quad_weights).sum()))
        assert abs(quad_norm - float(np.linalg.norm(c))) < 1e-9


class TestFracPowerNorm:
    def test_theta_zero_is_euclidean(self):
        d = build_interval(1.0, 8)
        c = np.random.default_rng(5).standard_normal(8)
        assert abs(frac_power_norm(d, c, 0.0) - np.linalg.norm(c)) < 1e-13

    def test_single_mode_half_powers(self):
        d = build_interval(1.0, 4)
        c = np.array([1.0, 0.0, 0.0, 0.0])
        assert abs(frac_power_norm(d, c, 0.5) - math.pi) < 1e-12
        assert abs(frac_power_norm(d, c, -0.5) - 1.0 / math.pi) < 1e-12

    def test_theta_range(self):
        d = build_interval(1.0, 4)
        with pytest.raises(ValueError):
            frac_power_norm(d, np.ones(4), 1.5)

    def test_monotone_in_theta(self):
        # all eigenvalues exceed one on the unit interval
        d = build_interval(1.0, 16)
        c = np.random.default_rng(6).standard_normal(16)
        thetas = np.linspace(-1.0, 1.0, 9)
        vals = [frac_power_norm(d, c, t) for t in thetas]
        assert np.all(np.diff(vals) > 0)

    def test_duality_sandwich(self):
        d = build_interval(1.0, 16)
        rng = np.random.default_rng(7)
        for _ in range(10):
            c = rng.standard_normal(16)
            lhs = frac_power_norm(d, c, -0.3) * frac_power_norm(d, c, 0.3)
            assert lhs >= np.dot(c, c) * (1.0 - 1e-12)
        single = np.zeros(16)
        single[4] = 2.0
        lhs = frac_power_norm(d, single, -0.3) * frac_power_norm(d, single, 0.3)
        assert abs(lhs - np.dot(single, single)) < 1e-10


class TestHelpers:
    def test_pairwise_sum_matches_numpy(self):
        rng = np.random.default_rng(8)
        a = rng.standard_normal((37, 5))
        assert np.allclose(pairwise_sum(a, axis=0), a.sum(axis=0), atol=1e-12)

    def test_tail_stabilizes(self):
        n = np.arange(1, 257, dtype=float)
        assert tail_stabilizes(n**-2.0)
        assert not tail_stabilizes(np.ones(256))

    def test_mode_coefficients_validation(self):
        with pytest.raises(ValueError):
            ModeCoefficients(np.ones(4), np.ones(5))
        with pytest.raises(ValueError):
            ModeCoefficients(np.array([np.inf]), np.array([0.0]))

    def test_scaling(self):
        mc = ModeCoefficients(np.array([1.0, 2.0]), np.array([0.0, 1.0]))
        scaled = mc.scaled(3.0)
        assert np.array_equal(scaled.a, [3.0, 6.0])


class TestSerialization:
    def test_domain_config_roundtrip(self):
        d = build_rectangle(1.0, 2.0, 12)
        cfg = domain_to_config(d)
        back = domain_from_config(json.loads(json.dumps(cfg)))
        assert np.allclose(back.eigenvalues, d.eigenvalues)
        assert back.kind == d.kind

    def test_coeffs_csv_roundtrip(self, tmp_path):
        mc = ModeCoefficients(np.array([0.5, -1.25, 3.0]), np.array([0.0, 2.0, -7.5]))
        fname = str(tmp_path / "coeffs.csv")
        coeffs_to_csv(mc, fname)
        back = coeffs_from_csv(fname)
        assert np.array_equal(back.a, mc.a)
        assert np.array_equal(back.b, mc.b)
