import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracwave.fracops import (
    KernelPhi,
    SampledPath,
    TimeGrid,
    caputo_derivative,
    caputo_first_order,
    frac_integral,
    frac_integral_inverse,
    gagliardo_seminorm,
    l2_time_norm,
    norm_equivalence_study,
    path_from_csv,
    path_to_csv,
    semigroup_check,
    sobolev_norm,
    young_bound_check,
)
from fracwave.mittag_leffler import gamma
from oracles import gagliardo_linear_ref

# reference value of the half-order integral of sin(2 pi t) at t = 0.75
# (oracles.frac_integral_ref, adaptive quadrature; cross-checked by series)
I_HALF_SIN_AT_0P75 = -0.18113655610647125

GRID = TimeGrid(1.0, 512)


def trig_path(grid, seed, modes=8):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(modes)
    t = grid.nodes
    vals = np.zeros_like(t)
    for k in range(modes):
        vals += c[k] * np.sin((k + 1) * math.pi * t / grid.t_end)
    return SampledPath(grid, vals)


class TestTypes:
    def test_grid_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 16)
        with pytest.raises(ValueError):
            TimeGrid(1.0, 1)

    def test_grid_nodes(self):
        g = TimeGrid(2.0, 4)
        assert np.allclose(g.nodes, [0.0, 0.5, 1.0, 1.5, 2.0])
        assert g.spacing == 0.5

    def test_kernel(self):
        phi = KernelPhi(0.5)
        t = np.array([0.25, 1.0])
        assert np.allclose(phi(t), t ** (-0.5) / gamma(0.5))
        assert abs(phi.l1_norm(1.0) - 1.0 / gamma(1.5)) < 1e-15
        with pytest.raises(ValueError):
            KernelPhi(0.0)

    def test_path_validation(self):
        with pytest.raises(ValueError):
            SampledPath(GRID, np.ones(7))
        with pytest.raises(ValueError):
            SampledPath(GRID, np.full(GRID.steps + 1, np.nan))


class TestFracIntegral:
    def test_beta_one_is_cumulative_trapezoid(self):
        f = trig_path(GRID, 0)
        out = frac_integral(f, 1.0)
        h = GRID.spacing
        ref = np.concatenate([[0.0], np.cumsum(0.5 * h * (f.values[1:] + f.values[:-1]))])
        assert np.max(np.abs(out.values - ref)) < 1e-13

    @pytest.mark.parametrize("beta", [0.3, 0.5, 0.9])
    def test_constant_image(self, beta):
        out = frac_integral(SampledPath(GRID, np.ones(GRID.steps + 1)), beta)
        ref = GRID.nodes**beta / gamma(beta + 1.0)
        assert np.max(np.abs(out.values[1:] - ref[1:]) / ref[1:]) < 1e-12

    def test_zero_path(self):
        out = frac_integral(SampledPath(GRID, np.zeros(GRID.steps + 1)), 0.5)
        assert np.all(out.values == 0.0)
        assert out.values[0] == 0.0

    def test_against_quadrature_oracle(self):
        g = TimeGrid(1.0, 1024)
        f = SampledPath(g, np.sin(2.0 * math.pi * g.nodes))
        out = frac_integral(f, 0.5)
        i = 768  # node at exactly t = 0.75
        assert g.nodes[i] == 0.75
        assert abs(out.values[i] - I_HALF_SIN_AT_0P75) < 1e-5

    def test_domain_error(self):
        with pytest.raises(ValueError):
            frac_integral(trig_path(GRID, 0), 0.0)
        with pytest.raises(ValueError):
            frac_integral(trig_path(GRID, 0), 1.2)

    @given(a=st.floats(-3.0, 3.0), b=st.floats(-3.0, 3.0))
    def test_linearity(self, a, b):
        f = trig_path(GRID, 1)
        g = trig_path(GRID, 2)
        combo = SampledPath(GRID, a * f.values + b * g.values)
        lhs = frac_integral(combo, 0.4).values
        rhs = a * frac_integral(f, 0.4).values + b * frac_integral(g, 0.4).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-11 * (1.0 + np.max(np.abs(rhs)))

    def test_positivity(self):
        rng = np.random.default_rng(5)
        f = SampledPath(GRID, rng.uniform(0.0, 1.0, GRID.steps + 1))
        assert np.all(frac_integral(f, 0.5).values >= 0.0)

    def test_vector_valued(self):
        f = trig_path(GRID, 3)
        stacked = SampledPath(GRID, np.stack([f.values, 2.0 * f.values], axis=1))
        out = frac_integral(stacked, 0.5)
        single = frac_integral(f, 0.5).values
        assert np.allclose(out.values[:, 0], single)
        assert np.allclose(out.values[:, 1], 2.0 * single)


class TestCaputo:
    def test_linear_function_vanishes(self):
        # f(t) = t has zero second derivative
        out = caputo_derivative(SampledPath(GRID, np.zeros(GRID.steps + 1)), 1.5)
        assert np.max(np.abs(out.values)) <= 1e-12

    @pytest.mark.parametrize("alpha", [1.25, 1.5, 1.75])
    def test_quadratic(self, alpha):
        out = caputo_derivative(SampledPath(GRID, np.full(GRID.steps + 1, 2.0)), alpha)
        ref = 2.0 * GRID.nodes ** (2.0 - alpha) / gamma(3.0 - alpha)
        assert np.max(np.abs(out.values[1:] - ref[1:]) / ref[1:]) < 1e-12

    def test_cubic(self):
        # f = t^3 has f'' = 6t, and the rule is exact on linear input
        alpha = 1.4
        out = caputo_derivative(SampledPath(GRID, 6.0 * GRID.nodes), alpha)
        ref = 6.0 * GRID.nodes ** (3.0 - alpha) / gamma(4.0 - alpha)
        assert np.max(np.abs(out.values[1:] - ref[1:]) / ref[1:]) < 1e-10

    @pytest.mark.parametrize("alpha", [1.0, 2.0, 0.5])
    def test_order_domain(self, alpha):
        with pytest.raises(ValueError):
            caputo_derivative(SampledPath(GRID, np.ones(GRID.steps + 1)), alpha)

    def test_first_order_branch(self):
        # f = t^2 with f' = 2t: derivative of order a in (0,1) is
        # 2 t^(2-a)/Gamma(3-a), exact for the linear integrand
        alpha = 0.4
        out = caputo_first_order(SampledPath(GRID, 2.0 * GRID.nodes), alpha)
        ref = 2.0 * GRID.nodes ** (2.0 - alpha) / gamma(3.0 - alpha)
        assert np.max(np.abs(out.values[1:] - ref[1:]) / ref[1:]) < 1e-10


class TestYoungBound:
    def test_constant(self):
        lhs, rhs = young_bound_check(SampledPath(GRID, np.ones(GRID.steps + 1)), 0.5)
        assert lhs < rhs

    def test_zero(self):
        lhs, rhs = young_bound_check(SampledPath(GRID, np.zeros(GRID.steps + 1)), 0.5)
        assert lhs == 0.0 and rhs == 0.0

    def test_random_ensemble(self):
        for seed in range(100):
            f = trig_path(TimeGrid(1.0, 128), seed)
            lhs, rhs = young_bound_check(f, 0.5)
            assert lhs <= rhs * (1.0 + 1e-3)


class TestSemigroup:
    def test_refinement(self):
        discs = []
        for M in (1024, 4096):
            g = TimeGrid(1.0, M)
            discs.append(semigroup_check(SampledPath(g, g.nodes), 0.5, 0.5))
        assert discs[0] <= 1e-2
        assert discs[1] <= 0.5 * discs[0]

    def test_analytic_composition(self):
        # I^0.3 I^0.4 applied to 1 must approach t^0.7/Gamma(1.7); the inner
        # image has infinite slope at the origin, so compare away from it
        g = TimeGrid(1.0, 1024)
        composed = frac_integral(frac_integral(SampledPath(g, np.ones(g.steps + 1)), 0.4), 0.3)
        ref = g.nodes**0.7 / gamma(1.7)
        sel = g.nodes >= 0.1
        assert np.max(np.abs(composed.values[sel] - ref[sel]) / ref[sel]) < 1e-3

    def test_zero_path(self):
        assert semigroup_check(SampledPath(GRID, np.zeros(GRID.steps + 1)), 0.5, 0.5) == 0.0

    def test_order_sum_gate(self):
        with pytest.raises(ValueError):
            semigroup_check(trig_path(GRID, 0), 1.0, 0.5)

    def test_empirical_order_at_least_one(self):
        errs = []
        for M in (256, 512, 1024):
            g = TimeGrid(1.0, M)
            errs.append(semigroup_check(SampledPath(g, g.nodes), 0.5, 0.5))
        order = np.polyfit(np.log([1 / 256, 1 / 512, 1 / 1024]), np.log(errs), 1)[0]
        assert order >= 1.0


class TestGagliardo:
    def test_constant_path(self):
        v = SampledPath(GRID, np.full(GRID.steps + 1, 3.7))
        assert gagliardo_seminorm(v, 0.25) == 0.0

    def test_linear_against_closed_form(self):
        v = SampledPath(GRID, GRID.nodes)
        ref = gagliardo_linear_ref(0.25, 1.0)
        assert abs(gagliardo_seminorm(v, 0.25) - ref) < 1e-3 * ref

    def test_half_order_linear(self):
        v = SampledPath(GRID, GRID.nodes)
        assert abs(gagliardo_seminorm(v, 0.5) - 1.0) < 1e-3

    def test_image_of_rough_path_finite(self):
        rng = np.random.default_rng(9)
        u = SampledPath(GRID, rng.standard_normal(GRID.steps + 1))
        v = frac_integral(u, 0.25)
        val = gagliardo_seminorm(v, 0.25)
        assert math.isfinite(val) and val > 0
        assert v.values[0] == 0.0

    def test_domain(self):
        with pytest.raises(ValueError):
            gagliardo_seminorm(SampledPath(GRID, GRID.nodes), 1.0)

    @given(scale=st.floats(-5.0, 5.0))
    def test_absolute_homogeneity(self, scale):
        v = trig_path(GRID, 4)
        base = gagliardo_seminorm(v, 0.3)
        scaled = gagliardo_seminorm(SampledPath(GRID, scale * v.values), 0.3)
        assert abs(scaled - abs(scale) * base) <= 1e-9 * (1.0 + base)

    def test_triangle_inequality(self):
        for seed in range(10):
            u = trig_path(GRID, seed)
            v = trig_path(GRID, seed + 50)
            s = SampledPath(GRID, u.values + v.values)
            lhs = gagliardo_seminorm(s, 0.3)
            rhs = gagliardo_seminorm(u, 0.3) + gagliardo_seminorm(v, 0.3)
            assert lhs <= rhs * (1.0 + 1e-6)

    def test_weighted_components(self):
        v = trig_path(GRID, 6)
        stacked = SampledPath(GRID, np.stack([v.values, np.zeros_like(v.values)], axis=1))
        w = gagliardo_seminorm(stacked, 0.3, weights=np.array([4.0, 1.0]))
        assert abs(w - 2.0 * gagliardo_seminorm(v, 0.3)) < 1e-10


class TestNormEquivalence:
    def test_bracket(self):
        paths = [trig_path(TimeGrid(1.0, 256), s) for s in range(50)]
        study = norm_equivalence_study(paths, 0.25)
        assert 0.0 < study.ratio_min <= study.ratio_max < math.inf
        assert study.ratio_max / study.ratio_min < 100.0

    def test_singleton_constant(self):
        g = TimeGrid(1.0, 128)
        study = norm_equivalence_study([SampledPath(g, np.ones(g.steps + 1))], 0.25)
        assert study.ratio_min == study.ratio_max

    def test_zero_member_skipped(self):
        g = TimeGrid(1.0, 128)
        study = norm_equivalence_study(
            [SampledPath(g, np.zeros(g.steps + 1)), trig_path(g, 1)], 0.25
        )
        assert study.skipped == 1
        assert study.ratios.size == 1

    def test_refinement_stability(self):
        b1 = norm_equivalence_study([trig_path(TimeGrid(1.0, 256), s) for s in range(20)], 0.25)
        b2 = norm_equivalence_study([trig_path(TimeGrid(1.0, 512), s) for s in range(20)], 0.25)
        assert 0.5 <= b2.ratio_min / b1.ratio_min <= 2.0
        assert 0.5 <= b2.ratio_max / b1.ratio_max <= 2.0

    def test_empty(self):
        with pytest.raises(ValueError):
            norm_equivalence_study([], 0.25)


class TestInverse:
    def test_roundtrip(self):
        f = trig_path(GRID, 12)
        g = frac_integral(f, 0.4)
        back = frac_integral_inverse(g, 0.4, f0=f.values[0])
        assert np.max(np.abs(back.values - f.values)) < 1e-10

    def test_sobolev_norm_is_sum(self):
        v = trig_path(GRID, 13)
        assert abs(
            sobolev_norm(v, 0.3) - (l2_time_norm(v) + gagliardo_seminorm(v, 0.3))
        ) < 1e-14


class TestCsv:
    def test_scalar_roundtrip(self, tmp_path):
        f = trig_path(GRID, 20)
        fname = str(tmp_path / "path.csv")
        path_to_csv(f, fname)
        back = path_from_csv(fname)
        assert back.grid == f.grid
        assert np.array_equal(back.values, f.values)

    def test_vector_roundtrip(self, tmp_path):
        f = trig_path(GRID, 21)
        stacked = SampledPath(GRID, np.stack([f.values, -f.values], axis=1))
        fname = str(tmp_path / "vec.csv")
        path_to_csv(stacked, fname)
        back = path_from_csv(fname)
        assert np.array_equal(back.values, stacked.values)
