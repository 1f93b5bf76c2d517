import json
import math

import numpy as np
import pytest

from fracwave.fracops import SampledPath, TimeGrid, caputo_derivative
from fracwave.params import FracOrder
from fracwave.presets import poly_bump, single_mode
from fracwave.solver import (
    SolutionQuery,
    coefficient_evolution,
    mode_second_derivative,
    mode_second_derivative_samples,
    mode_solution,
    solve_field,
    truncation_tail,
    write_manifest,
    write_snapshots_csv,
)
from fracwave.spectral import ModeCoefficients, build_interval, synthesize
from oracles import ml_series_ref

LAM1 = math.pi**2

# extended-precision series value of the first-mode amplitude at t = 1,
# order 1.5 (the solver composes this with the eigenfunction)
Y_1P5_PI2_AT_1 = -0.1152743484427077


class TestModeSolution:
    def test_initial_state(self):
        st = mode_solution(LAM1, 1.5, 2.0, 3.0, 0.0)
        assert st.y == 2.0
        assert st.y_prime == 3.0
        assert abs(st.y_caputo + 2.0 * LAM1) < 1e-12

    def test_bad_eigenvalue(self):
        with pytest.raises(ValueError):
            mode_solution(0.0, 1.5, 1.0, 0.0, 0.5)

    def test_negative_time(self):
        with pytest.raises(ValueError):
            mode_solution(LAM1, 1.5, 1.0, 0.0, -0.5)

    def test_wave_limit(self):
        # approaching order 2 the mode tends to the cosine
        t = 0.7
        errs = []
        for eps in (0.1, 0.01):
            st = mode_solution(LAM1, 2.0 - eps, 1.0, 0.0, t)
            errs.append(abs(st.y - math.cos(math.pi * t)))
        assert errs[1] < errs[0]
        assert errs[1] < 5e-3

    def test_oracle_composition(self):
        st = mode_solution(LAM1, 1.5, 1.0, 0.0, 1.0)
        assert abs(st.y - Y_1P5_PI2_AT_1) < 1e-10 * abs(Y_1P5_PI2_AT_1)
        assert abs(ml_series_ref(1.5, 1.0, -LAM1) - Y_1P5_PI2_AT_1) < 1e-14

    def test_caputo_is_minus_lambda_y(self):
        t = np.linspace(0.0, 2.0, 33)
        st = mode_solution(LAM1, 1.3, 0.7, -0.4, t)
        assert np.max(np.abs(st.y_caputo + LAM1 * st.y)) < 1e-12

    def test_velocity_data_at_zero(self):
        st = mode_solution(LAM1, 1.5, 0.0, 4.0, 0.0)
        assert st.y_prime == 4.0


class TestSecondDerivative:
    def test_against_finite_differences(self):
        # independent oracle: central differences of the analytic velocity
        t0, dh = 0.5, 1e-5
        for alpha in (1.25, 1.6):
            vp = mode_solution(LAM1, alpha, 1.0, 0.5, t0 + dh).y_prime
            vm = mode_solution(LAM1, alpha, 1.0, 0.5, t0 - dh).y_prime
            fd = (vp - vm) / (2.0 * dh)
            got = mode_second_derivative(LAM1, alpha, 1.0, 0.5, t0)
            assert abs(got - fd) < 1e-5 * abs(fd)

    def test_origin_rejected(self):
        with pytest.raises(ValueError):
            mode_second_derivative(LAM1, 1.5, 1.0, 0.0, 0.0)

    def test_sample_panel_means(self):
        # near the origin the samples must reproduce the exact panel means
        # of the second derivative (increments of the analytic velocity)
        g = TimeGrid(1.0, 64)
        v = mode_second_derivative_samples(LAM1, 1.25, 1.0, 0.0, g)
        st = mode_solution(LAM1, 1.25, 1.0, 0.0, g.nodes)
        means = np.diff(st.y_prime) / g.spacing
        lin_means = 0.5 * (v[1:] + v[:-1])
        assert np.max(np.abs(lin_means[:8] - means[:8])) < 1e-9 * np.max(np.abs(means[:8]))


class TestSolveField:
    def setup_method(self):
        self.domain = build_interval(1.0, 8)
        self.grid = TimeGrid(1.0, 32)

    def test_single_mode_field(self):
        data = single_mode(8, 1)
        q = SolutionQuery(FracOrder(1.5), self.domain, data, self.grid)
        x = np.array([0.25, 0.5])
        got = solve_field(q, x)
        amp = np.array([mode_solution(LAM1, 1.5, 1.0, 0.0, t).y for t in self.grid.nodes])
        ref = np.outer(amp, math.sqrt(2.0) * np.sin(math.pi * x))
        assert np.max(np.abs(got - ref)) < 1e-12

    def test_boundary_dirichlet(self):
        data = poly_bump(self.domain)
        q = SolutionQuery(FracOrder(1.5), self.domain, data, self.grid)
        got = solve_field(q, np.array([0.0, 1.0]))
        assert np.max(np.abs(got)) < 1e-10

    def test_velocity_at_zero_matches_data(self):
        rng = np.random.default_rng(1)
        data = ModeCoefficients(np.zeros(8), rng.standard_normal(8) / np.arange(1, 9) ** 2)
        q = SolutionQuery(FracOrder(1.5), self.domain, data, self.grid, which="velocity")
        x = np.linspace(0.1, 0.9, 7)
        got = solve_field(q, x)
        ref = synthesize(self.domain, data.b, x)
        assert np.max(np.abs(got[0] - ref)) < 1e-12

    def test_linearity(self):
        d1 = single_mode(8, 1)
        d2 = single_mode(8, 3, amplitude=0.5, on="u1")
        combo = ModeCoefficients(2.0 * d1.a + d2.a, 2.0 * d1.b + d2.b)
        x = np.array([0.3, 0.6])
        f1 = solve_field(SolutionQuery(FracOrder(1.5), self.domain, d1, self.grid), x)
        f2 = solve_field(SolutionQuery(FracOrder(1.5), self.domain, d2, self.grid), x)
        fc = solve_field(SolutionQuery(FracOrder(1.5), self.domain, combo, self.grid), x)
        assert np.max(np.abs(fc - (2.0 * f1 + f2))) < 1e-12

    def test_query_validation(self):
        with pytest.raises(ValueError):
            SolutionQuery(FracOrder(1.5), self.domain, single_mode(4, 1), self.grid)
        with pytest.raises(ValueError):
            SolutionQuery(FracOrder(1.5), self.domain, single_mode(8, 1), self.grid, which="bogus")
        with pytest.raises(ValueError):
            SolutionQuery(FracOrder(1.5), self.domain, single_mode(8, 1), self.grid, n_sum=9)

    def test_caputo_field_is_minus_laplacian(self):
        data = single_mode(8, 2)
        qv = SolutionQuery(FracOrder(1.5), self.domain, data, self.grid, which="value")
        qc = SolutionQuery(FracOrder(1.5), self.domain, data, self.grid, which="caputo")
        cv = coefficient_evolution(qv)
        cc = coefficient_evolution(qc)
        lam = self.domain.eigenvalues[:, None]
        assert np.max(np.abs(cc + lam * cv)) < 1e-12


class TestEquationResidual:
    @pytest.mark.parametrize("alpha", [1.5])
    def test_residual_decreases(self, alpha):
        errs = []
        for M in (256, 512):
            g = TimeGrid(1.0, M)
            st = mode_solution(LAM1, alpha, 1.0, 0.0, g.nodes)
            second = mode_second_derivative_samples(LAM1, alpha, 1.0, 0.0, g)
            cap = caputo_derivative(SampledPath(g, second), alpha)
            target = -LAM1 * st.y
            sel = g.nodes >= 0.05
            num = math.sqrt(float(np.trapezoid((cap.values[sel] - target[sel]) ** 2, g.nodes[sel])))
            den = math.sqrt(float(np.trapezoid(target[sel] ** 2, g.nodes[sel])))
            errs.append(num / den)
        assert errs[1] < errs[0]
        assert errs[0] < 1e-2


class TestTruncationTail:
    def setup_method(self):
        self.domain = build_interval(1.0, 256)
        self.grid = TimeGrid(1.0, 16)

    def test_single_mode_no_tail(self):
        data = single_mode(256, 1)
        q = SolutionQuery(FracOrder(1.5), self.domain, data, self.grid)
        assert truncation_tail(q, 0.0, 1.0) == 0.0

    def test_monotone_in_retained_modes(self):
        data = poly_bump(self.domain)
        tails = []
        for ns in (8, 16, 32, 64, 128):
            q = SolutionQuery(FracOrder(1.5), self.domain, data, self.grid, n_sum=ns)
            tails.append(truncation_tail(q, 0.0, 1.0))
        assert all(t2 < t1 for t1, t2 in zip(tails, tails[1:]))
        # cubic coefficient decay plus the envelope: doubling the retained
        # modes at least halves the estimate
        assert all(t2 / t1 <= 0.6 for t1, t2 in zip(tails, tails[1:]))

    def test_zero_time_is_coefficient_tail(self):
        data = poly_bump(self.domain)
        q = SolutionQuery(FracOrder(1.5), self.domain, data, self.grid, n_sum=16)
        expected = math.sqrt(float(np.sum(data.a[16:] ** 2)))
        assert abs(truncation_tail(q, 0.0, 0.0) - expected) < 1e-14


class TestExports:
    def test_snapshots_and_manifest(self, tmp_path):
        domain = build_interval(1.0, 8)
        grid = TimeGrid(1.0, 8)
        q = SolutionQuery(FracOrder(1.5), domain, poly_bump(domain), grid, n_sum=4)
        x = np.linspace(0.0, 1.0, 5)
        fields = solve_field(q, x)
        csv_file = tmp_path / "snap.csv"
        man_file = tmp_path / "manifest.json"
        write_snapshots_csv(q, x, fields, str(csv_file))
        write_manifest(q, str(man_file), theta=0.25)
        lines = csv_file.read_text().strip().splitlines()
        assert len(lines) == grid.steps + 2
        manifest = json.loads(man_file.read_text())
        assert manifest["alpha"] == 1.5
        assert manifest["modes_summed"] == 4
        assert manifest["tail_estimate"]["at_t_end"] > 0.0
