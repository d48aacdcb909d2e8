import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from catbond.contracts import CatBondContract
from catbond.loss_process import LossPath, PiecewiseIntensity, ShotNoiseSpec, simulate_batch
from catbond.mc_oracle import McConfig, mc_survival, mc_terminal_z
from catbond.model2 import (Model2State, dual_projection, dual_projection_increment, intensity_rate,
                            jump_intensity, jump_size, pre_trigger_curve, pre_trigger_price, price,
                            price_at_zero, relative_jump, simulate_trigger, survival_c, trigger_time,
                            trigger_times_batch)
from catbond.rates import bond_price
from catbond.severity import Exponential, LogNormal, Pareto
from catbond.streams import substream

from conftest import BASE_CIR, base_state

U_GRID = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)


def survival_oracle(state, u):
    """c(u) by SciPy quadrature of the log-normal/exponential Laplace oracle."""
    sev, lam, alpha, D = state.spec.severity, state.spec.rate, state.spec.alpha, state.D
    f = lambda v: sev.laplace_oracle(math.exp(alpha * v) / D) - 1.0
    return math.exp(lam * integrate.quad(f, 0.0, u, epsabs=1e-12)[0])


class TestSurvival:
    def test_trivial_cases(self, state):
        assert survival_c(state, 0.0) == 1.0
        assert survival_c(base_state(lambda_n=0.0), 2.0) == 1.0
        with pytest.raises(ValueError):
            survival_c(state, -1.0)

    def test_base_value_against_oracle(self, state):
        assert survival_c(state, 3.0) == pytest.approx(survival_oracle(state, 3.0), rel=3e-4)

    def test_exponential_against_oracle(self, exp_state):
        for u in U_GRID:
            assert survival_c(exp_state, u) == pytest.approx(survival_oracle(exp_state, u), rel=1e-10)

    def test_compound_poisson_exponential_closed_form(self):
        # alpha = 0: c(u) = exp(-lambda u (1/D) / (beta + 1/D))
        st_ = base_state(severity=Exponential(0.01), lambda_n=2.0, alpha=0.0, threshold=500.0)
        for u in (0.3, 1.0, 2.5):
            assert survival_c(st_, u) == pytest.approx(math.exp(-2.0 * u * (1 / 500) / (0.01 + 1 / 500)), rel=1e-12)

    def test_matches_terminal_z(self, state):
        res = mc_terminal_z(state, 3.0, McConfig(n_paths=100_000, seed=3))
        assert abs(res.value - survival_c(state, 3.0)) <= 3 * res.se

    def test_inhomogeneous_survival(self):
        lam = PiecewiseIntensity((0.0, 1.0, 2.0), (1.0, 0.2, 0.6))
        st_ = Model2State(ShotNoiseSpec(lam, 0.5, Exponential(1 / 3000)), CatBondContract(1, 0, 1e4, 3), BASE_CIR)
        p, se = mc_survival(st_, U_GRID, McConfig(n_paths=100_000, seed=4))
        c = np.array([survival_c(st_, u) for u in U_GRID])
        assert np.all(np.abs(p - c) <= 3 * se)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0))
    def test_nonincreasing_in_u(self, u1, u2):
        s = base_state(severity=Exponential(1 / 600))
        lo, hi = sorted((u1, u2))
        assert survival_c(s, hi) <= survival_c(s, lo) * (1 + 1e-13)


class TestTrigger:
    def test_no_events_never_triggers(self):
        assert trigger_time(LossPath(3.0), 0.8, 10.0) == math.inf

    def test_jump_crossing(self):
        path = LossPath(3.0, [1.0], [50.0])
        assert trigger_time(path, 0.0, 40.0) == 1.0
        assert trigger_time(path, 0.0, 60.0) == math.inf

    def test_growth_crossing(self):
        path = LossPath(3.0, [1.0], [50.0])
        t = trigger_time(path, 0.5, 60.0)
        assert t == pytest.approx(1.0 + math.log(60 / 50) / 0.5, rel=1e-14)
        assert path.loss(t, 0.5) == pytest.approx(60.0, rel=1e-13)

    def test_crossing_between_two_events(self):
        path = LossPath(3.0, [0.5, 2.5], [10.0, 1.0])
        t = trigger_time(path, 1.0, 30.0)
        assert 0.5 < t < 2.5 and path.loss(t, 1.0) == pytest.approx(30.0)

    def test_huge_level(self, state):
        path = LossPath(3.0, [1.0], [600.0])
        assert simulate_trigger(state, path, np.random.default_rng(0)) >= 0
        assert trigger_time(path, 0.8, 1e12) == math.inf

    def test_batch_matches_scalar(self, state):
        batch = simulate_batch(state.spec, 3.0, 2000, substream(1, "t"))
        levels = state.D * substream(1, "lv").exponential(size=2000) * 0.05
        tau = trigger_times_batch(batch, 0.8, levels)
        ref = np.array([trigger_time(batch.path(k), 0.8, levels[k]) for k in range(2000)])
        np.testing.assert_allclose(tau, ref, rtol=1e-12)
        assert np.isfinite(tau).sum() > 100

    def test_alpha_zero_only_at_events(self):
        spec = ShotNoiseSpec(2.0, 0.0, Exponential(0.1))
        batch = simulate_batch(spec, 3.0, 500, substream(2, "t"))
        tau = trigger_times_batch(batch, 0.0, np.full(500, 15.0))
        hit = tau[np.isfinite(tau)]
        assert len(hit) and np.all(np.isin(hit, batch.theta))

    @pytest.mark.parametrize("state_name", ["lognormal", "exponential"])
    def test_survival_law(self, state_name, state, exp_state):
        s = state if state_name == "lognormal" else exp_state
        p, se = mc_survival(s, U_GRID, McConfig(n_paths=100_000, seed=8))
        c = np.array([survival_c(s, u) for u in U_GRID])
        assert np.all(np.abs(p - c) <= 3 * se)


class TestIntensity:
    def test_exponential_exact(self, exp_state):
        b, D = 1 / 3000, 1e4
        assert intensity_rate(exp_state, 1.0) == pytest.approx(1.0 * (1 / D) / (b + 1 / D), rel=1e-14)

    def test_infinite_threshold(self):
        assert intensity_rate(base_state(threshold=math.inf), 1.0) == 0.0

    def test_base_set_vs_oracle(self, state):
        oracle = 0.5 * (1 - state.spec.severity.laplace_oracle(1e-4))
        assert intensity_rate(state, 0.5) == pytest.approx(oracle, rel=0.01)

    def test_nonincreasing_in_threshold(self):
        vals = [jump_intensity(base_state(threshold=D), 0.0) for D in (2e3, 5e3, 1e4, 2e4, 1e5)]
        assert np.all(np.diff(vals) < 0)

    def test_growth_term(self, state):
        assert intensity_rate(state, 1.0, loss=500.0) == pytest.approx(
            jump_intensity(state, 1.0) + 0.8 * 500.0 / 1e4, rel=1e-14)

    def test_negative_time(self, state):
        with pytest.raises(ValueError):
            intensity_rate(state, -1.0)


class TestDualProjection:
    def test_before_first_event(self, state):
        path = LossPath(3.0, [2.0], [600.0])
        assert dual_projection_increment(state, 1.0, path) == jump_intensity(state, 1.0)

    def test_infinite_threshold(self):
        s = base_state(threshold=math.inf)
        assert dual_projection_increment(s, 1.0, LossPath(3.0, [0.5], [600.0])) == 0.0

    def test_identity_with_intensity(self, state):
        path = LossPath(3.0, [0.4, 1.3], [700.0, 500.0])
        for s in (0.1, 0.4, 0.9, 1.3, 2.7):
            live = path.theta < s
            left = float(np.sum(path.y[live] * np.exp(0.8 * (s - path.theta[live]))))
            z_left = math.exp(-left / state.D)
            assert dual_projection_increment(state, s, path) / z_left == pytest.approx(
                intensity_rate(state, s, left), rel=1e-14)

    def test_nondecreasing_along_path(self, state):
        path = LossPath(3.0, [0.4, 1.3], [700.0, 500.0])
        a = [dual_projection(state, path, t) for t in np.linspace(0, 3, 13)]
        assert np.all(np.diff(a) >= 0) and a[0] == 0.0

    def test_compensator_mean(self, exp_state):
        batch = simulate_batch(exp_state.spec, 3.0, 3000, substream(5, "dp"))
        a = np.array([dual_projection(exp_state, batch.path(k), 3.0) for k in range(3000)])
        se = a.std(ddof=1) / math.sqrt(len(a))
        assert abs(a.mean() - (1 - survival_c(exp_state, 3.0))) <= 3 * se

    def test_jump_part_only_smaller(self, state):
        path = LossPath(3.0, [0.4], [700.0])
        assert dual_projection(state, path, 3.0, jump_part_only=True) < dual_projection(state, path, 3.0)


class TestPrice:
    def test_base_value_against_oracle(self, state):
        # independent quadrature of the exponent with the SciPy-based Laplace oracle
        assert price_at_zero(state) == pytest.approx(
            survival_oracle(state, 3.0) * bond_price(BASE_CIR, BASE_CIR.r0, 0.0, 3.0), rel=3e-4)

    def test_at_maturity(self, state):
        path = LossPath(3.0, [1.0], [600.0])
        assert pre_trigger_price(state, 3.0, path, 0.05) == 1.0

    def test_riskless_limits(self):
        path = LossPath(3.0, [1.0], [600.0])
        q = bond_price(BASE_CIR, 0.03, 1.5, 3.0)
        assert pre_trigger_price(base_state(threshold=math.inf), 1.5, path, 0.03) == pytest.approx(q, rel=1e-15)
        assert pre_trigger_price(base_state(lambda_n=0.0), 1.5, LossPath(3.0), 0.03) == pytest.approx(q, rel=1e-15)

    def test_t_zero_is_survival_times_bond(self, state):
        assert price_at_zero(state) == pytest.approx(
            survival_c(state, 3.0) * bond_price(BASE_CIR, BASE_CIR.r0, 0.0, 3.0), rel=1e-12)

    def test_price_and_pre_trigger_agree_when_alive(self, state):
        path = LossPath(3.0, [1.0], [600.0])
        assert price(state, 2.0, path, 0.02) == pre_trigger_price(state, 2.0, path, 0.02)
        assert price(state, 2.0, path, 0.02, survived=False) == 0.0

    def test_errors(self, state):
        path = LossPath(3.0)
        with pytest.raises(ValueError):
            pre_trigger_price(state, 3.5, path, 0.02)
        with pytest.raises(ValueError):
            pre_trigger_price(state, 1.0, path)
        with pytest.raises(ValueError):
            Model2State(ShotNoiseSpec(0.5, 0.8, Pareto(1.5, 100.0)), CatBondContract(), BASE_CIR)
        with pytest.raises(ValueError):
            pre_trigger_price(Model2State(state.spec, CatBondContract(1, 0.5, 1e4, 3), BASE_CIR), 0.0, path)

    def test_monotone_in_threshold_and_maturity(self):
        v_d = [price_at_zero(base_state(threshold=D)) for D in (5000, 9000, 15000, 20000)]
        v_t = [price_at_zero(base_state(maturity=T)) for T in np.arange(0.5, 5.01, 0.5)]
        assert np.all(np.diff(v_d) > 0) and np.all(np.diff(v_t) < 0)

    def test_increasing_between_events_with_frozen_rates(self, state):
        path = LossPath(3.0, [1.0], [600.0])
        t = np.linspace(1.0, 2.9, 40)
        v = np.array([pre_trigger_price(state, s, path, 0.02) / bond_price(BASE_CIR, 0.02, s, 3.0) for s in t])
        assert np.all(np.diff(v) > 0)

    def test_curve_matches_pointwise(self, state):
        path = LossPath(3.0, [0.7, 1.9], [650.0, 580.0])
        times = np.array([0.0, 0.5, 0.7, 1.2, 1.9, 2.5, 3.0])
        rates = np.array([0.0204, 0.02, 0.025, 0.03, 0.01, 0.02, 0.02])
        curve = pre_trigger_curve(state, path, times, rates)
        ref = [pre_trigger_price(state, t, path, r if t > 0 else None) for t, r in zip(times, rates)]
        np.testing.assert_allclose(curve, ref, rtol=1e-10)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 0.2), st.lists(st.floats(0.0, 2000.0), max_size=4))
    def test_bounds(self, t, r, shots):
        s = base_state()
        theta = np.linspace(0.3, 2.7, len(shots)) if shots else []
        path = LossPath(3.0, theta, shots)
        v = pre_trigger_price(s, t, path, r if t > 0 else None)
        q = bond_price(BASE_CIR, r if t > 0 else BASE_CIR.r0, t, 3.0)
        assert 0 <= v <= q * (1 + 1e-15)


class TestJumps:
    def test_alpha_zero_no_jump(self):
        s = base_state(alpha=0.0)
        assert relative_jump(s, 1.0, 600.0) == 0.0
        assert jump_size(s, 1.0, 600.0, 0.8) == 0.0

    @pytest.mark.parametrize("theta,y,reported", [(1.104, 601.8668, 0.19309152), (1.971, 582.0399, 0.07092837)])
    def test_reported_ratios(self, state, theta, y, reported):
        assert -relative_jump(state, theta, y) == pytest.approx(reported, abs=0.005)

    def test_event_after_maturity(self, state):
        with pytest.raises(ValueError):
            relative_jump(state, 3.5, 1.0)

    @given(st.lists(st.tuples(st.floats(0.01, 3.0), st.floats(1.0, 3000.0)), min_size=1, max_size=5,
                    unique_by=lambda e: e[0]).map(sorted), st.floats(0.0, 1.5))
    def test_jump_consistency(self, events, alpha):
        s = base_state(alpha=alpha)
        path = LossPath(3.0, [e[0] for e in events], [e[1] for e in events])
        for th, y in events:
            before = pre_trigger_price(s, th, path, 0.02, left=True)
            after = pre_trigger_price(s, th, path, 0.02)
            assert abs((after - before) - jump_size(s, th, y, before)) <= 1e-12 * before
            assert after <= before
