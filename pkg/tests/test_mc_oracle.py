import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from catbond.mc_oracle import McConfig, mc_price_m2, mc_survival, mc_terminal_z
from catbond.model2 import price_at_zero, survival_c
from catbond.rates import mc_discount
from catbond.streams import (BLOCK_SIZE, block_sizes, map_blocks, mean_and_se, substream, tag_id,
                             thread_count)

from conftest import BASE_CIR, base_state


class TestStreams:
    def test_substreams_reproducible_and_distinct(self):
        a = substream(1, "loss", 0).random(5)
        assert np.array_equal(a, substream(1, "loss", 0).random(5))
        assert not np.array_equal(a, substream(1, "loss", 1).random(5))
        assert not np.array_equal(a, substream(1, "rates", 0).random(5))
        assert not np.array_equal(a, substream(2, "loss", 0).random(5))

    def test_tag_id_stable(self):
        import zlib
        assert tag_id("loss") == zlib.crc32(b"loss")
        assert tag_id("loss") != tag_id("rates")

    def test_block_sizes(self):
        assert block_sizes(20000, 8192) == [8192, 8192, 3616]
        assert block_sizes(8192, 8192) == [8192]
        assert sum(block_sizes(100_000)) == 100_000 and BLOCK_SIZE == 8192

    def test_map_blocks_order_independent_of_threads(self):
        fn = lambda k, n: float(substream(3, "x", k).random(n).sum())
        assert map_blocks(fn, 50_000, 4096, threads=1) == map_blocks(fn, 50_000, 4096, threads=4)

    def test_thread_count_env(self, monkeypatch):
        monkeypatch.setenv("CATBOND_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.setenv("CATBOND_THREADS", "0")
        assert thread_count() == 1
        monkeypatch.setenv("CATBOND_THREADS", "many")
        with pytest.raises(ValueError):
            thread_count()
        monkeypatch.delenv("CATBOND_THREADS")
        assert thread_count() >= 1

    @given(st.lists(st.floats(-10, 10), min_size=2, max_size=200), st.integers(1, 50))
    def test_mean_and_se_blockwise(self, xs, bs):
        x = np.array(xs)
        blocks = [x[i:i + bs] for i in range(0, len(x), bs)]
        m, se = mean_and_se([b.sum() for b in blocks], [(b * b).sum() for b in blocks], len(x))
        assert m == pytest.approx(x.mean(), abs=1e-9)
        assert se == pytest.approx(x.std(ddof=1) / math.sqrt(len(x)), abs=1e-6)


class TestPrice:
    def test_base_set_agrees_with_closed_form(self, state):
        res = mc_price_m2(state, McConfig(n_paths=100_000, seed=11))
        assert abs(res.value - price_at_zero(state)) <= 3 * res.se

    @pytest.mark.parametrize("kw", [{"threshold": math.inf}, {"lambda_n": 0.0}])
    def test_riskless_limits(self, kw):
        cfg = McConfig(n_paths=20_000, seed=12)
        res = mc_price_m2(base_state(**kw), cfg)
        m, se = mc_discount(BASE_CIR, 3.0, 20_000, 256, seed=12)
        assert abs(res.value - m) <= 3 * math.hypot(res.se, se)

    def test_antithetic_agrees(self, state):
        res = mc_price_m2(state, McConfig(n_paths=40_000, seed=13, antithetic=True))
        assert abs(res.value - price_at_zero(state)) <= 3 * res.se

    def test_se_scaling(self, state):
        a = mc_price_m2(state, McConfig(n_paths=16_384, seed=14))
        b = mc_price_m2(state, McConfig(n_paths=65_536, seed=14))
        assert b.se / a.se == pytest.approx(0.5, rel=0.2)

    def test_thread_independent(self, state, monkeypatch):
        cfg = McConfig(n_paths=30_000, seed=15)
        monkeypatch.setenv("CATBOND_THREADS", "1")
        a = mc_price_m2(state, cfg)
        monkeypatch.setenv("CATBOND_THREADS", "4")
        b = mc_price_m2(state, cfg)
        assert a == b

    def test_config_validation(self, state):
        with pytest.raises(ValueError):
            McConfig(n_paths=10)
        with pytest.raises(ValueError):
            McConfig(steps_per_year=4)
        with pytest.raises(ValueError):
            McConfig(antithetic=True, block_size=8191)
        with pytest.raises(ValueError):
            mc_price_m2(state, McConfig(), t=1.0)


class TestSurvival:
    def test_u_zero(self, state):
        p, se = mc_survival(state, [0.0, 3.0], McConfig(n_paths=10_000, seed=16))
        assert p[0] == 1.0 and se[0] == 0.0

    def test_exponential_case(self, exp_state):
        grid = np.linspace(0.25, 3.0, 12)
        p, se = mc_survival(exp_state, grid, McConfig(n_paths=100_000, seed=17))
        c = np.array([survival_c(exp_state, u) for u in grid])
        assert np.all(np.abs(p - c) <= 3 * se)

    def test_base_u3(self, state):
        p, se = mc_survival(state, [3.0], McConfig(n_paths=100_000, seed=18))
        assert abs(p[0] - survival_c(state, 3.0)) <= 3 * se[0]

    def test_negative_grid(self, state):
        with pytest.raises(ValueError):
            mc_survival(state, [-1.0], McConfig(n_paths=1000))

    def test_terminal_z(self, exp_state):
        res = mc_terminal_z(exp_state, 2.0, McConfig(n_paths=50_000, seed=19))
        assert abs(res.value - survival_c(exp_state, 2.0)) <= 3 * res.se
