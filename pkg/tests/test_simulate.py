import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import norm

from sepbf.antipodal import KktConfig
from sepbf.mary import PgdConfig
from sepbf.model import QAM4_SYMBOLS, AntipodalSpec, Constellation
from sepbf.numerics import q, real_embed_matrix, real_embed_vector
from sepbf.simulate import (
    SweepConfig,
    estimate_ser_antipodal,
    estimate_ser_mary,
    evaluate,
    gen_gaussian_channel,
    sweep_snr,
    wilson_interval,
)

from conftest import FIG4_HB, FIG4_HE, make_sys


class TestChannels:
    @pytest.mark.parametrize("kind", ["real", "complex"])
    def test_statistics(self, kind):
        h = gen_gaussian_channel(200, 500, 0.04, kind, seed=1)
        n = h.size
        assert abs(h.mean()) <= 4 * math.sqrt(0.04 / n)
        assert np.mean(np.abs(h) ** 2) == pytest.approx(0.04, rel=0.02)
        if kind == "real":
            assert np.all(h.imag == 0)

    def test_reproducible_and_indexed(self):
        a = gen_gaussian_channel(2, 2, 1.0, seed=4, index=3)
        np.testing.assert_array_equal(a, gen_gaussian_channel(2, 2, 1.0, seed=4, index=3))
        assert not np.array_equal(a, gen_gaussian_channel(2, 2, 1.0, seed=4, index=2))

    def test_bad_input(self):
        with pytest.raises(ValueError):
            gen_gaussian_channel(2, 2, 0.0)
        with pytest.raises(ValueError):
            gen_gaussian_channel(2, 2, 1.0, kind="rayleigh")


class TestAntipodalEstimator:
    def test_noiseless_limit(self):
        est = estimate_ser_antipodal(np.eye(2), [1.0, 0.0], 1.0, 1e-12, 10_000)
        assert est.errors == 0

    def test_matches_q(self):
        # ||Hw|| a / sqrt(N/2) = 1
        h, w, n0, trials = np.eye(1), [1.0], 2.0, 10**6
        est = estimate_ser_antipodal(h, w, 1.0, n0, trials, seed=2)
        p = q(1.0)
        assert abs(est.ser - p) <= 3 * math.sqrt(p * (1 - p) / trials)

    def test_zero_signal_is_coin(self):
        est = estimate_ser_antipodal(np.zeros((2, 2)), [1.0, 0.0], 1.0, 0.1, 200_000, seed=3)
        assert abs(est.ser - 0.5) <= 3 * math.sqrt(0.25 / 200_000)

    def test_thread_independent(self):
        args = (np.array([[0.3, 0.1j]]), [1.0, 1.0], 1.0, 0.2, 50_000)
        a = estimate_ser_antipodal(*args, seed=9)
        b = estimate_ser_antipodal(*args, seed=9, threads=4)
        assert a == b

    def test_needs_trials(self):
        with pytest.raises(ValueError):
            estimate_ser_antipodal(np.eye(1), [1.0], 1.0, 1.0, 0)


class TestMaryEstimator:
    def test_binary_exact(self):
        h = real_embed_matrix(np.array([[0.5, 0.2]]))
        w = real_embed_matrix(np.array([[1.0], [0.0]]))
        sym = real_embed_vector(np.array([[1.0, -1.0]])).T
        n0, trials = 0.5, 10**6
        est = estimate_ser_mary(h, w, sym, n0, trials, seed=1)
        dist = np.linalg.norm(h @ w @ (sym[0] - sym[1]))
        p = q(dist / (2 * math.sqrt(n0 / 2)))
        assert abs(est.ser - p) <= 3 * math.sqrt(p * (1 - p) / trials)

    def test_qam4_exact(self):
        # square QAM through an identity channel: 1 - (1 - Q(d/2 sigma))^2
        qpsk = np.array([[1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]])
        sym = real_embed_vector(qpsk).T
        h, w = np.eye(2), np.eye(2)
        n0, trials = 1.0, 10**6
        est = estimate_ser_mary(h, w, sym, n0, trials, seed=2)
        half = 1.0 / math.sqrt(n0 / 2)
        p = 1 - (1 - norm.sf(half)) ** 2
        assert abs(est.ser - p) <= 3 * math.sqrt(p * (1 - p) / trials)


@given(st.integers(0, 10**6), st.integers(1, 10**6))
def test_wilson_contains_estimate(errors, trials):
    errors = min(errors, trials)
    lo, hi = wilson_interval(errors, trials)
    assert 0.0 <= lo <= errors / trials <= hi <= 1.0


class TestSweep:
    def test_fig3_closed_form(self, fig3):
        sys, spec = fig3
        cfg = SweepConfig(sys, spec)
        grid = list(range(0, 21, 2))
        rows = sweep_snr("antipodal", grid, cfg)
        assert [r.snr_db for r in rows] == grid
        for r in rows:
            snr = 10 ** (r.snr_db / 10)
            assert r.feasible and r.case == "Case2"
            assert r.sep_bob_analytic == pytest.approx(q(math.sqrt(2 * snr) * 0.42), abs=1e-10)
            assert r.sep_eve_analytic == pytest.approx(0.5, abs=1e-12)

    def test_single_point_equals_direct_call(self, setup1):
        sys, spec = setup1
        cfg = SweepConfig(sys, spec, trials=20_000, seed=3)
        assert sweep_snr("sinr_bf", [12.0], cfg) == evaluate("sinr_bf", cfg, 12.0)

    def test_fig4_full_power_goes_infeasible(self):
        cfg = SweepConfig(make_sys(FIG4_HB, FIG4_HE), AntipodalSpec(1.0, 0.3),
                          KktConfig(case3="full-power"))
        rows = sweep_snr("antipodal", [0.0, 10.0, 26.0, 30.0], cfg)
        assert rows[0].feasible and rows[1].feasible
        assert not rows[2].feasible and rows[3].case == "Infeasible"
        assert rows[3].sep_bob_analytic is None

    def test_monte_carlo_columns(self, setup1):
        sys, spec = setup1
        rows = evaluate("antipodal", SweepConfig(sys, spec, trials=50_000, seed=1))
        r = rows[0]
        assert r.ci_lo <= r.ser_bob_mc <= r.ci_hi
        assert abs(r.ser_eve_mc - r.sep_eve_analytic) <= 4 * math.sqrt(0.25 / 50_000)

    def test_mary_rows(self):
        cfg = SweepConfig(make_sys(FIG4_HB, FIG4_HE), constellation=Constellation(QAM4_SYMBOLS),
                          pgd=PgdConfig(restarts=3), trials=10_000)
        rows = sweep_snr("mary", [10.0], cfg)
        assert [r.case for r in rows] == ["best", "mean"]
        assert rows[0].ser_bob_mc is not None and rows[1].ser_bob_mc is None

    def test_failures_become_rows(self, setup1):
        sys, spec = setup1
        rows = sweep_snr("sdr", [5.0], SweepConfig(sys, spec))
        assert rows[0].case == "Error" and "sdr_d" in rows[0].note

    def test_unknown_method(self, setup1):
        sys, spec = setup1
        with pytest.raises(ValueError):
            sweep_snr("zf", [0.0], SweepConfig(sys, spec))
        with pytest.raises(ValueError):
            sweep_snr("antipodal", [], SweepConfig(sys, spec))
