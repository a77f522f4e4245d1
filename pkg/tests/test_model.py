import numpy as np
import pytest
from scipy import stats

from setpar import (
    CountSeries,
    MultiRegimeParams,
    RegimeParams,
    SetparParams,
    acf,
    default_lambda_init,
    intensity_path,
    intensity_step,
    intensity_step_multi,
    simulate,
    simulate_multi,
)

from oracles import intensity_path_python

# Frozen from an independent 10^7-step run (seed 987654321, burn-in 2000,
# batch-means standard error over 1000 batches); regenerate with
# tests/regenerate_oracles.py.
TABLE1_LONGRUN_MEAN_Y = 6.564326
TABLE1_LONGRUN_MEAN_Y_SE = 0.003957


class TestIntensityStep:
    def test_lower_regime_hand_value(self, table2_truth):
        # 0.5 + 0.8*2.0 + 0.7*3 = 4.2
        assert intensity_step(2.0, 3, table2_truth) == pytest.approx(4.2, abs=1e-12)

    def test_upper_regime_hand_value(self, table2_truth):
        # y_prev = 7 > r = 6: 0.2 + 0.2*2.0 + 0.1*7 = 1.3
        assert intensity_step(2.0, 7, table2_truth) == pytest.approx(1.3, abs=1e-12)

    def test_zero_counts_converge_to_fixed_point(self):
        p = SetparParams(r=4, lower=RegimeParams(0.5, 0.7, 0.3), upper=RegimeParams(1.0, 0.1, 0.1))
        lam = 42.0
        for _ in range(400):
            lam = intensity_step(lam, 0, p)
        assert lam == pytest.approx(0.5 / (1 - 0.7), rel=1e-12)  # 5/3

    def test_rejects_nonpositive_intensity(self, table2_truth):
        with pytest.raises(ValueError):
            intensity_step(0.0, 3, table2_truth)
        with pytest.raises(ValueError):
            intensity_step(-1.0, 3, table2_truth)

    def test_regime_partition_flips_between_r_and_r_plus_1(self, table2_truth):
        r = table2_truth.r
        lower_val = lambda y: table2_truth.lower.d + table2_truth.lower.a * 3.0 + table2_truth.lower.b * y
        upper_val = lambda y: table2_truth.upper.d + table2_truth.upper.a * 3.0 + table2_truth.upper.b * y
        assert intensity_step(3.0, r - 1, table2_truth) == pytest.approx(lower_val(r - 1))
        assert intensity_step(3.0, r, table2_truth) == pytest.approx(lower_val(r))
        assert intensity_step(3.0, r + 1, table2_truth) == pytest.approx(upper_val(r + 1))


class TestIntensityStepMulti:
    def test_two_regime_specialization_matches(self, table2_truth):
        # Half-open bins put {0..r} below the cut r+1, matching y <= r.
        multi = MultiRegimeParams(
            thresholds=(table2_truth.r + 1,),
            regimes=(table2_truth.lower, table2_truth.upper),
        )
        for y_prev in range(0, 20):
            assert intensity_step_multi(2.5, y_prev, multi) == pytest.approx(
                intensity_step(2.5, y_prev, table2_truth), abs=1e-14
            )

    def test_three_regime_bin_boundaries(self):
        regs = (
            RegimeParams(1.0, 0.1, 0.1),
            RegimeParams(2.0, 0.2, 0.2),
            RegimeParams(3.0, 0.3, 0.3),
        )
        multi = MultiRegimeParams(thresholds=(2, 5), regimes=regs)
        # Hand-written bin lookup over every count up to max threshold + 1.
        for y in range(0, 7):
            if y < 2:
                expect = regs[0]
            elif y < 5:
                expect = regs[1]
            else:
                expect = regs[2]
            got = intensity_step_multi(1.0, y, multi)
            assert got == pytest.approx(expect.d + expect.a * 1.0 + expect.b * y, abs=1e-14)

    def test_single_regime_is_plain_autoregression(self):
        reg = RegimeParams(0.7, 0.4, 0.2)
        multi = MultiRegimeParams(thresholds=(), regimes=(reg,))
        for y in (0, 3, 50):
            assert intensity_step_multi(2.0, y, multi) == pytest.approx(0.7 + 0.4 * 2.0 + 0.2 * y)


class TestIntensityPath:
    def test_constant_zero_series_stays_at_fixed_point(self):
        p = SetparParams(r=4, lower=RegimeParams(0.5, 0.7, 0.3), upper=RegimeParams(1.0, 0.1, 0.1))
        fp = 0.5 / (1 - 0.7)
        series = CountSeries(np.zeros(50, dtype=np.int64))
        path = intensity_path(series, p, fp)
        assert np.allclose(path.values, fp, rtol=1e-12)

    def test_geometric_forgetting_is_exact(self, table2_truth, table2_series):
        y = table2_series.values[:200]
        series = CountSeries(y)
        path_u = intensity_path(series, table2_truth, 1.0).values
        path_v = intensity_path(series, table2_truth, 10.0).values
        # The realized regime sequence is shared, so the gap telescopes to
        # (prod of active a's) * |u - v| exactly.
        a_active = np.where(y[:-1] <= table2_truth.r, table2_truth.lower.a, table2_truth.upper.a)
        prod = np.cumprod(a_active)
        gap = np.abs(path_u - path_v)
        assert gap[0] == pytest.approx(9.0)
        assert np.allclose(gap[1:], prod * 9.0, rtol=1e-9, atol=1e-12)
        a_max = max(table2_truth.lower.a, table2_truth.upper.a)
        bound = a_max ** np.arange(len(y)) * 9.0
        assert np.all(gap <= bound * (1 + 1e-12) + 1e-300)

    def test_four_point_hand_unrolled(self, table2_truth):
        series = CountSeries(np.array([3, 8, 1, 0]))
        path = intensity_path(series, table2_truth, 2.0)
        # By hand with (r=6, lower=(0.5,0.8,0.7), upper=(0.2,0.2,0.1)):
        lam1 = 2.0
        lam2 = 0.5 + 0.8 * lam1 + 0.7 * 3  # y1=3 <= 6
        lam3 = 0.2 + 0.2 * lam2 + 0.1 * 8  # y2=8 > 6
        lam4 = 0.5 + 0.8 * lam3 + 0.7 * 1  # y3=1 <= 6
        assert path.values == pytest.approx([lam1, lam2, lam3, lam4], abs=1e-14)
        assert path.initial_value == 2.0

    def test_matches_python_reference(self, table2_truth, table2_series):
        got = intensity_path(table2_series, table2_truth, 3.5).values
        want = intensity_path_python(table2_series.values, table2_truth.r, table2_truth.theta, 3.5)
        assert np.array_equal(got, want)

    def test_intensity_floor(self, table2_truth, table2_series):
        path = intensity_path(table2_series, table2_truth, 0.001).values
        floor = min(table2_truth.lower.d, table2_truth.upper.d)
        assert np.all(path[1:] >= floor - 1e-12)


class TestSimulate:
    def test_identical_seeds_identical_output(self, table2_truth):
        s1, l1 = simulate(table2_truth, n=300, seed=77)
        s2, l2 = simulate(table2_truth, n=300, seed=77)
        assert np.array_equal(s1.values, s2.values)
        assert np.array_equal(l1.values, l2.values)
        s3, _ = simulate(table2_truth, n=300, seed=78)
        assert not np.array_equal(s1.values, s3.values)

    def test_long_run_mean_matches_oracle(self, table1_truth):
        series, _ = simulate(table1_truth, n=10**5, seed=31337)
        y = series.values.astype(float)
        mean = y.mean()
        # Batch-means standard error of this path's mean (autocorrelated data).
        B = 100
        batches = y.reshape(B, -1).mean(axis=1)
        se_path = batches.std(ddof=1) / np.sqrt(B)
        se = np.hypot(se_path, TABLE1_LONGRUN_MEAN_Y_SE)
        assert abs(mean - TABLE1_LONGRUN_MEAN_Y) < 3 * se

    def test_table2_lag1_acf_mostly_negative(self, table2_truth):
        negative = 0
        n_seeds = 40
        for seed in range(n_seeds):
            series, _ = simulate(table2_truth, n=500, seed=1000 + seed)
            if acf(series.values.astype(float), 1).values[1] < 0:
                negative += 1
        assert negative >= int(0.8 * n_seeds)

    def test_burn_in_and_validation(self, table2_truth):
        with pytest.raises(ValueError):
            simulate(table2_truth, n=0, seed=1)
        with pytest.raises(ValueError):
            simulate(table2_truth, n=10, seed=1, burn_in=-1)
        series, lam = simulate(table2_truth, n=25, seed=5, burn_in=0, lambda_init=4.0)
        assert len(series) == 25
        assert lam.values[0] == pytest.approx(4.0)

    def test_default_lambda_init_is_reachable_state(self, table2_truth):
        assert default_lambda_init(table2_truth) == pytest.approx(0.5 / (1 - 0.8))

    def test_invariant_measure_moment_agreement(self, table1_truth):
        # Long-path moments of lambda from two different starting intensities
        # agree within Monte Carlo error under the drift condition.
        n = 200_000
        _, lam_a = simulate(table1_truth, n=n, seed=9, burn_in=0, lambda_init=0.1)
        _, lam_b = simulate(table1_truth, n=n, seed=10, burn_in=0, lambda_init=50.0)
        for k in (1, 2):
            ma = (lam_a.values**k).mean()
            mb = (lam_b.values**k).mean()
            B = 100
            se_a = (lam_a.values**k).reshape(B, -1).mean(axis=1).std(ddof=1) / np.sqrt(B)
            se_b = (lam_b.values**k).reshape(B, -1).mean(axis=1).std(ddof=1) / np.sqrt(B)
            assert abs(ma - mb) < 4 * np.hypot(se_a, se_b), f"k={k}: {ma} vs {mb}"

    def test_conditional_law_chi_square_with_frozen_intensity(self):
        # a = b = 0 freezes lambda at d; the sampled counts must then pass a
        # Poisson(d) goodness-of-fit test at the 1% level in >= 95% of runs.
        d = 4.0
        frozen = MultiRegimeParams(thresholds=(), regimes=(RegimeParams(d, 0.0, 0.0),))
        passes = 0
        runs = 60
        for seed in range(runs):
            series, _ = simulate_multi(frozen, n=2000, seed=12345 + seed, burn_in=0, lambda_init=d)
            counts = np.bincount(series.values, minlength=30)
            probs = stats.poisson.pmf(np.arange(30), d)
            expected = 2000 * probs
            # Merge the tail so every expected cell count is >= 5.
            cut = np.max(np.where(expected >= 5)[0])
            obs = np.append(counts[:cut], counts[cut:].sum())
            exp = np.append(expected[:cut], 2000 - expected[:cut].sum())
            stat = np.sum((obs - exp) ** 2 / exp)
            pval = stats.chi2.sf(stat, df=len(obs) - 1)
            passes += pval > 0.01
        assert passes >= int(0.95 * runs)


class TestSimulateMulti:
    def test_two_regime_matches_setpar_simulation(self, table2_truth):
        multi = MultiRegimeParams(
            thresholds=(table2_truth.r + 1,),
            regimes=(table2_truth.lower, table2_truth.upper),
        )
        s1, l1 = simulate(table2_truth, n=200, seed=4242)
        s2, l2 = simulate_multi(multi, n=200, seed=4242)
        assert np.array_equal(s1.values, s2.values)
        assert np.allclose(l1.values, l2.values, rtol=1e-14)
