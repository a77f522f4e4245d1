import numpy as np
import pytest

from setpar import (
    CountSeries,
    IntensityPath,
    MultiRegimeParams,
    RegimeParams,
    SetparParams,
)


class TestRegimeParams:
    def test_rejects_nonpositive_intercept(self):
        with pytest.raises(ValueError):
            RegimeParams(d=0.0, a=0.5, b=0.5)
        with pytest.raises(ValueError):
            RegimeParams(d=-1.0, a=0.5, b=0.5)

    def test_rejects_negative_feedback(self):
        with pytest.raises(ValueError):
            RegimeParams(d=1.0, a=-0.1, b=0.5)
        with pytest.raises(ValueError):
            RegimeParams(d=1.0, a=0.1, b=-0.5)

    def test_boundary_feedback_allowed(self):
        # Needed for the frozen-intensity checks and the b2 = 0 reduced model.
        p = RegimeParams(d=2.0, a=0.0, b=0.0)
        assert p.as_array().tolist() == [2.0, 0.0, 0.0]

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            RegimeParams(d=float("nan"), a=0.5, b=0.5)


class TestSetparParams:
    def test_threshold_validation(self):
        reg = RegimeParams(1.0, 0.5, 0.3)
        with pytest.raises(ValueError):
            SetparParams(r=-1, lower=reg, upper=reg)
        with pytest.raises(TypeError):
            SetparParams(r=1.5, lower=reg, upper=reg)

    def test_theta_layout(self, table2_truth):
        assert table2_truth.theta.tolist() == [0.5, 0.8, 0.7, 0.2, 0.2, 0.1]

    def test_stability_flag(self, table1_truth, table2_truth):
        assert table1_truth.is_stable  # a1=0.7<1, a2+b2=0.9<1
        assert table2_truth.is_stable  # a1=0.8<1, a2+b2=0.3<1 (a1+b1>1 is fine)
        unstable = SetparParams(
            r=3, lower=RegimeParams(1.0, 0.5, 0.1), upper=RegimeParams(1.0, 0.6, 0.5)
        )
        assert not unstable.is_stable

    def test_from_theta_roundtrip(self, table2_truth):
        rebuilt = SetparParams.from_theta(table2_truth.r, table2_truth.theta)
        assert rebuilt == table2_truth


class TestMultiRegimeParams:
    def test_regime_count_must_match(self):
        reg = RegimeParams(1.0, 0.5, 0.3)
        with pytest.raises(ValueError):
            MultiRegimeParams(thresholds=(3, 7), regimes=(reg, reg))

    def test_thresholds_strictly_increasing(self):
        reg = RegimeParams(1.0, 0.5, 0.3)
        with pytest.raises(ValueError):
            MultiRegimeParams(thresholds=(5, 5), regimes=(reg, reg, reg))
        with pytest.raises(ValueError):
            MultiRegimeParams(thresholds=(0,), regimes=(reg, reg))

    def test_half_open_bins(self):
        regs = tuple(RegimeParams(1.0 + i, 0.1, 0.1) for i in range(3))
        p = MultiRegimeParams(thresholds=(3, 7), regimes=regs)
        assert [p.regime_index(y) for y in (0, 2, 3, 6, 7, 100)] == [0, 0, 1, 1, 2, 2]


class TestCountSeries:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            CountSeries(np.array([], dtype=np.int64))

    def test_rejects_negative_naming_index(self):
        with pytest.raises(ValueError, match="index 2"):
            CountSeries(np.array([1, 2, -3, 4]))

    def test_rejects_fractional(self):
        with pytest.raises(ValueError):
            CountSeries(np.array([1.0, 2.5]))

    def test_accepts_integral_floats(self):
        s = CountSeries(np.array([1.0, 2.0]))
        assert s.values.dtype == np.int64
        assert len(s) == 2


class TestIntensityPath:
    def test_rejects_nonpositive_values(self):
        with pytest.raises(ValueError):
            IntensityPath(values=np.array([1.0, 0.0]), initial_value=1.0)

    def test_rejects_bad_initial(self):
        with pytest.raises(ValueError):
            IntensityPath(values=np.array([1.0]), initial_value=0.0)
