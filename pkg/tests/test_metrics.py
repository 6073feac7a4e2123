"""Tests for goodness-of-fit and event statistics."""

import numpy as np
import pytest

from lidscore.errors import ValidationError
from lidscore.hydrology import Hydrograph
from lidscore.metrics import nse, peak_stats, reduction


class TestNse:
    def test_identity_is_one(self):
        obs = np.array([1.0, 3.0, 2.0, 5.0])
        report = nse(obs, obs)
        assert report.nse == 1.0
        assert report.passed
        assert report.n_points == 4

    def test_mean_prediction_is_zero(self):
        obs = np.array([1.0, 2.0, 3.0, 4.0])
        report = nse(obs, np.full(4, obs.mean()))
        assert report.nse == pytest.approx(0.0, abs=1e-12)
        assert not report.passed

    def test_hand_case(self):
        """obs (1,2,3) vs sim (1,2,4): 1 - 1/2 = 0.5."""
        report = nse([1.0, 2.0, 3.0], [1.0, 2.0, 4.0])
        assert report.nse == pytest.approx(0.5, abs=1e-12)
        assert not report.passed  # the pass rule is strict: nse > 0.5

    def test_constant_observed_rejected(self):
        with pytest.raises(ValidationError, match="zero variance"):
            nse([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_length_mismatch(self):
        with pytest.raises(ValidationError, match="length"):
            nse([1.0, 2.0], [1.0, 2.0, 3.0])

    def test_resampling_by_interpolation(self):
        obs = np.array([0.0, 2.0, 4.0, 6.0])           # 120 s step
        sim = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0])  # 60 s step
        report = nse(obs, sim, observed_step_s=120, simulated_step_s=60)
        assert report.nse == pytest.approx(1.0)

    def test_random_series_properties(self):
        rng = np.random.default_rng(7)
        obs = rng.uniform(1, 10, 50)
        assert nse(obs, obs).nse == 1.0
        assert nse(obs, np.full(50, obs.mean())).nse == pytest.approx(0.0, abs=1e-12)


class TestPeakStats:
    def test_constant_series_peaks_at_start(self):
        h = Hydrograph(site="s", step_s=60, flows_lps=np.full(5, 3.0))
        assert peak_stats(h) == (3.0, 0.0)

    def test_simple_peak(self):
        h = Hydrograph(site="s", step_s=60, flows_lps=np.array([0.0, 5.0, 3.0]))
        assert peak_stats(h) == (5.0, 60.0)

    def test_triangle_apex(self):
        flows = np.array([0.0, 2.0, 4.0, 6.0, 4.0, 2.0, 0.0])
        h = Hydrograph(site="s", step_s=30, flows_lps=flows)
        assert peak_stats(h) == (6.0, 90.0)

    def test_tie_breaks_earliest(self):
        h = Hydrograph(site="s", step_s=60, flows_lps=np.array([1.0, 7.0, 7.0]))
        assert peak_stats(h)[1] == 60.0

    def test_empty_rejected(self):
        h = Hydrograph(site="s", step_s=60, flows_lps=np.zeros(1))
        assert peak_stats(h) == (0.0, 0.0)
        with pytest.raises(ValidationError):
            peak_stats(Hydrograph(site="s", step_s=60, flows_lps=np.zeros(0)))


class TestReduction:
    def test_twenty_percent(self):
        assert reduction(100.0, 80.0) == pytest.approx(20.0)

    def test_no_change(self):
        assert reduction(100.0, 100.0) == 0.0

    def test_worsening_is_negative_with_warning(self):
        with pytest.warns(UserWarning, match="exceeds baseline"):
            assert reduction(100.0, 110.0) == pytest.approx(-10.0)

    def test_antisymmetric_around_equality(self):
        d = 7.0
        with pytest.warns(UserWarning):
            worse = reduction(100.0, 100.0 + d)
        better = reduction(100.0, 100.0 - d)
        assert worse == pytest.approx(-better)

    def test_zero_baseline_rejected(self):
        with pytest.raises(ValidationError):
            reduction(0.0, 5.0)


class TestObservedIngestion:
    def test_reads_series(self, tmp_path):
        from lidscore.metrics import read_observed_csv

        path = tmp_path / "flow_A.csv"
        path.write_text("t_s,value\n0,0.0\n60,12.5\n120,3.0\n")
        t, v = read_observed_csv(path)
        np.testing.assert_array_equal(t, [0.0, 60.0, 120.0])
        np.testing.assert_array_equal(v, [0.0, 12.5, 3.0])

    def test_validation_feeds_nse(self, tmp_path):
        """Measured vs simulated at mismatched steps, via interpolation."""
        from lidscore.metrics import read_observed_csv

        path = tmp_path / "obs.csv"
        path.write_text("t_s,value\n0,0\n120,2\n240,4\n")
        t, observed = read_observed_csv(path)
        simulated = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
        report = nse(observed, simulated, observed_step_s=120,
                     simulated_step_s=60)
        assert report.nse == pytest.approx(1.0)
        assert report.passed

    def test_bad_header(self, tmp_path):
        from lidscore.metrics import read_observed_csv

        path = tmp_path / "obs.csv"
        path.write_text("time,flow\n0,0\n")
        with pytest.raises(ValidationError, match="t_s,value"):
            read_observed_csv(path)

    def test_non_increasing_times(self, tmp_path):
        from lidscore.metrics import read_observed_csv

        path = tmp_path / "obs.csv"
        path.write_text("t_s,value\n0,0\n0,1\n")
        with pytest.raises(ValidationError, match="increasing"):
            read_observed_csv(path)
