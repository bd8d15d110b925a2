"""
Unit tests for the Monte-Carlo harness
"""

import math

import numpy as np
import pytest

from mrfm_spin_detection.detector_registry import build_detector_set
from mrfm_spin_detection.exceptions import HarnessError
from mrfm_spin_detection.harness import (
    CurveTable,
    TrialBatch,
    auc,
    auc_standard_error,
    default_pf_grid,
    detection_probability,
    empirical_threshold,
    power_curve,
    roc_curve,
    run_trials,
)
from mrfm_spin_detection.signal_models import TelegraphModel, make_rng, sigma_for_snr


@pytest.fixture
def model():
    return TelegraphModel(1.0, 0.99, 0.99, 200)


def batch_of(h0, h1, name="test"):
    return TrialBatch(name, np.asarray(h0, dtype=float), np.asarray(h1, dtype=float), "fp")


class TestEmpiricalThreshold:
    """Test suite for the order-statistic threshold."""

    def test_hundred_distinct_values(self):
        stats = np.arange(1, 101, dtype=float)
        eta = empirical_threshold(make_rng(1).permutation(stats), 0.1)
        assert eta == 90.0
        assert np.sum(stats > eta) == 10

    def test_median(self):
        assert empirical_threshold([1, 2, 3, 4], 0.5) == 2.0

    def test_ties_give_no_false_alarms(self):
        stats = np.full(20, 3.0)
        eta = empirical_threshold(stats, 0.2)
        assert eta == 3.0
        assert np.mean(stats > eta) == 0.0

    @pytest.mark.parametrize("pf", [0.0, 1.0, -0.1])
    def test_pf_out_of_range(self, pf):
        with pytest.raises(HarnessError):
            empirical_threshold([1.0, 2.0], pf)

    def test_too_few_trials(self):
        with pytest.raises(HarnessError):
            empirical_threshold(np.arange(5.0), 0.1)

    @pytest.mark.parametrize("pf", [0.01, 0.1, 0.37, 0.9])
    def test_false_alarm_bound(self, pf):
        stats = make_rng(3).normal(size=1000)
        assert np.mean(stats > empirical_threshold(stats, pf)) <= pf


class TestCurveTable:
    def test_rejects_decreasing_roc(self):
        with pytest.raises(HarnessError):
            CurveTable("ROC", "x", [0.1, 0.2], [0.5, 0.4])

    def test_rejects_unknown_kind(self):
        with pytest.raises(HarnessError):
            CurveTable("DET", "x", [0.1], [0.5])

    def test_frame_columns(self):
        roc = CurveTable("ROC", "energy", [0.1, 0.2], [0.3, 0.4])
        power = CurveTable("POWER", "energy", [-40.0, -30.0], [0.3, 0.9])
        assert list(roc.to_frame().columns) == ["pf", "pd", "detector"]
        assert list(power.to_frame().columns) == ["snr_db", "pd", "detector"]


class TestRocCurve:
    """Test suite for ROC construction and AUC."""

    def test_default_grid(self):
        grid = default_pf_grid()
        assert grid.size == 59
        assert grid[0] == pytest.approx(0.005)
        assert np.all(np.diff(grid) > 0)
        assert grid[-1] < 1.0

    def test_null_detector_is_diagonal(self):
        rng = make_rng(4)
        n = 4000
        batch = batch_of(rng.normal(size=n), rng.normal(size=n))
        curve = roc_curve(batch)
        assert np.all(np.abs(curve.y - curve.x) <= 3 / math.sqrt(n) + 1 / n)
        assert auc(curve) == pytest.approx(0.5, abs=0.03)

    def test_separated_statistics(self):
        batch = batch_of(np.arange(200.0), np.arange(200.0) + 1000.0)
        curve = roc_curve(batch)
        assert np.all(curve.y == 1.0)
        assert auc(curve) >= 1 - curve.x[0]

    def test_monotone(self):
        rng = make_rng(9)
        curve = roc_curve(batch_of(rng.normal(size=300), rng.normal(0.3, 1.0, 300)))
        assert np.all(np.diff(curve.y) >= 0)

    def test_drops_unresolvable_pf(self, caplog):
        batch = batch_of(np.arange(10.0), np.arange(10.0) + 0.5)
        curve = roc_curve(batch, grid=[0.01, 0.1, 0.5])
        np.testing.assert_allclose(curve.x, [0.1, 0.5])
        assert "dropping 1 pf values" in caplog.text

    def test_invalid_grid(self):
        with pytest.raises(HarnessError):
            roc_curve(batch_of([1.0, 2.0], [1.0, 2.0]), grid=[0.5, 0.2])

    def test_detection_probability(self):
        batch = batch_of(np.arange(1.0, 101.0), np.arange(50.0, 150.0))
        # eta = 90, so 91..149 are detections
        assert detection_probability(batch, 0.1) == pytest.approx(0.59)


class TestAuc:
    def test_diagonal(self):
        grid = np.linspace(0.1, 0.9, 9)
        assert auc(CurveTable("ROC", "d", grid, grid)) == pytest.approx(0.5)

    def test_three_points(self):
        curve = CurveTable("ROC", "d", [0.1, 0.4, 0.7], [0.3, 0.6, 0.9])
        expected = 0.5 * 0.1 * 0.3 + 0.5 * 0.3 * (0.3 + 0.6) + 0.5 * 0.3 * (0.6 + 0.9) + 0.5 * 0.3 * (0.9 + 1.0)
        assert auc(curve) == pytest.approx(expected)

    def test_power_curve_rejected(self):
        with pytest.raises(HarnessError):
            auc(CurveTable("POWER", "d", [-40.0], [0.5]))

    def test_standard_error(self):
        assert auc_standard_error(1.0, 100) == 0.0
        se = auc_standard_error(0.8, 2000)
        assert 0.0 < se < 0.01
        assert auc_standard_error(0.8, 500) > se


class TestRunTrials:
    """Test suite for the paired trial runner."""

    def test_shapes(self, model):
        sigma = 1.0
        detector_set = build_detector_set(["energy", "amplitude"], model, sigma)
        batches = run_trials(model, detector_set, 10, sigma, master_seed=3, workers=1)
        assert [b.detector_name for b in batches] == ["energy", "amplitude"]
        assert all(b.n_trials == 10 for b in batches)
        assert batches[0].fingerprint == batches[1].fingerprint

    def test_deterministic_across_workers(self, model):
        sigma = 2.0
        detector_set = build_detector_set(["mf", "rt-lrt", "filtered-energy"], model, sigma)
        serial = run_trials(model, detector_set, 60, sigma, master_seed=11, workers=1)
        parallel = run_trials(model, detector_set, 60, sigma, master_seed=11, workers=4)
        again = run_trials(model, detector_set, 60, sigma, master_seed=11, workers=4)
        for a, b, c in zip(serial, parallel, again):
            np.testing.assert_array_equal(a.h0_stats, b.h0_stats)
            np.testing.assert_array_equal(a.h1_stats, b.h1_stats)
            np.testing.assert_array_equal(b.h1_stats, c.h1_stats)

    def test_seed_changes_output(self, model):
        detector_set = build_detector_set(["energy"], model, 1.0)
        first = run_trials(model, detector_set, 10, 1.0, master_seed=1, workers=1)[0]
        second = run_trials(model, detector_set, 10, 1.0, master_seed=2, workers=1)[0]
        assert not np.array_equal(first.h1_stats, second.h1_stats)
        assert first.fingerprint != second.fingerprint

    def test_sigma_mismatch(self, model):
        detector_set = build_detector_set(["energy"], model, 1.0)
        with pytest.raises(HarnessError):
            run_trials(model, detector_set, 10, 2.0, master_seed=0)

    def test_too_few_trials(self, model):
        detector_set = build_detector_set(["energy"], model, 1.0)
        with pytest.raises(HarnessError):
            run_trials(model, detector_set, 1, 1.0, master_seed=0)

    def test_high_snr_energy(self):
        model = TelegraphModel(1.0, 0.999, 0.999, 1000)
        sigma = sigma_for_snr(model, 20.0)
        detector_set = build_detector_set(["energy"], model, sigma)
        batch = run_trials(model, detector_set, 200, sigma, master_seed=5)[0]
        assert auc(roc_curve(batch)) > 0.99


class TestPowerCurve:
    """Test suite for power curves."""

    def test_limits(self, model):
        n_trials = 400
        curves = power_curve(model, ["energy", "rt-lrt"], [-80.0, 30.0], 0.1, n_trials, master_seed=7)
        assert [c.detector_name for c in curves] == ["energy", "rt-lrt"]
        for curve in curves:
            assert curve.kind == "POWER"
            np.testing.assert_allclose(curve.x, [-80.0, 30.0])
            assert abs(curve.y[0] - 0.1) <= 3 / math.sqrt(n_trials)
            assert curve.y[1] == 1.0

    def test_grid_sorted(self, model):
        curves = power_curve(model, ["amplitude"], [-10.0, -20.0], 0.1, 20, master_seed=1, workers=1)
        np.testing.assert_allclose(curves[0].x, [-20.0, -10.0])

    def test_invalid_grid(self, model):
        with pytest.raises(HarnessError):
            power_curve(model, ["energy"], [], 0.1, 20, master_seed=1)
        with pytest.raises(HarnessError):
            power_curve(model, ["energy"], [-10.0, -10.0], 0.1, 20, master_seed=1)
