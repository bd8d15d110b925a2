"""
Unit tests for the telegraph and random-walk likelihood ratio detectors
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy.special import logsumexp
from scipy.stats import norm

from mrfm_spin_detection.exceptions import DataValidationError
from mrfm_spin_detection.lrt_detectors import (
    TelegraphPosterior,
    WalkPosterior,
    rt_brute_force_log_lrt,
    rt_forward,
    rt_log_lrt,
    rt_posterior_step,
    rw_brute_force_log_lrt,
    rw_forward,
    rw_log_lrt,
    rw_posterior_step,
)
from mrfm_spin_detection.signal_models import WalkModel, make_rng


def exact_telegraph_llr(y, amplitude, sigma, p, q):
    """Gaussian log-likelihood ratio by explicit enumeration of every +/-A path."""
    log_terms = []
    for signs in itertools.product((1.0, -1.0), repeat=len(y)):
        log_prob = math.log(0.5)
        for prev, nxt in zip(signs[:-1], signs[1:]):
            if prev > 0:
                log_prob += math.log(p if nxt > 0 else 1 - p)
            else:
                log_prob += math.log(q if nxt < 0 else 1 - q)
        log_like = sum(
            norm.logpdf(y_k, s * amplitude, sigma) - norm.logpdf(y_k, 0.0, sigma) for y_k, s in zip(y, signs)
        )
        log_terms.append(log_prob + log_like)
    return float(logsumexp(log_terms))


def exact_walk_llr(y, model, sigma):
    """Gaussian log-likelihood ratio by enumerating walk paths through the dense transition matrix."""
    matrix = model.transition_matrix()
    states = model.states
    center = model.center_index
    log_terms = []
    for start in (center - 1, center + 1):
        for moves in itertools.product((-1, 1), repeat=len(y) - 1):
            index = [start]
            for move in moves:
                index.append(index[-1] + move)
            if min(index) < 0 or max(index) >= model.n_states:
                continue
            prob = 0.5 * np.prod([matrix[a, b] for a, b in zip(index[:-1], index[1:])])
            if prob == 0.0:
                continue
            log_like = np.sum(norm.logpdf(y, states[index], sigma) - norm.logpdf(y, 0.0, sigma))
            log_terms.append(math.log(prob) + log_like)
    return float(logsumexp(log_terms))


def dense_walk_llr(y, model, sigma):
    """Forward recursion with full Gaussian densities and the dense matrix."""
    matrix = model.transition_matrix()
    probs = WalkPosterior.initial(model).probs.copy()
    total = 0.0
    for y_k in y:
        weights = norm.pdf(y_k, model.states, sigma)
        dot = probs @ weights
        total += math.log(dot) - norm.logpdf(y_k, 0.0, sigma)
        probs = matrix.T @ (weights * probs) / dot
    return total


class TestTelegraphPosterior:
    """Test suite for the telegraph posterior step."""

    def test_validation(self):
        with pytest.raises(DataValidationError):
            TelegraphPosterior(0.7, 0.7)
        with pytest.raises(DataValidationError):
            TelegraphPosterior(1.5, -0.5)

    def test_symmetric_fixed_point(self):
        step = rt_posterior_step(TelegraphPosterior.initial(), 0.0, 1.0, 1.0, 0.9, 0.9)
        assert step.r_plus == pytest.approx(0.5)
        assert step.r_minus == pytest.approx(0.5)

    def test_large_sample_limit(self):
        amplitude, sigma, p = 2.0, 3.0, 0.8
        step = rt_posterior_step(TelegraphPosterior.initial(), 1e6 * sigma ** 2 / amplitude, amplitude, sigma, p, 0.6)
        assert step.r_plus == pytest.approx(p, abs=1e-12)

    def test_general_step(self):
        p, q, y = 0.7, 0.6, 0.3
        star = math.exp(y) * 0.5 / (math.exp(y) * 0.5 + math.exp(-y) * 0.5)
        expected = p * star + (1 - q) * (1 - star)
        step = rt_posterior_step(TelegraphPosterior(0.5, 0.5), y, 1.0, 1.0, p, q)
        assert step.r_plus == pytest.approx(expected, abs=1e-14)
        assert step.r_plus + step.r_minus == pytest.approx(1.0, abs=1e-12)

    def test_one_step_range(self):
        rng = make_rng(21)
        for _ in range(2000):
            p, q = rng.uniform(0.01, 0.99, 2)
            r_plus = rng.uniform()
            y = rng.normal(0.0, 5.0)
            amplitude, sigma = rng.uniform(0.1, 3.0, 2)
            step = rt_posterior_step(TelegraphPosterior(r_plus, 1.0 - r_plus), y, amplitude, sigma, p, q)
            assert min(p, 1 - q) - 1e-12 <= step.r_plus <= max(p, 1 - q) + 1e-12

    def test_forward_matches_repeated_steps(self):
        rng = make_rng(3)
        y = rng.normal(0.5, 1.0, 30)
        posterior = TelegraphPosterior.initial()
        for y_k in y:
            posterior = rt_posterior_step(posterior, y_k, 0.5, 1.0, 0.9, 0.8)
        _, final = rt_forward(y, 0.5, 1.0, 0.9, 0.8)
        assert final.r_plus == pytest.approx(posterior.r_plus, abs=1e-12)


class TestRtLogLrt:
    """Test suite for the random-telegraph LRT."""

    @pytest.mark.parametrize("y0", [-2.0, 0.3, 5.0])
    def test_single_sample(self, y0):
        amplitude, sigma = 1.5, 2.0
        stat = rt_log_lrt([y0], amplitude, sigma, 0.9, 0.7)
        assert stat.value == pytest.approx(math.log(math.cosh(amplitude * y0 / sigma ** 2)), abs=1e-14)
        assert stat.detector_name == "rt-lrt"
        assert rt_brute_force_log_lrt([y0], amplitude, sigma, 0.9, 0.7).value == pytest.approx(stat.value)

    def test_zero_observation(self):
        assert rt_log_lrt(np.zeros(40), 1.0, 1.0, 0.95, 0.95).value == pytest.approx(0.0, abs=1e-14)
        assert rt_brute_force_log_lrt(np.zeros(10), 1.0, 1.0, 0.95, 0.95).value == pytest.approx(0.0, abs=1e-14)

    def test_offset_from_gaussian_llr(self):
        rng = make_rng(8)
        amplitude, sigma, p, q = 0.8, 1.3, 0.9, 0.6
        y = rng.normal(0.0, sigma, 9)
        shifted = rt_log_lrt(y, amplitude, sigma, p, q).value - len(y) * amplitude ** 2 / (2 * sigma ** 2)
        assert shifted == pytest.approx(exact_telegraph_llr(y, amplitude, sigma, p, q), rel=1e-10, abs=1e-12)

    def test_random_instances_match_brute_force(self):
        rng = make_rng(2024)
        grid = [0.5, 0.9, 0.9995]
        start = time.perf_counter()
        for _ in range(100):
            n = int(rng.integers(1, 13))
            ratio = float(rng.choice([0.01, 0.1, 1.0]))
            p, q = float(rng.choice(grid)), float(rng.choice(grid))
            sigma = 1.0
            amplitude = ratio * sigma
            mean = amplitude if rng.random() < 0.5 else 0.0
            y = rng.normal(mean, sigma, n)
            fast = rt_log_lrt(y, amplitude, sigma, p, q).value
            slow = rt_brute_force_log_lrt(y, amplitude, sigma, p, q).value
            assert fast == pytest.approx(slow, rel=1e-9, abs=1e-12)
        assert time.perf_counter() - start < 10.0

    def test_brute_force_limit(self):
        with pytest.raises(DataValidationError):
            rt_brute_force_log_lrt(np.zeros(21), 1.0, 1.0, 0.9, 0.9)

    def test_long_low_snr_record_is_finite(self):
        rng = make_rng(1)
        y = rng.normal(0.0, 56.234, 150_000)
        assert math.isfinite(rt_log_lrt(y, 1.0, 56.234, 0.9998, 0.9992).value)

    def test_invalid_input(self):
        with pytest.raises(DataValidationError):
            rt_log_lrt([], 1.0, 1.0, 0.9, 0.9)
        with pytest.raises(DataValidationError):
            rt_log_lrt([1.0], 1.0, 0.0, 0.9, 0.9)


class TestWalkPosterior:
    """Test suite for the walk posterior step."""

    @pytest.fixture
    def walk(self):
        return WalkModel(3, 0.4, 0.45, 0.55, 0.45, 0.55, 10)

    def test_initial(self, walk):
        probs = WalkPosterior.initial(walk).probs
        assert probs[2] == 0.5 and probs[4] == 0.5
        assert probs.sum() == 1.0

    def test_validation(self):
        with pytest.raises(DataValidationError):
            WalkPosterior(np.array([0.5, 0.6]))
        with pytest.raises(DataValidationError):
            WalkPosterior(np.array([1.5, -0.5]))

    def test_equal_weights_apply_transition(self, walk):
        prev = WalkPosterior(np.array([0.0, 0.1, 0.0, 0.6, 0.0, 0.3, 0.0]))
        step = rw_posterior_step(prev, 0.0, walk, sigma=1e12)
        np.testing.assert_allclose(step.probs, walk.transition_matrix().T @ prev.probs, atol=1e-12)

    def test_boundary_reflects(self, walk):
        prev = WalkPosterior(np.eye(walk.n_states)[0])
        step = rw_posterior_step(prev, 0.7, walk, sigma=1.0)
        np.testing.assert_allclose(step.probs, np.eye(walk.n_states)[1])

    def test_matches_dense_evaluation(self):
        model = WalkModel(1, 0.8, 0.5, 0.5, 0.5, 0.5, 10)
        prev = np.array([0.2, 0.5, 0.3])
        y, sigma = 0.9, 0.7
        weights = norm.pdf(y, model.states, sigma)
        expected = model.transition_matrix().T @ (weights * prev) / (weights @ prev)
        step = rw_posterior_step(WalkPosterior(prev), y, model, sigma)
        np.testing.assert_allclose(step.probs, expected, atol=1e-14)

    def test_state_count_mismatch(self, walk):
        with pytest.raises(DataValidationError):
            rw_posterior_step(WalkPosterior(np.array([0.5, 0.5])), 0.0, walk, 1.0)


class TestRwLogLrt:
    """Test suite for the random-walk LRT."""

    def test_single_sample(self):
        model = WalkModel(1, 0.6, 0.5, 0.5, 0.5, 0.5, 1)
        sigma, y0 = 0.9, 0.35

        def f(x):
            return norm.pdf(x, 0.0, sigma)

        expected = math.log((0.5 * f(y0 + 0.6) + 0.5 * f(y0 - 0.6)) / f(y0))
        stat = rw_log_lrt([y0], model, sigma)
        assert stat.value == pytest.approx(expected, abs=1e-13)
        assert stat.detector_name == "rw-lrt"

    def test_zero_sample(self):
        model = WalkModel(2, 0.5, 0.45, 0.55, 0.45, 0.55, 1)
        assert rw_log_lrt([0.0], model, 2.0).value == pytest.approx(-(0.5 ** 2) / (2 * 2.0 ** 2), abs=1e-15)

    @pytest.mark.parametrize("half_states", [1, 2])
    def test_matches_path_enumeration(self, half_states):
        rng = make_rng(half_states)
        model = WalkModel(half_states, 0.7, 0.45, 0.55, 0.4, 0.6, 8)
        y = rng.normal(0.3, 1.0, 8)
        assert rw_log_lrt(y, model, 1.0).value == pytest.approx(exact_walk_llr(y, model, 1.0), rel=1e-8)

    def test_random_instances_match_brute_force(self):
        rng = make_rng(99)
        start = time.perf_counter()
        for _ in range(50):
            half_states = int(rng.integers(1, 3))
            n = int(rng.integers(1, 9))
            k1 = float(rng.choice([0.45, 0.5, 0.52]))
            h1 = float(rng.choice([0.45, 0.48, 0.5]))
            model = WalkModel(half_states, float(rng.uniform(0.1, 1.5)), k1, 1 - k1, h1, 1 - h1, n)
            sigma = float(rng.uniform(0.5, 3.0))
            y = rng.normal(0.0, sigma, n)
            fast = rw_log_lrt(y, model, sigma).value
            slow = rw_brute_force_log_lrt(y, model, sigma).value
            assert fast == pytest.approx(slow, rel=1e-8, abs=1e-12)
        assert time.perf_counter() - start < 30.0

    def test_normaliser_cancels(self):
        rng = make_rng(6)
        model = WalkModel(4, 0.3, 0.45, 0.55, 0.45, 0.55, 200)
        y = rng.normal(0.0, 1.2, 200)
        assert rw_log_lrt(y, model, 1.2).value == pytest.approx(dense_walk_llr(y, model, 1.2), rel=1e-10, abs=1e-10)

    @pytest.mark.parametrize("n", [1, 2, 7, 50])
    def test_parity_of_support(self, n):
        model = WalkModel(5, 0.2, 0.45, 0.55, 0.45, 0.55, n)
        _, posterior = rw_forward(make_rng(n).normal(size=n), model, 1.0)
        support = posterior.support()
        assert support.size > 0
        assert np.all(support % 2 == (model.half_states + 1 + n) % 2)

    def test_brute_force_limits(self):
        with pytest.raises(DataValidationError):
            rw_brute_force_log_lrt(np.zeros(13), WalkModel(1, 1.0, 0.5, 0.5, 0.5, 0.5, 13), 1.0)
        with pytest.raises(DataValidationError):
            rw_brute_force_log_lrt(np.zeros(3), WalkModel(4, 1.0, 0.5, 0.5, 0.5, 0.5, 3), 1.0)


@pytest.mark.slow
class TestLongRecords:
    """Numerical stability and scaling over long records."""

    def test_walk_posterior_stays_normalised(self):
        model = WalkModel(10, 0.1, 0.5, 0.5, 0.5, 0.5, 10)
        rng = make_rng(17)
        samples = rng.normal(0.0, 1.0, 100_000)
        posterior = WalkPosterior.initial(model)
        for y_k in samples:
            posterior = rw_posterior_step(posterior, y_k, model, 1.0)
            assert abs(posterior.probs.sum() - 1.0) < 1e-10

    @pytest.mark.parametrize("detector", ["rt", "rw"])
    def test_linear_runtime(self, detector):
        model = WalkModel(10, 0.1, 0.5, 0.5, 0.5, 0.5, 10)
        rng = make_rng(4)
        short, long = rng.normal(size=200_000), rng.normal(size=400_000)

        def evaluate(y):
            if detector == "rt":
                return rt_log_lrt(y, 1.0, 1.0, 0.9995, 0.9995)
            return rw_log_lrt(y, model, 1.0)

        evaluate(short[:10])

        def best_time(y):
            timings = []
            for _ in range(3):
                start = time.perf_counter()
                evaluate(y)
                timings.append(time.perf_counter() - start)
            return min(timings)

        assert best_time(long) <= 2.5 * best_time(short)
