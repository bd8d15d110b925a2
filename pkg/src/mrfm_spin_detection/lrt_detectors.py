"""
Likelihood Ratio Detectors Module

Exact log-likelihood-ratio tests for the two-state telegraph and the
reflecting random walk, computed by forward recursions over the predictive
state probabilities R_k, together with exhaustive path-enumeration oracles
for small instances.

Both recursions run in the log domain: each per-sample weight vector is
shifted by its maximum exponent before it is exponentiated, so long records
at very low SNR neither underflow nor overflow.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from numba import njit
from scipy.special import expit, logsumexp

from .classical_detectors import Statistic
from .exceptions import DataValidationError, NumericalError
from .logging_config import get_logger
from .signal_models import WalkModel

logger = get_logger(__name__)

RT_BRUTE_FORCE_MAX_SAMPLES = 20
RW_BRUTE_FORCE_MAX_SAMPLES = 12
RW_BRUTE_FORCE_MAX_HALF_STATES = 3


@dataclass(frozen=True)
class TelegraphPosterior:
    """Predictive probabilities R_k(+A) and R_k(-A)."""

    r_plus: float
    r_minus: float

    def __post_init__(self):
        for name in ("r_plus", "r_minus"):
            value = getattr(self, name)
            if not -1e-15 <= value <= 1.0 + 1e-15:
                raise DataValidationError(f"{name} must lie in [0, 1], got {value}")
        if abs(self.r_plus + self.r_minus - 1.0) > 1e-12:
            raise DataValidationError(f"Telegraph posterior must sum to 1, got {self.r_plus + self.r_minus}")

    @classmethod
    def initial(cls) -> "TelegraphPosterior":
        return cls(0.5, 0.5)


@dataclass(frozen=True, eq=False)
class WalkPosterior:
    """Predictive probability vector over the 2M+1 walk levels (index i holds level (i - M)s)."""

    probs: np.ndarray

    def __post_init__(self):
        if np.any(self.probs < 0.0):
            raise DataValidationError("Walk posterior entries must be non-negative")
        total = float(np.sum(self.probs))
        if abs(total - 1.0) > 1e-10:
            raise DataValidationError(f"Walk posterior must sum to 1, got {total}")

    @classmethod
    def initial(cls, model: WalkModel) -> "WalkPosterior":
        """Half the mass on -s and half on +s."""
        probs = np.zeros(model.n_states)
        probs[model.center_index - 1] = 0.5
        probs[model.center_index + 1] = 0.5
        return cls(probs)

    def support(self) -> np.ndarray:
        return np.flatnonzero(self.probs > 0.0)


def _as_samples(y) -> np.ndarray:
    samples = np.asarray(y, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise DataValidationError("LRT detectors need a non-empty one-dimensional sample vector")
    return samples


def _check_noise(sigma: float) -> None:
    if not sigma > 0:
        raise DataValidationError(f"Noise sigma must be positive, got {sigma}")


# -- random telegraph -------------------------------------------------------

def rt_posterior_step(
    prev: TelegraphPosterior,
    y_prev: float,
    amplitude: float,
    sigma: float,
    p: float,
    q: float,
) -> TelegraphPosterior:
    """
    Advance R_{k-1} to R_k given the sample y_{k-1}.

    star = e^{x} R(A) / (e^{x} R(A) + e^{-x} R(-A)) with x = A y / sigma^2 is
    evaluated as a logistic of the log-odds, then
    R_k(A) = p * star + (1 - q) * (1 - star).
    """
    _check_noise(sigma)
    x = amplitude * y_prev / sigma ** 2
    with np.errstate(divide="ignore"):
        log_odds = (np.log(prev.r_plus) + x) - (np.log(prev.r_minus) - x)
    star = float(expit(log_odds))
    r_plus = p * star + (1.0 - q) * (1.0 - star)
    return TelegraphPosterior(r_plus, 1.0 - r_plus)


@njit(cache=True, nogil=True)
def _rt_forward_kernel(y, scale, p, q):
    r_plus = 0.5
    total = 0.0
    for k in range(y.shape[0]):
        x = scale * y[k]
        a = math.log(r_plus) + x
        b = math.log(1.0 - r_plus) - x
        peak = max(a, b)
        term = peak + math.log(math.exp(a - peak) + math.exp(b - peak))
        total += term
        star = math.exp(a - term)
        r_plus = p * star + (1.0 - q) * (1.0 - star)
    return total, r_plus


def rt_forward(y, amplitude: float, sigma: float, p: float, q: float) -> Tuple[float, TelegraphPosterior]:
    """
    Run the telegraph recursion over y from R_0 = (1/2, 1/2).

    Returns:
        (log LRT, predictive posterior R_N for the sample after the record)
    """
    samples = _as_samples(y)
    _check_noise(sigma)
    total, r_plus = _rt_forward_kernel(samples, amplitude / sigma ** 2, p, q)
    return float(total), TelegraphPosterior(float(r_plus), 1.0 - float(r_plus))


def rt_log_lrt(y, amplitude: float, sigma: float, p: float, q: float) -> Statistic:
    """
    Random-telegraph log LRT: sum_k ln[R_k(A) e^{A y_k / s2} + R_k(-A) e^{-A y_k / s2}].

    This is the exact Gaussian log-likelihood ratio plus the data-independent
    constant N A^2 / (2 sigma^2), so it orders observations identically.
    Runs in O(N).
    """
    total, _ = rt_forward(y, amplitude, sigma, p, q)
    return Statistic(total, "rt-lrt")


def rt_brute_force_log_lrt(y, amplitude: float, sigma: float, p: float, q: float) -> Statistic:
    """
    Exhaustive marginalisation over all 2^N telegraph paths.

    Computes ln sum_paths Pr(path) exp(sum_k zeta_k y_k / sigma^2), which is on
    the same scale as rt_log_lrt. Limited to N <= 20.
    """
    samples = _as_samples(y)
    _check_noise(sigma)
    n = samples.size
    if n > RT_BRUTE_FORCE_MAX_SAMPLES:
        raise DataValidationError(
            f"Brute-force telegraph LRT is limited to N <= {RT_BRUTE_FORCE_MAX_SAMPLES}, got {n}"
        )

    scale = amplitude / sigma ** 2
    log_stay_high, log_leave_high = math.log(p), math.log(1.0 - p)
    log_stay_low, log_leave_low = math.log(q), math.log(1.0 - q)
    positions = np.arange(n)
    chunk = 1 << 14
    partial = []

    for start in range(0, 1 << n, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n))
        high = ((codes[:, None] >> positions[None, :]) & 1).astype(bool)
        prev, nxt = high[:, :-1], high[:, 1:]
        log_transitions = np.where(
            prev,
            np.where(nxt, log_stay_high, log_leave_high),
            np.where(nxt, log_leave_low, log_stay_low),
        ).sum(axis=1)
        signs = np.where(high, 1.0, -1.0)
        log_terms = math.log(0.5) + log_transitions + scale * (signs @ samples)
        partial.append(logsumexp(log_terms))

    return Statistic(float(logsumexp(partial)), "rt-lrt")


# -- random walk ------------------------------------------------------------

@njit(cache=True, nogil=True)
def _rw_step(probs, out, scratch, y, states, up, down, inv_var):
    """Weight, normalise and propagate one step; returns ln(R . W / W_center)."""
    n = probs.shape[0]
    peak = -np.inf
    for i in range(n):
        d = states[i]
        # log f_w(y - d) - log f_w(y); the Gaussian normaliser cancels
        scratch[i] = (y * d - 0.5 * d * d) * inv_var
        if probs[i] > 0.0 and scratch[i] > peak:
            peak = scratch[i]

    dot = 0.0
    for i in range(n):
        if probs[i] > 0.0:
            scratch[i] = probs[i] * math.exp(scratch[i] - peak)
        else:
            scratch[i] = 0.0
        dot += scratch[i]
    if not dot > 0.0:
        return np.nan

    for i in range(n):
        out[i] = 0.0
    for i in range(n):
        w = scratch[i] / dot
        if i > 0:
            out[i - 1] += w * down[i]
        if i < n - 1:
            out[i + 1] += w * up[i]
    return peak + math.log(dot)


@njit(cache=True, nogil=True)
def _rw_forward_kernel(y, probs0, states, up, down, inv_var):
    current = probs0.copy()
    following = np.empty_like(current)
    scratch = np.empty_like(current)
    total = 0.0
    for k in range(y.shape[0]):
        term = _rw_step(current, following, scratch, y[k], states, up, down, inv_var)
        if math.isnan(term):
            return np.nan, current
        total += term
        current, following = following, current
    return total, current


def _walk_arrays(model: WalkModel):
    return (
        np.ascontiguousarray(model.states),
        np.ascontiguousarray(model.up_probabilities),
        np.ascontiguousarray(model.down_probabilities),
    )


def rw_posterior_step(prev: WalkPosterior, y_prev: float, model: WalkModel, sigma: float) -> WalkPosterior:
    """
    Advance R_{k-1} to R_k: R_k = Q (W * R) / (W . R) with Q = P transposed.

    Applied as a three-term stencil, O(M) per step.

    Raises:
        NumericalError: If the weighted mass vanishes
    """
    _check_noise(sigma)
    if prev.probs.shape[0] != model.n_states:
        raise DataValidationError(f"Posterior has {prev.probs.shape[0]} states, model has {model.n_states}")
    states, up, down = _walk_arrays(model)
    out = np.empty(model.n_states)
    scratch = np.empty(model.n_states)
    probs = np.asarray(prev.probs, dtype=float)
    term = _rw_step(probs, out, scratch, float(y_prev), states, up, down, 1.0 / sigma ** 2)
    if math.isnan(term):
        raise NumericalError("Walk posterior weights vanished")
    return WalkPosterior(out)


def rw_forward(y, model: WalkModel, sigma: float) -> Tuple[float, WalkPosterior]:
    """
    Run the walk recursion over y from R_0 (half on -s, half on +s).

    Returns:
        (log LRT, predictive posterior R_N), O(MN) in total
    """
    samples = _as_samples(y)
    _check_noise(sigma)
    states, up, down = _walk_arrays(model)
    total, probs = _rw_forward_kernel(
        samples, WalkPosterior.initial(model).probs, states, up, down, 1.0 / sigma ** 2
    )
    if math.isnan(total):
        raise NumericalError("Walk posterior weights vanished during the forward recursion")
    return float(total), WalkPosterior(probs)


def rw_log_lrt(y, model: WalkModel, sigma: float) -> Statistic:
    """Random-walk log LRT: sum_k ln[(R_k . W_k) / W_k(center)]."""
    total, _ = rw_forward(y, model, sigma)
    return Statistic(total, "rw-lrt")


def rw_brute_force_log_lrt(y, model: WalkModel, sigma: float) -> Statistic:
    """
    Exhaustive marginalisation over every walk path allowed by P.

    Limited to N <= 12 and M <= 3.
    """
    samples = _as_samples(y)
    _check_noise(sigma)
    if samples.size > RW_BRUTE_FORCE_MAX_SAMPLES or model.half_states > RW_BRUTE_FORCE_MAX_HALF_STATES:
        raise DataValidationError(
            f"Brute-force walk LRT is limited to N <= {RW_BRUTE_FORCE_MAX_SAMPLES} and "
            f"M <= {RW_BRUTE_FORCE_MAX_HALF_STATES}, got N = {samples.size}, M = {model.half_states}"
        )

    states, up, down = _walk_arrays(model)
    inv_var = 1.0 / sigma ** 2
    center = model.center_index

    index = np.array([center - 1, center + 1])
    log_prob = np.full(2, math.log(0.5))
    log_ratio = (samples[0] * states[index] - 0.5 * states[index] ** 2) * inv_var

    for y_k in samples[1:]:
        candidates = np.concatenate([index - 1, index + 1])
        moves = np.concatenate([down[index], up[index]])
        keep = moves > 0.0
        log_prob = np.concatenate([log_prob, log_prob])[keep] + np.log(moves[keep])
        log_ratio = np.concatenate([log_ratio, log_ratio])[keep]
        index = candidates[keep]
        log_ratio = log_ratio + (y_k * states[index] - 0.5 * states[index] ** 2) * inv_var

    return Statistic(float(logsumexp(log_prob + log_ratio)), "rw-lrt")
