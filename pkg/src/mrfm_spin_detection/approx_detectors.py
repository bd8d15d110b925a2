"""
Approximation Detectors Module

Second-order expansions of the telegraph LRT in the low-SNR limit. Every
statistic here is a quadratic (plus linear) form in y whose geometric
cross-term sum_{j<k} rho^(k-j) y_j y_k is evaluated in O(N) with the running
sum m_k = rho (m_{k-1} + y_{k-1}).
"""

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .classical_detectors import Statistic
from .exceptions import DataValidationError, ModelError
from .logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class HybridConstants:
    """
    Model-dependent constants of the hybrid filtered-energy/amplitude/energy detector.

    Attributes:
        r: Telegraph correlation coefficient p + q - 1
        c_m: Stationary mean coefficient (p - q) / (2 - p - q)
        c_i: Weight of the amplitude term sum(y)
        c_ii: Extra weight of the energy term sum(y^2)
        scale_c: Overall scale of the second-order LRT expansion
        gain_d: Filtered-energy scale (1 - alpha^2) / (2 alpha)
        alpha: LPF pole the constants were built for
    """

    r: float
    c_m: float
    c_i: float
    c_ii: float
    scale_c: float
    gain_d: float
    alpha: float

    def __post_init__(self):
        if not abs(self.r) < 1.0:
            raise ModelError(f"Telegraph correlation must satisfy |r| < 1, got {self.r}")


def hybrid_constants(p: float, q: float, amplitude: float, sigma: float, alpha: float) -> HybridConstants:
    """
    Build the hybrid detector constants for a telegraph (p, q, A) in noise sigma.

    Raises:
        ModelError: If any parameter is outside its open range
    """
    if not (0.0 < p < 1.0 and 0.0 < q < 1.0):
        raise ModelError(f"Transition probabilities must lie in (0, 1), got p={p}, q={q}")
    if not amplitude > 0:
        raise ModelError(f"Amplitude must be positive, got {amplitude}")
    if not sigma > 0:
        raise ModelError(f"Noise sigma must be positive, got {sigma}")
    if alpha == 0.0:
        raise ModelError("LPF pole alpha = 0 leaves the filtered-energy gain undefined")
    if not 0.0 < alpha < 1.0:
        raise ModelError(f"LPF pole must lie in (0, 1), got {alpha}")

    r = p + q - 1.0
    return HybridConstants(
        r=r,
        c_m=(p - q) / (2.0 - p - q),
        c_i=(p - q) * sigma ** 2 / (4.0 * q * (1.0 - r) * amplitude),
        c_ii=r * (1.0 - q) / (2.0 * q * (1.0 - r)),
        scale_c=4.0 * q * (1.0 - q) * (amplitude / sigma ** 2) ** 2 / (1.0 - r),
        gain_d=(1.0 - alpha ** 2) / (2.0 * alpha),
        alpha=alpha,
    )


def _as_samples(y) -> np.ndarray:
    samples = np.asarray(y, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise DataValidationError("Approximation detectors need a non-empty one-dimensional sample vector")
    return samples


def _geometric_cross_sum(samples: np.ndarray, ratio: float) -> float:
    running = signal.lfilter([0.0, ratio], [1.0, -ratio], samples)
    return float(samples @ running)


def cross_term_statistic(y, ratio: float) -> Statistic:
    """sum_{j<k} ratio^(k-j) y_j y_k."""
    samples = _as_samples(y)
    return Statistic(_geometric_cross_sum(samples, ratio), "cross-term")


def symmetric_expansion_statistic(y, p: float, amplitude: float, sigma: float) -> Statistic:
    """
    Symmetric-telegraph expansion
    2p (A/s2)^2 [sum_{j<k} (2p-1)^(k-j) y_j y_k + (1 - 1/(4p)) sum y_k^2].
    """
    samples = _as_samples(y)
    if not 0.0 < p < 1.0:
        raise ModelError(f"Transition probability must lie in (0, 1), got {p}")
    scale = 2.0 * p * (amplitude / sigma ** 2) ** 2
    value = scale * (
        _geometric_cross_sum(samples, 2.0 * p - 1.0) + (1.0 - 1.0 / (4.0 * p)) * float(samples @ samples)
    )
    return Statistic(value, "symmetric-expansion")


def filtered_energy_closed_form(y, alpha: float) -> Statistic:
    """
    Large-N form of the filtered energy:
    D [sum_{j<k} alpha^(k-j) y_j y_k + (alpha / (1 + alpha)) sum y_k^2].

    Differs from energy_statistic(y, LowPassFilter(alpha)) by O(1) edge terms.
    """
    samples = _as_samples(y)
    if not 0.0 < alpha < 1.0:
        raise ModelError(f"LPF pole must lie in (0, 1), got {alpha}")
    gain = (1.0 - alpha ** 2) / (2.0 * alpha)
    value = gain * (_geometric_cross_sum(samples, alpha) + alpha / (1.0 + alpha) * float(samples @ samples))
    return Statistic(value, "filtered-energy")


def hybrid_statistic(y, constants: HybridConstants, alpha: float) -> Statistic:
    """
    Hybrid detector T_2(y) + D [C_I sum y_k + C_II sum y_k^2].

    Args:
        y: Observation samples
        constants: Output of hybrid_constants built with the same alpha
        alpha: LPF pole

    Returns:
        Statistic named "hybrid"
    """
    samples = _as_samples(y)
    if not np.isclose(constants.alpha, alpha, rtol=0.0, atol=1e-15):
        raise ModelError(f"Hybrid constants were built for alpha={constants.alpha}, not {alpha}")
    filtered = filtered_energy_closed_form(samples, alpha).value
    value = filtered + constants.gain_d * (
        constants.c_i * float(np.sum(samples)) + constants.c_ii * float(samples @ samples)
    )
    return Statistic(value, "hybrid")


def approximate_lrt_statistic(y, constants: HybridConstants) -> Statistic:
    """
    Second-order telegraph LRT approximation
    C {C_I sum y + sum_{j<k} r^(k-j) y_j y_k + (1/2 + C_II) sum y^2}.
    """
    samples = _as_samples(y)
    value = constants.scale_c * (
        constants.c_i * float(np.sum(samples))
        + _geometric_cross_sum(samples, constants.r)
        + (0.5 + constants.c_ii) * float(samples @ samples)
    )
    return Statistic(value, "approx-lrt")


def cross_term_gain(alpha: float, p: float) -> float:
    """
    G = alpha (2p - 1) / (1 - alpha (2p - 1)).

    Under a symmetric telegraph the H1 - H0 mean of the alpha cross-term sum
    is approximately G A^2 (N - 1).
    """
    product = alpha * (2.0 * p - 1.0)
    if product >= 1.0:
        raise ModelError(f"Cross-term gain needs alpha (2p - 1) < 1, got {product}")
    return product / (1.0 - product)


def cross_term_gain_matched(p: float) -> float:
    """G at alpha = 2p - 1: 1/(4(1 - p)) + 1/(4p) - 1."""
    if not 0.0 < p < 1.0:
        raise ModelError(f"Transition probability must lie in (0, 1), got {p}")
    return 1.0 / (4.0 * (1.0 - p)) + 1.0 / (4.0 * p) - 1.0
