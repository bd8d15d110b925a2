"""
Classical Detectors Module

Amplitude, energy and filtered-energy statistics, the single-pole low-pass
prefilter, and the omniscient matched filter.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal

from .exceptions import DataValidationError, ModelError
from .logging_config import get_logger
from .signal_models import SignalPath, alpha_from_bandwidth

logger = get_logger(__name__)


@dataclass(frozen=True)
class Statistic:
    """A detector output value labelled with the detector that produced it."""

    value: float
    detector_name: str

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))
        if not np.isfinite(self.value):
            raise DataValidationError(f"Detector '{self.detector_name}' produced a non-finite statistic")


@dataclass(frozen=True)
class LowPassFilter:
    """
    First-order single-pole LPF H(z) = ((1 - alpha) / 2) (1 + z^-1) / (1 - alpha z^-1).

    The DC gain is exactly 1 for every stable pole.
    """

    alpha: float

    def __post_init__(self):
        if not abs(self.alpha) < 1.0:
            raise ModelError(f"LPF pole must satisfy |alpha| < 1, got {self.alpha}")

    @classmethod
    def from_bandwidth(cls, omega_c: float) -> "LowPassFilter":
        return cls(alpha_from_bandwidth(omega_c))

    @property
    def numerator(self) -> np.ndarray:
        gain = 0.5 * (1.0 - self.alpha)
        return np.array([gain, gain])

    @property
    def denominator(self) -> np.ndarray:
        return np.array([1.0, -self.alpha])

    def impulse_response(self, n: int) -> np.ndarray:
        """First n taps: h_0 = (1 - alpha)/2, h_k = ((1 - alpha^2)/2) alpha^(k-1)."""
        impulse = np.zeros(n)
        if n:
            impulse[0] = 1.0
        return lpf_apply(self, impulse)


def _as_samples(y) -> np.ndarray:
    samples = np.asarray(y, dtype=float)
    if samples.ndim != 1 or samples.size == 0:
        raise DataValidationError("Detectors need a non-empty one-dimensional sample vector")
    return samples


def amplitude_statistic(y) -> Statistic:
    """|mean(y)|."""
    samples = _as_samples(y)
    return Statistic(abs(float(np.mean(samples))), "amplitude")


def lpf_apply(lpf: LowPassFilter, y) -> np.ndarray:
    """
    Causal filter output a_i = alpha a_{i-1} + ((1 - alpha)/2)(y_i + y_{i-1}).

    The filter starts from rest (y_{-1} = a_{-1} = 0).
    """
    samples = np.asarray(y, dtype=float)
    return signal.lfilter(lpf.numerator, lpf.denominator, samples)


def energy_statistic(y, lpf: Optional[LowPassFilter] = None) -> Statistic:
    """
    Sum of squares of y, or of the prefiltered sequence when a filter is given.

    Args:
        y: Observation samples
        lpf: Optional low-pass prefilter

    Returns:
        Statistic named "energy" or "filtered-energy"
    """
    samples = _as_samples(y)
    if lpf is None:
        return Statistic(float(samples @ samples), "energy")
    filtered = lpf_apply(lpf, samples)
    return Statistic(float(filtered @ filtered), "filtered-energy")


def matched_filter_statistic(y, clean: SignalPath) -> Statistic:
    """Correlation sum(zeta_i * y_i) against the true signed realisation."""
    samples = _as_samples(y)
    template = np.asarray(clean.values, dtype=float)
    if template.shape != samples.shape:
        raise DataValidationError(
            f"Matched filter template length {template.size} does not match {samples.size} samples"
        )
    return Statistic(float(template @ samples), "mf")
