"""
Detector Registry Module

Builds named, ready-to-evaluate detectors for one signal model and noise
level, so the harness and the CLI can treat every statistic uniformly.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

from .approx_detectors import (
    approximate_lrt_statistic,
    hybrid_constants,
    hybrid_statistic,
    symmetric_expansion_statistic,
)
from .classical_detectors import (
    LowPassFilter,
    Statistic,
    amplitude_statistic,
    energy_statistic,
    matched_filter_statistic,
)
from .exceptions import ConfigurationError, DataValidationError
from .logging_config import get_logger
from .lrt_detectors import rt_log_lrt, rw_log_lrt
from .signal_models import (
    ObservationRecord,
    SignalModel,
    SignalPath,
    TelegraphModel,
    WalkModel,
    alpha_from_bandwidth,
    fit_telegraph_alpha_to_walk,
    fit_telegraph_p_to_paths,
    gen_random_walk,
    trial_seed,
    walk_rms_amplitude,
)

logger = get_logger(__name__)

DETECTOR_NAMES = (
    "mf",
    "rt-lrt",
    "rw-lrt",
    "filtered-energy",
    "hybrid",
    "amplitude",
    "energy",
    "approx-lrt",
    "symmetric-expansion",
)

# detectors that run on the telegraph surrogate; filtered-energy only needs its alpha
SURROGATE_DETECTORS = ("rt-lrt", "hybrid", "approx-lrt", "symmetric-expansion")

Evaluator = Callable[[ObservationRecord, Optional[SignalPath]], Statistic]


@dataclass
class DetectorParams:
    """Per-detector settings shared by a detector set."""

    alpha: Optional[float] = None
    omega_c: Optional[float] = None
    fit_paths: int = 20
    fit_seed: int = 0

    def __post_init__(self):
        if self.alpha is not None and self.omega_c is not None:
            raise ConfigurationError("detectors: give either alpha or omega_c, not both")
        if self.fit_paths < 1:
            raise ConfigurationError(f"detectors: fit_paths must be >= 1, got {self.fit_paths}")


@dataclass(frozen=True)
class DetectorSpec:
    """A named detector; evaluate(record, template) returns its Statistic."""

    name: str
    evaluate: Evaluator
    needs_template: bool = False


@dataclass(frozen=True)
class TelegraphSurrogate:
    """Telegraph parameters the telegraph-based detectors run with."""

    amplitude: float
    p: float
    q: float
    alpha: float
    fitted: bool = False


@dataclass
class DetectorSet:
    """Detectors built for one (model, sigma) operating point."""

    model: SignalModel
    sigma: float
    surrogate: Optional[TelegraphSurrogate]
    detectors: List[DetectorSpec] = field(default_factory=list)

    @property
    def names(self) -> List[str]:
        return [spec.name for spec in self.detectors]

    def evaluate_all(self, record: ObservationRecord, template: Optional[SignalPath] = None) -> Dict[str, float]:
        return {spec.name: spec.evaluate(record, template).value for spec in self.detectors}


def explicit_lpf_alpha(params: DetectorParams) -> Optional[float]:
    """LPF pole fixed by the settings, or None when it follows the surrogate."""
    if params.omega_c is not None:
        return alpha_from_bandwidth(params.omega_c)
    return params.alpha


def needs_surrogate(names: Sequence[str], model: SignalModel, params: DetectorParams) -> bool:
    """
    Whether building these detectors requires the telegraph surrogate.

    Telegraph models always get one since it costs nothing. For walks the
    surrogate is an autocorrelation fit over simulated paths and is only
    built for detectors that use it.
    """
    if isinstance(model, TelegraphModel):
        return True
    if any(name in SURROGATE_DETECTORS for name in names):
        return True
    return "filtered-energy" in names and explicit_lpf_alpha(params) is None


def telegraph_surrogate(model: SignalModel, params: DetectorParams) -> TelegraphSurrogate:
    """
    Telegraph parameters used by rt-lrt, hybrid and the expansions.

    A telegraph model is used as is, with alpha = p + q - 1 by default. A walk
    is replaced by a symmetric telegraph with p_hat from the autocorrelation
    fit and the walk's RMS amplitude; alpha then defaults to 2 p_hat - 1.
    """
    explicit_alpha = explicit_lpf_alpha(params)

    if isinstance(model, TelegraphModel):
        alpha = model.r if explicit_alpha is None else explicit_alpha
        return TelegraphSurrogate(model.amplitude, model.p, model.q, alpha)

    if model.is_symmetric:
        p_hat, fitted_alpha = fit_telegraph_alpha_to_walk(model, params.fit_paths, params.fit_seed)
    else:
        logger.warning("Asymmetric walk: fitting a symmetric telegraph surrogate to raw walk paths")
        paths = (gen_random_walk(model, trial_seed(params.fit_seed, i, "signal")) for i in range(params.fit_paths))
        p_hat = fit_telegraph_p_to_paths(paths)
        fitted_alpha = 2.0 * p_hat - 1.0

    alpha = fitted_alpha if explicit_alpha is None else explicit_alpha
    logger.debug(f"Walk surrogate: p_hat = {p_hat:.6f}, alpha = {alpha:.6f}")
    return TelegraphSurrogate(walk_rms_amplitude(model), p_hat, p_hat, alpha, fitted=True)


def _build_one(
    name: str,
    model: SignalModel,
    sigma: float,
    surrogate: Optional[TelegraphSurrogate],
    params: DetectorParams,
) -> DetectorSpec:
    s = surrogate

    if name == "mf":
        def evaluate_mf(record, template):
            if template is None:
                raise DataValidationError("The matched filter needs the clean signal path")
            return matched_filter_statistic(record.samples, template)

        return DetectorSpec(name, evaluate_mf, needs_template=True)

    if name == "amplitude":
        return DetectorSpec(name, lambda record, _: amplitude_statistic(record.samples))

    if name == "energy":
        return DetectorSpec(name, lambda record, _: energy_statistic(record.samples))

    if name == "filtered-energy":
        alpha = s.alpha if s is not None else explicit_lpf_alpha(params)
        lpf = LowPassFilter(alpha)
        return DetectorSpec(name, lambda record, _: energy_statistic(record.samples, lpf))

    if name == "rt-lrt":
        return DetectorSpec(name, lambda record, _: rt_log_lrt(record.samples, s.amplitude, sigma, s.p, s.q))

    if name == "rw-lrt":
        if not isinstance(model, WalkModel):
            raise ConfigurationError("detectors: rw-lrt requires a walk model")
        return DetectorSpec(name, lambda record, _: rw_log_lrt(record.samples, model, sigma))

    if name == "hybrid":
        constants = hybrid_constants(s.p, s.q, s.amplitude, sigma, s.alpha)
        return DetectorSpec(name, lambda record, _: hybrid_statistic(record.samples, constants, s.alpha))

    if name == "approx-lrt":
        constants = hybrid_constants(s.p, s.q, s.amplitude, sigma, s.alpha)
        return DetectorSpec(name, lambda record, _: approximate_lrt_statistic(record.samples, constants))

    if name == "symmetric-expansion":
        return DetectorSpec(
            name, lambda record, _: symmetric_expansion_statistic(record.samples, s.p, s.amplitude, sigma)
        )

    raise ConfigurationError(f"detectors: unknown detector '{name}' (known: {', '.join(DETECTOR_NAMES)})")


def build_detector_set(
    names: Sequence[str],
    model: SignalModel,
    sigma: float,
    params: Optional[DetectorParams] = None,
    surrogate: Optional[TelegraphSurrogate] = None,
) -> DetectorSet:
    """
    Build the requested detectors for one operating point.

    Args:
        names: Detector names from DETECTOR_NAMES
        model: Signal model the observations come from
        sigma: Noise standard deviation
        params: Detector settings
        surrogate: Precomputed telegraph surrogate (reused across SNR points);
            built here only when a requested detector needs it

    Returns:
        DetectorSet in the order given

    Raises:
        ConfigurationError: On unknown, duplicated or inapplicable names
    """
    if not names:
        raise ConfigurationError("detectors: at least one detector name is required")
    if len(set(names)) != len(names):
        raise ConfigurationError(f"detectors: duplicated names in {list(names)}")
    unknown = [name for name in names if name not in DETECTOR_NAMES]
    if unknown:
        raise ConfigurationError(f"detectors: unknown detector(s) {unknown} (known: {', '.join(DETECTOR_NAMES)})")

    params = params or DetectorParams()
    if surrogate is None and needs_surrogate(names, model, params):
        surrogate = telegraph_surrogate(model, params)
    detectors = [_build_one(name, model, sigma, surrogate, params) for name in names]
    return DetectorSet(model=model, sigma=sigma, surrogate=surrogate, detectors=detectors)
