"""
MRFM Spin Detection Configuration Module

Experiment configuration sections, their flat-text and JSON file formats,
and validation.

Flat format, one setting per line::

    # comment
    model.type = telegraph
    model.rate = 0.5
    noise.snr_db = -35
    run.duration = 60
    detectors.names = mf, rt-lrt, filtered-energy
"""

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union, get_args, get_origin

from .detector_registry import DETECTOR_NAMES, DetectorParams
from .exceptions import ConfigurationError, FileNotFoundError, ModelError
from .logging_config import get_logger
from .signal_models import (
    ELECTRON_MOMENT,
    SignalModel,
    TelegraphModel,
    WalkModel,
    physical_amplitude,
    sigma_for_snr,
    telegraph_p_from_rate,
)

logger = get_logger(__name__)

DEFAULT_DETECTORS = ["mf", "rt-lrt", "filtered-energy", "hybrid", "amplitude", "energy"]
VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


@dataclass
class ModelSection:
    """Signal model under H1."""

    type: str = "telegraph"
    amplitude: Optional[float] = None

    # telegraph
    p: Optional[float] = None
    q: Optional[float] = None
    rate: Optional[float] = None

    # walk
    half_states: Optional[int] = None
    step: Optional[float] = None
    k1: Optional[float] = None
    k2: Optional[float] = None
    h1: Optional[float] = None
    h2: Optional[float] = None


@dataclass
class PhysicsSection:
    """Cantilever and field parameters; used when model.amplitude is not set."""

    spring_k: float = 1e-3
    omega0: float = 2.0 * math.pi * 1e4
    b1: float = 2e-4
    gradient: float = 2e6
    mu: float = ELECTRON_MOMENT


@dataclass
class NoiseSection:
    snr_db: Optional[float] = None
    sigma: Optional[float] = None


@dataclass
class RunSection:
    """Record length and Monte-Carlo settings."""

    n_samples: Optional[int] = None
    duration: Optional[float] = None
    sample_period: float = 1e-3
    n_trials: int = 2000
    seed: int = 0
    pf: float = 0.1
    snr_grid: Optional[List[float]] = None
    workers: Optional[int] = None


@dataclass
class DetectorSection:
    names: List[str] = None
    alpha: Optional[float] = None
    omega_c: Optional[float] = None
    fit_paths: int = 20

    def __post_init__(self):
        if self.names is None:
            self.names = list(DEFAULT_DETECTORS)


@dataclass
class LoggingSection:
    level: str = "INFO"
    log_file: Optional[str] = None


SECTION_TYPES = {
    "model": ModelSection,
    "physics": PhysicsSection,
    "noise": NoiseSection,
    "run": RunSection,
    "detectors": DetectorSection,
    "logging": LoggingSection,
}


@dataclass
class ExperimentConfig:
    """Complete experiment configuration."""

    model: ModelSection = None
    physics: PhysicsSection = None
    noise: NoiseSection = None
    run: RunSection = None
    detectors: DetectorSection = None
    logging: LoggingSection = None

    def __post_init__(self):
        for name, section_type in SECTION_TYPES.items():
            if getattr(self, name) is None:
                setattr(self, name, section_type())

    @property
    def n_samples(self) -> int:
        if self.run.n_samples is not None:
            return self.run.n_samples
        if self.run.duration is None:
            raise ConfigurationError("run: one of n_samples or duration is required")
        return int(round(self.run.duration / self.run.sample_period))

    @property
    def amplitude(self) -> float:
        if self.model.amplitude is not None:
            return self.model.amplitude
        return physical_amplitude(
            self.physics.spring_k, self.physics.omega0, self.physics.b1, self.physics.gradient, self.physics.mu
        )

    def build_model(self) -> SignalModel:
        """
        Construct the signal model described by the model section.

        Raises:
            ConfigurationError: If the section is incomplete or its values are invalid
        """
        section = self.model
        try:
            if section.type == "telegraph":
                if section.rate is not None:
                    p = q = telegraph_p_from_rate(section.rate, self.run.sample_period)
                elif section.p is not None and section.q is not None:
                    p, q = section.p, section.q
                else:
                    raise ConfigurationError("model: telegraph needs either rate or both p and q")
                return TelegraphModel(self.amplitude, p, q, self.n_samples, self.run.sample_period)

            if section.type == "walk":
                half_states = section.half_states if section.half_states is not None else 10
                step = section.step if section.step is not None else self.amplitude / half_states
                return WalkModel(
                    half_states=half_states,
                    step=step,
                    k1=_default(section.k1, 0.5),
                    k2=_default(section.k2, 0.5),
                    h1=_default(section.h1, 0.5),
                    h2=_default(section.h2, 0.5),
                    n_samples=self.n_samples,
                    sample_period=self.run.sample_period,
                )
        except ModelError as e:
            raise ConfigurationError(f"model: {e}") from e

        raise ConfigurationError(f"model: unknown type '{section.type}' (expected telegraph or walk)")

    def sigma_for(self, model: SignalModel) -> float:
        if self.noise.sigma is not None:
            return self.noise.sigma
        if self.noise.snr_db is None:
            raise ConfigurationError("noise: one of snr_db or sigma is required")
        return sigma_for_snr(model, self.noise.snr_db)

    def detector_params(self) -> DetectorParams:
        return DetectorParams(
            alpha=self.detectors.alpha,
            omega_c=self.detectors.omega_c,
            fit_paths=self.detectors.fit_paths,
            fit_seed=self.run.seed,
        )


def _default(value, fallback):
    return fallback if value is None else value


# -- value coercion ---------------------------------------------------------

def _coerce(raw: Any, annotation, where: str):
    """Convert a raw text or JSON value to the annotated field type."""
    origin = get_origin(annotation)
    if origin is Union:
        inner = [arg for arg in get_args(annotation) if arg is not type(None)][0]
        if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none")):
            return None
        return _coerce(raw, inner, where)
    if origin in (list, List):
        (item_type,) = get_args(annotation)
        items = raw if isinstance(raw, list) else [part for part in str(raw).split(",") if part.strip()]
        return [_coerce(item.strip() if isinstance(item, str) else item, item_type, where) for item in items]

    try:
        if annotation is float:
            return float(raw)
        if annotation is int:
            if isinstance(raw, int) or (isinstance(raw, str) and raw.strip().lstrip("+-").isdigit()):
                return int(raw)
            number = float(raw)
            if not number.is_integer():
                raise ValueError(f"{raw} is not an integer")
            return int(number)
        if annotation is str:
            return str(raw).strip()
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{where}: invalid value {raw!r} ({e})") from e
    raise ConfigurationError(f"{where}: unsupported field type {annotation}")


def _section_from_dict(name: str, values: Dict[str, Any]):
    section_type = SECTION_TYPES[name]
    known = {f.name: f for f in fields(section_type)}
    kwargs = {}
    for key, raw in values.items():
        if key not in known:
            logger.warning(f"Ignoring unknown configuration key {name}.{key}")
            continue
        annotation = known[key].type
        kwargs[key] = _coerce(raw, annotation, f"{name}.{key}")
    return section_type(**kwargs)


def config_from_dict(config_dict: Dict[str, Dict[str, Any]]) -> ExperimentConfig:
    """Build a configuration from nested section dictionaries; the model section is required."""
    if "model" not in config_dict:
        raise ConfigurationError("Missing required section: model")
    sections = {}
    for name, values in config_dict.items():
        if name not in SECTION_TYPES:
            logger.warning(f"Ignoring unknown configuration section '{name}'")
            continue
        if not isinstance(values, dict):
            raise ConfigurationError(f"{name}: section must be a mapping")
        sections[name] = _section_from_dict(name, values)
    return ExperimentConfig(**sections)


def config_to_dict(config: ExperimentConfig) -> Dict[str, Dict[str, Any]]:
    """Nested dictionaries with unset (None) values left out."""
    return {
        name: {key: value for key, value in asdict(getattr(config, name)).items() if value is not None}
        for name in SECTION_TYPES
    }


def parse_flat(text: str) -> ExperimentConfig:
    """Parse the flat `section.key = value` format."""
    config_dict: Dict[str, Dict[str, str]] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {number}: expected 'section.key = value', got {line.strip()!r}")
        dotted, value = (part.strip() for part in stripped.split("=", 1))
        if "." not in dotted:
            raise ConfigurationError(f"line {number}: key {dotted!r} has no section prefix")
        section, key = dotted.split(".", 1)
        config_dict.setdefault(section, {})[key] = value
    return config_from_dict(config_dict)


def _format_value(value: Any) -> str:
    if isinstance(value, list):
        return ", ".join(_format_value(item) for item in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_flat(config: ExperimentConfig) -> str:
    lines = []
    for name, values in config_to_dict(config).items():
        for key, value in values.items():
            lines.append(f"{name}.{key} = {_format_value(value)}")
        lines.append("")
    return "\n".join(lines)


class ConfigurationManager:
    """Loads, saves and validates experiment configuration files."""

    def __init__(self, config_file: Path):
        """
        Initialize configuration manager.

        Args:
            config_file: Path to a .json file or a flat-format file (any other suffix)
        """
        self.config_file = Path(config_file)
        self._config: Optional[ExperimentConfig] = None

    @property
    def is_json(self) -> bool:
        return self.config_file.suffix.lower() == ".json"

    def load_config(self) -> ExperimentConfig:
        """
        Load the configuration file.

        Raises:
            FileNotFoundError: If the file does not exist
            ConfigurationError: If the file cannot be parsed
        """
        if not self.config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {self.config_file}")
        logger.info(f"Loading configuration from {self.config_file}")
        try:
            text = self.config_file.read_text()
            if self.is_json:
                self._config = config_from_dict(json.loads(text))
            else:
                self._config = parse_flat(text)
        except ConfigurationError:
            raise
        except (OSError, ValueError) as e:
            raise ConfigurationError(f"Failed to load configuration {self.config_file}: {e}") from e
        return self._config

    def save_config(self, config: Optional[ExperimentConfig] = None) -> None:
        """
        Save configuration to file.

        Args:
            config: Configuration to save (uses the loaded one if None)
        """
        config_to_save = config or self._config
        if config_to_save is None:
            raise ConfigurationError("No configuration to save")
        try:
            self.config_file.parent.mkdir(parents=True, exist_ok=True)
            if self.is_json:
                self.config_file.write_text(json.dumps(config_to_dict(config_to_save), indent=2))
            else:
                self.config_file.write_text(serialize_flat(config_to_save))
        except OSError as e:
            raise ConfigurationError(f"Failed to save configuration: {e}") from e
        logger.info(f"Configuration saved to {self.config_file}")

    def validate_config(self, config: Optional[ExperimentConfig] = None) -> List[str]:
        """
        Validate configuration settings.

        Args:
            config: Configuration to validate (uses the loaded one if None)

        Returns:
            List of validation errors (empty if valid)
        """
        return validate_config(config or self._config)


def validate_config(config: Optional[ExperimentConfig]) -> List[str]:
    """Check the cross-field rules of a configuration; each error names its section."""
    if config is None:
        return ["No configuration to validate"]

    errors = []
    model = config.model
    if model.type not in ("telegraph", "walk"):
        errors.append(f"model: type must be telegraph or walk, got '{model.type}'")
    if model.type == "telegraph":
        has_pq = model.p is not None or model.q is not None
        if model.rate is not None and has_pq:
            errors.append("model: give either rate or p and q, not both")
        elif model.rate is None and (model.p is None or model.q is None):
            errors.append("model: telegraph needs either rate or both p and q")
    if model.type == "walk":
        k1, k2 = _default(model.k1, 0.5), _default(model.k2, 0.5)
        h1, h2 = _default(model.h1, 0.5), _default(model.h2, 0.5)
        if abs(k1 + k2 - 1.0) > 1e-12 or abs(h1 + h2 - 1.0) > 1e-12:
            errors.append("model: walk needs k1 + k2 = 1 and h1 + h2 = 1")
    if model.amplitude is not None and model.amplitude <= 0:
        errors.append("model: amplitude must be positive")

    if (config.noise.snr_db is None) == (config.noise.sigma is None):
        errors.append("noise: exactly one of snr_db or sigma is required")
    if config.noise.sigma is not None and config.noise.sigma <= 0:
        errors.append("noise: sigma must be positive")

    run = config.run
    if (run.n_samples is None) == (run.duration is None):
        errors.append("run: exactly one of n_samples or duration is required")
    if run.n_samples is not None and run.n_samples < 1:
        errors.append("run: n_samples must be >= 1")
    if run.sample_period <= 0:
        errors.append("run: sample_period must be positive")
    if run.n_trials < 2:
        errors.append("run: n_trials must be >= 2")
    if not 0.0 < run.pf < 1.0:
        errors.append("run: pf must lie in (0, 1)")
    if run.workers is not None and run.workers < 1:
        errors.append("run: workers must be >= 1")

    unknown = [name for name in config.detectors.names if name not in DETECTOR_NAMES]
    if unknown:
        errors.append(f"detectors: unknown names {unknown}")
    if not config.detectors.names:
        errors.append("detectors: names must not be empty")
    if "rw-lrt" in config.detectors.names and model.type != "walk":
        errors.append("detectors: rw-lrt requires model.type = walk")
    if config.detectors.alpha is not None and config.detectors.omega_c is not None:
        errors.append("detectors: give either alpha or omega_c, not both")

    if config.logging.level not in VALID_LOG_LEVELS:
        errors.append(f"logging: level must be one of {VALID_LOG_LEVELS}")

    return errors
