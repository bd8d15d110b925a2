"""
Result File Parser

Reads and writes the CSV files exchanged by the command-line tools:
observation records (`index,value`), ROC curves (`pf,pd,detector`) and power
curves (`snr_db,pd,detector`). Metadata travels as `# key=value` comment lines
above the header.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .exceptions import DataValidationError, FileNotFoundError, ParseError
from .harness import CurveTable
from .logging_config import get_logger
from .signal_models import ObservationRecord, SignalModel, TelegraphModel

logger = get_logger(__name__)

OBSERVATION_COLUMNS = ["index", "value"]
CURVE_COLUMNS = {"ROC": ["pf", "pd", "detector"], "POWER": ["snr_db", "pd", "detector"]}
CURVE_FLOAT_FORMAT = "%.12g"
# enough digits for float64 samples to read back bit for bit
SAMPLE_FLOAT_FORMAT = "%.17g"


def format_metadata_value(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def model_metadata(model: SignalModel) -> Dict[str, object]:
    """Metadata lines describing a signal model."""
    if isinstance(model, TelegraphModel):
        return {
            "model": "telegraph",
            "amplitude": model.amplitude,
            "p": model.p,
            "q": model.q,
            "N": model.n_samples,
            "T_s": model.sample_period,
        }
    return {
        "model": "walk",
        "M": model.half_states,
        "s": model.step,
        "K1": model.k1,
        "K2": model.k2,
        "H1": model.h1,
        "H2": model.h2,
        "N": model.n_samples,
        "T_s": model.sample_period,
    }


@dataclass
class ObservationFile:
    """Samples and metadata read from an observation CSV."""

    samples: np.ndarray
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def sigma(self) -> Optional[float]:
        value = self.metadata.get("sigma")
        return float(value) if value is not None else None

    def to_record(self, sigma: Optional[float] = None) -> ObservationRecord:
        """
        Wrap the samples as an ObservationRecord.

        Args:
            sigma: Noise level; falls back to the `sigma` metadata line
        """
        sigma = sigma if sigma is not None else self.sigma
        if sigma is None:
            raise DataValidationError("Observation file carries no sigma and none was given")
        hypothesis = self.metadata.get("hypothesis", "H1")
        seed = int(self.metadata.get("seed", 0))
        return ObservationRecord(samples=self.samples, sigma=sigma, hypothesis=hypothesis, seed=seed)


class ResultsParser:
    """Reader and writer for observation and curve CSV files."""

    def _write(
        self,
        frame: pd.DataFrame,
        metadata: Dict[str, object],
        output_file: Path,
        float_format: str = CURVE_FLOAT_FORMAT,
    ) -> None:
        output_file = Path(output_file)
        try:
            output_file.parent.mkdir(parents=True, exist_ok=True)
            with open(output_file, "w", newline="", encoding="utf-8") as handle:
                for key, value in metadata.items():
                    handle.write(f"# {key}={format_metadata_value(value)}\n")
                frame.to_csv(handle, index=False, float_format=float_format, lineterminator="\n")
        except OSError as e:
            raise ParseError(f"Failed to write {output_file}: {e}") from e
        logger.info(f"Saved {len(frame)} rows to {output_file}")

    def _read(self, input_file: Path, columns: Sequence[str]):
        input_file = Path(input_file)
        if not input_file.exists():
            raise FileNotFoundError(f"Result file not found: {input_file}")
        if not input_file.is_file():
            raise ParseError(f"Path is not a file: {input_file}")

        metadata: Dict[str, str] = {}
        try:
            with open(input_file, encoding="utf-8") as handle:
                for line in handle:
                    if not line.startswith("#"):
                        break
                    key, sep, value = line[1:].strip().partition("=")
                    if sep:
                        metadata[key.strip()] = value.strip()
            frame = pd.read_csv(input_file, comment="#", float_precision="round_trip")
        except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise ParseError(f"Failed to read {input_file}: {e}") from e

        if list(frame.columns) != list(columns):
            raise ParseError(
                f"{input_file}: expected columns {','.join(columns)}, found {','.join(map(str, frame.columns))}"
            )
        return frame, metadata

    def save_observation(
        self,
        record: ObservationRecord,
        output_file: Path,
        metadata: Optional[Dict[str, object]] = None,
    ) -> None:
        """
        Save one observation record.

        Args:
            record: Observation to save
            output_file: Destination CSV
            metadata: Extra lines (model parameters) placed before hypothesis, sigma and seed
        """
        lines = dict(metadata or {})
        lines.update({"hypothesis": record.hypothesis, "sigma": record.sigma, "seed": record.seed})
        frame = pd.DataFrame({"index": np.arange(record.n_samples), "value": record.samples})
        self._write(frame, lines, output_file, SAMPLE_FLOAT_FORMAT)

    def parse_observation(self, input_file: Path) -> ObservationFile:
        """
        Read an observation CSV.

        Raises:
            FileNotFoundError: If the file does not exist
            ParseError: If the header or the index column is wrong
        """
        frame, metadata = self._read(input_file, OBSERVATION_COLUMNS)
        if frame.empty:
            raise ParseError(f"{input_file}: no samples")
        if not np.array_equal(frame["index"].to_numpy(), np.arange(len(frame))):
            raise ParseError(f"{input_file}: index column must run 0..N-1")
        try:
            samples = frame["value"].to_numpy(dtype=float)
        except (TypeError, ValueError) as e:
            raise ParseError(f"{input_file}: non-numeric sample values") from e
        if not np.all(np.isfinite(samples)):
            raise ParseError(f"{input_file}: non-finite sample values")
        return ObservationFile(samples=samples, metadata=metadata)

    def save_curves(
        self,
        curves: List[CurveTable],
        output_file: Path,
        metadata: Optional[Dict[str, object]] = None,
    ) -> None:
        """Save ROC or power curves of several detectors into one CSV."""
        if not curves:
            raise DataValidationError("No curves provided to save")
        kinds = {curve.kind for curve in curves}
        if len(kinds) != 1:
            raise DataValidationError(f"Cannot mix curve kinds {sorted(kinds)} in one file")
        frame = pd.concat([curve.to_frame() for curve in curves], ignore_index=True)
        self._write(frame, metadata or {}, output_file)

    def parse_curves(self, input_file: Path, kind: str = "ROC") -> pd.DataFrame:
        """Read a curve CSV written by save_curves."""
        if kind not in CURVE_COLUMNS:
            raise ParseError(f"Unknown curve kind {kind!r}")
        frame, metadata = self._read(input_file, CURVE_COLUMNS[kind])
        frame.attrs["metadata"] = metadata
        return frame
