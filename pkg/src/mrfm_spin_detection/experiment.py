"""
MRFM Experiment Runner

Orchestrates simulation, single-record detection, ROC runs and power-curve
runs from one ExperimentConfig, writing the resulting CSV files and reports.
"""

import dataclasses
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .config import ExperimentConfig, validate_config
from .detector_registry import TelegraphSurrogate, build_detector_set, needs_surrogate, telegraph_surrogate
from .exceptions import ConfigurationError
from .harness import power_curve, roc_curve, run_trials
from .logging_config import get_logger
from .parser import ResultsParser, model_metadata
from .report_generator import SummaryReportGenerator
from .signal_models import SignalModel, add_awgn, generate_path, snr_db, trial_seed

logger = get_logger(__name__)


class ExperimentRunner:
    """
    Runs the experiment described by a configuration.

    Components:
    - detector_registry: detectors for the configured model and noise level
    - harness: Monte-Carlo trials and curve construction
    - ResultsParser: CSV input and output
    - SummaryReportGenerator: text summaries next to the curve CSVs
    """

    def __init__(self, config: ExperimentConfig):
        """
        Initialize the runner.

        Args:
            config: Experiment configuration

        Raises:
            ConfigurationError: If the configuration is invalid
        """
        errors = validate_config(config)
        if errors:
            raise ConfigurationError("; ".join(errors))
        self.config = config
        self.parser = ResultsParser()
        self.report_generator = SummaryReportGenerator()
        self.model = config.build_model()

    def _metadata(self, model: SignalModel, sigma: float) -> Dict[str, object]:
        metadata = model_metadata(model)
        metadata["snr_db"] = snr_db(model, sigma)
        metadata["seed"] = self.config.run.seed
        return metadata

    def _surrogate(self, names) -> Optional[TelegraphSurrogate]:
        params = self.config.detector_params()
        if not needs_surrogate(names, self.model, params):
            return None
        return telegraph_surrogate(self.model, params)

    def simulate(self, output_file: Path) -> Tuple[Path, Path]:
        """
        Write one H1 and one H0 observation of trial 0.

        Args:
            output_file: Base name; `<stem>_H1.csv` and `<stem>_H0.csv` are written beside it

        Returns:
            (H1 path, H0 path)
        """
        output_file = Path(output_file)
        seed = self.config.run.seed
        sigma = self.config.sigma_for(self.model)
        path = generate_path(self.model, trial_seed(seed, 0, "signal"))
        record_h1 = add_awgn(path, self.model.n_samples, sigma, trial_seed(seed, 0, "noise-H1"), "H1")
        record_h0 = add_awgn(None, self.model.n_samples, sigma, trial_seed(seed, 0, "noise-H0"), "H0")

        metadata = model_metadata(self.model)
        metadata["master_seed"] = seed
        h1_file = output_file.with_name(f"{output_file.stem}_H1.csv")
        h0_file = output_file.with_name(f"{output_file.stem}_H0.csv")
        self.parser.save_observation(record_h1, h1_file, metadata)
        self.parser.save_observation(record_h0, h0_file, metadata)
        logger.info(f"✅ Wrote {h1_file.name} and {h0_file.name} ({self.model.n_samples} samples each)")
        return h1_file, h0_file

    def detect(self, input_file: Path) -> Dict[str, float]:
        """
        Evaluate the configured detectors on one observation CSV.

        The noise level comes from the file's sigma line when present and from
        the noise section otherwise; the model length follows the file.
        """
        names = self.config.detectors.names
        if "mf" in names:
            raise ConfigurationError("detectors: mf needs the clean signal path and cannot run on a file")

        observation = self.parser.parse_observation(input_file)
        model = dataclasses.replace(self.model, n_samples=observation.samples.size)
        sigma = observation.sigma if observation.sigma is not None else self.config.sigma_for(model)
        record = observation.to_record(sigma)

        # the surrogate fit follows the configured length, not the file's
        surrogate = self._surrogate(names)
        detector_set = build_detector_set(names, model, sigma, self.config.detector_params(), surrogate=surrogate)
        return detector_set.evaluate_all(record)

    def run_roc(self, output_file: Path) -> List:
        """
        Monte-Carlo ROC curves for every configured detector.

        Writes the curve CSV and a `<stem>_summary.txt` AUC report.
        """
        output_file = Path(output_file)
        run = self.config.run
        sigma = self.config.sigma_for(self.model)
        detector_set = build_detector_set(
            self.config.detectors.names, self.model, sigma, self.config.detector_params()
        )

        logger.info(f"🔄 ROC run: {run.n_trials} trials, {self.model.n_samples} samples, sigma = {sigma:.4g}")
        batches = run_trials(self.model, detector_set, run.n_trials, sigma, run.seed, run.workers)
        curves = [roc_curve(batch) for batch in batches]

        metadata = self._metadata(self.model, sigma)
        metadata["n_trials"] = run.n_trials
        if detector_set.surrogate is not None:
            metadata["alpha"] = detector_set.surrogate.alpha
        self.parser.save_curves(curves, output_file, metadata)
        self.report_generator.create_summary_report(
            curves, metadata, output_file.with_name(f"{output_file.stem}_summary.txt")
        )
        logger.info(f"✅ ROC curves saved to {output_file}")
        return curves

    def run_power(self, output_file: Path) -> List:
        """P_D at run.pf over run.snr_grid for every configured detector."""
        output_file = Path(output_file)
        run = self.config.run
        if not run.snr_grid:
            raise ConfigurationError("run: snr_grid is required for power curves")

        params = self.config.detector_params()
        surrogate = self._surrogate(self.config.detectors.names)
        curves = power_curve(
            self.model,
            self.config.detectors.names,
            run.snr_grid,
            run.pf,
            run.n_trials,
            run.seed,
            params,
            run.workers,
            surrogate=surrogate,
        )

        metadata = model_metadata(self.model)
        metadata.update(
            {
                "seed": run.seed,
                "n_trials": run.n_trials,
                "pf": run.pf,
            }
        )
        if surrogate is not None:
            metadata["alpha"] = surrogate.alpha
        self.parser.save_curves(curves, output_file, metadata)
        self.report_generator.create_summary_report(
            curves, metadata, output_file.with_name(f"{output_file.stem}_summary.txt")
        )
        logger.info(f"✅ Power curves saved to {output_file}")
        return curves
