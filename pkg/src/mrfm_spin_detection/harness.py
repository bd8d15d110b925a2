"""
Monte-Carlo Harness Module

Runs paired H0/H1 trials for a detector set, calibrates Neyman-Pearson
thresholds empirically from the H0 statistics and turns the result into ROC
and power curves.
"""

import concurrent.futures
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid
from typing_extensions import Literal

from .detector_registry import (
    DetectorParams,
    DetectorSet,
    TelegraphSurrogate,
    build_detector_set,
    needs_surrogate,
    telegraph_surrogate,
)
from .exceptions import HarnessError
from .logging_config import get_logger
from .signal_models import SignalModel, add_awgn, generate_path, sigma_for_snr, trial_seed

logger = get_logger(__name__)

CurveKind = Literal["ROC", "POWER"]

TRIALS_PER_CHUNK = 25


@dataclass(eq=False)
class TrialBatch:
    """H0 and H1 statistics of one detector over the same trials."""

    detector_name: str
    h0_stats: np.ndarray
    h1_stats: np.ndarray
    fingerprint: str

    def __post_init__(self):
        self.h0_stats = np.asarray(self.h0_stats, dtype=float)
        self.h1_stats = np.asarray(self.h1_stats, dtype=float)
        if self.h0_stats.shape != self.h1_stats.shape:
            raise HarnessError(
                f"{self.detector_name}: {self.h0_stats.size} H0 trials vs {self.h1_stats.size} H1 trials"
            )
        if not (np.all(np.isfinite(self.h0_stats)) and np.all(np.isfinite(self.h1_stats))):
            raise HarnessError(f"{self.detector_name}: non-finite statistics in trial batch")

    @property
    def n_trials(self) -> int:
        return int(self.h0_stats.size)


@dataclass(eq=False)
class CurveTable:
    """ROC (pf -> pd) or power (snr_db -> pd) curve of one detector."""

    kind: CurveKind
    detector_name: str
    x: np.ndarray
    y: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.kind not in ("ROC", "POWER"):
            raise HarnessError(f"Unknown curve kind {self.kind!r}")
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise HarnessError("Curve x and y must be one-dimensional and of equal length")
        if np.any(np.diff(self.x) <= 0):
            raise HarnessError(f"{self.kind} curve x values must be strictly increasing")
        if np.any((self.y < 0.0) | (self.y > 1.0)):
            raise HarnessError("Detection probabilities must lie in [0, 1]")
        if self.kind == "ROC":
            if np.any((self.x < 0.0) | (self.x > 1.0)):
                raise HarnessError("False-alarm probabilities must lie in [0, 1]")
            if np.any(np.diff(self.y) < 0):
                raise HarnessError("ROC detection probabilities must be nondecreasing")

    @property
    def x_column(self) -> str:
        return "pf" if self.kind == "ROC" else "snr_db"

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({self.x_column: self.x, "pd": self.y, "detector": self.detector_name})


def default_pf_grid() -> np.ndarray:
    """50 log-spaced values in [0.005, 0.5] followed by a linear fill toward 1."""
    log_part = np.logspace(math.log10(0.005), math.log10(0.5), 50)
    linear_part = np.linspace(0.5, 1.0, 11)[1:-1]
    return np.concatenate([log_part, linear_part])


def run_fingerprint(model: SignalModel, sigma: float, n_trials: int, master_seed: int) -> str:
    """sha256 over the model, noise level, trial count and seed."""
    payload = {
        "model": type(model).__name__,
        "params": asdict(model),
        "sigma": repr(float(sigma)),
        "n_trials": n_trials,
        "seed": master_seed,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True, default=repr).encode()).hexdigest()


def _run_chunk(
    model: SignalModel, detector_set: DetectorSet, trials: range, master_seed: int
) -> Tuple[int, np.ndarray, np.ndarray]:
    n_detectors = len(detector_set.detectors)
    h0 = np.empty((len(trials), n_detectors))
    h1 = np.empty((len(trials), n_detectors))
    sigma = detector_set.sigma

    for row, t in enumerate(trials):
        path = generate_path(model, trial_seed(master_seed, t, "signal"))
        record_h1 = add_awgn(path, model.n_samples, sigma, trial_seed(master_seed, t, "noise-H1"), "H1")
        record_h0 = add_awgn(None, model.n_samples, sigma, trial_seed(master_seed, t, "noise-H0"), "H0")
        for col, spec in enumerate(detector_set.detectors):
            # paired design: the H0 matched filter uses this trial's H1 path
            h0[row, col] = spec.evaluate(record_h0, path).value
            h1[row, col] = spec.evaluate(record_h1, path).value

    return trials.start, h0, h1


def run_trials(
    model: SignalModel,
    detector_set: DetectorSet,
    n_trials: int,
    sigma: float,
    master_seed: int,
    workers: Optional[int] = None,
) -> List[TrialBatch]:
    """
    Generate n_trials paired H0/H1 observations and evaluate every detector on them.

    Trials are split into chunks processed by a thread pool and written back
    by trial index, so the batches do not depend on scheduling.

    Args:
        model: Signal model under H1
        detector_set: Detectors built for this sigma
        n_trials: Trials per hypothesis (>= 2)
        sigma: Noise standard deviation
        master_seed: Seed of all per-trial substreams
        workers: Thread count (defaults to the CPU count)

    Returns:
        One TrialBatch per detector, in detector-set order
    """
    if n_trials < 2:
        raise HarnessError(f"At least 2 trials are required, got {n_trials}")
    if not math.isclose(detector_set.sigma, sigma, rel_tol=1e-12):
        raise HarnessError(f"Detector set was built for sigma={detector_set.sigma}, not {sigma}")

    workers = workers or os.cpu_count() or 1
    n_detectors = len(detector_set.detectors)
    h0 = np.empty((n_trials, n_detectors))
    h1 = np.empty((n_trials, n_detectors))
    chunks = [range(start, min(start + TRIALS_PER_CHUNK, n_trials)) for start in range(0, n_trials, TRIALS_PER_CHUNK)]

    logger.info(f"Running {n_trials} trials x {n_detectors} detectors on {workers} workers")
    if workers == 1:
        results = (_run_chunk(model, detector_set, chunk, master_seed) for chunk in chunks)
        for start, chunk_h0, chunk_h1 in results:
            h0[start : start + len(chunk_h0)] = chunk_h0
            h1[start : start + len(chunk_h1)] = chunk_h1
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_run_chunk, model, detector_set, chunk, master_seed) for chunk in chunks]
            for future in concurrent.futures.as_completed(futures):
                start, chunk_h0, chunk_h1 = future.result()
                h0[start : start + len(chunk_h0)] = chunk_h0
                h1[start : start + len(chunk_h1)] = chunk_h1
                logger.debug(f"Trials {start}..{start + len(chunk_h0) - 1} done")

    fingerprint = run_fingerprint(model, sigma, n_trials, master_seed)
    return [
        TrialBatch(spec.name, h0[:, col].copy(), h1[:, col].copy(), fingerprint)
        for col, spec in enumerate(detector_set.detectors)
    ]


def empirical_threshold(h0_stats: Sequence[float], pf: float) -> float:
    """
    Threshold eta = the ceil(n (1 - pf))-th smallest H0 statistic.

    With the strict rule "statistic > eta", at most a fraction pf of the H0
    statistics exceed eta.

    Raises:
        HarnessError: If pf is outside (0, 1) or n < 1/pf
    """
    stats = np.sort(np.asarray(h0_stats, dtype=float))
    n = stats.size
    if not 0.0 < pf < 1.0:
        raise HarnessError(f"pf must lie in (0, 1), got {pf}")
    if n * pf < 1.0 - 1e-9:
        raise HarnessError(f"{n} H0 trials cannot resolve pf = {pf}; need at least {math.ceil(1.0 / pf)}")
    rank = max(1, math.ceil(n * (1.0 - pf) - 1e-9))
    return float(stats[rank - 1])


def roc_curve(batch: TrialBatch, grid: Optional[Sequence[float]] = None) -> CurveTable:
    """
    ROC curve of a batch: pd = fraction of H1 statistics above the threshold at each pf.

    Grid points below 1/n_trials cannot be calibrated and are dropped.
    """
    pf_grid = default_pf_grid() if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(pf_grid) <= 0) or np.any((pf_grid <= 0.0) | (pf_grid >= 1.0)):
        raise HarnessError("ROC grid must be strictly increasing inside (0, 1)")

    usable = pf_grid * batch.n_trials >= 1.0 - 1e-9
    if not np.all(usable):
        logger.warning(
            f"{batch.detector_name}: dropping {int(np.sum(~usable))} pf values below 1/{batch.n_trials}"
        )
        pf_grid = pf_grid[usable]
    if pf_grid.size == 0:
        raise HarnessError(f"No pf value in the grid is resolvable with {batch.n_trials} trials")

    pd_values = np.array([np.mean(batch.h1_stats > empirical_threshold(batch.h0_stats, pf)) for pf in pf_grid])
    pd_values = np.maximum.accumulate(pd_values)
    return CurveTable(
        kind="ROC",
        detector_name=batch.detector_name,
        x=pf_grid,
        y=pd_values,
        metadata={"n_trials": batch.n_trials, "fingerprint": batch.fingerprint},
    )


def detection_probability(batch: TrialBatch, pf: float) -> float:
    eta = empirical_threshold(batch.h0_stats, pf)
    return float(np.mean(batch.h1_stats > eta))


def power_curve(
    model: SignalModel,
    detector_names: Sequence[str],
    snr_grid_db: Sequence[float],
    pf: float,
    n_trials: int,
    master_seed: int,
    params: Optional[DetectorParams] = None,
    workers: Optional[int] = None,
    surrogate: Optional[TelegraphSurrogate] = None,
) -> List[CurveTable]:
    """
    P_D at fixed P_F over an SNR grid, one curve per detector.

    The amplitude stays fixed and sigma follows the SNR; the detectors are
    rebuilt at every point because their constants depend on sigma.
    """
    grid = np.asarray(sorted(snr_grid_db), dtype=float)
    if grid.size == 0:
        raise HarnessError("SNR grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise HarnessError("SNR grid values must be distinct")

    params = params or DetectorParams()
    if surrogate is None and needs_surrogate(detector_names, model, params):
        surrogate = telegraph_surrogate(model, params)
    pd_by_detector: Dict[str, List[float]] = {name: [] for name in detector_names}

    for snr in grid:
        sigma = sigma_for_snr(model, float(snr))
        detector_set = build_detector_set(detector_names, model, sigma, params, surrogate=surrogate)
        logger.info(f"🔄 SNR {snr:.1f} dB (sigma = {sigma:.4g})")
        for batch in run_trials(model, detector_set, n_trials, sigma, master_seed, workers):
            pd_by_detector[batch.detector_name].append(detection_probability(batch, pf))

    return [
        CurveTable(
            kind="POWER",
            detector_name=name,
            x=grid,
            y=np.asarray(values),
            metadata={"pf": pf, "n_trials": n_trials, "seed": master_seed},
        )
        for name, values in pd_by_detector.items()
    ]


def auc(curve: CurveTable) -> float:
    """Trapezoidal area under an ROC curve closed with (0, 0) and (1, 1)."""
    if curve.kind != "ROC":
        raise HarnessError(f"AUC is defined for ROC curves, not {curve.kind}")
    x = np.concatenate([[0.0], curve.x, [1.0]])
    y = np.concatenate([[0.0], curve.y, [1.0]])
    return float(trapezoid(y, x))


def auc_standard_error(area: float, n_h0: int, n_h1: Optional[int] = None) -> float:
    """Hanley-McNeil standard error of an AUC estimate."""
    n_h1 = n_h0 if n_h1 is None else n_h1
    if n_h0 < 1 or n_h1 < 1:
        raise HarnessError("Trial counts must be positive")
    q1 = area / (2.0 - area)
    q2 = 2.0 * area ** 2 / (1.0 + area)
    variance = (
        area * (1.0 - area) + (n_h1 - 1) * (q1 - area ** 2) + (n_h0 - 1) * (q2 - area ** 2)
    ) / (n_h0 * n_h1)
    return math.sqrt(max(variance, 0.0))
