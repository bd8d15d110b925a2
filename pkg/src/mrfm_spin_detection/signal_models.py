"""
Signal Models Module

Discrete-time spin signal generators (two-state random telegraph and
reflecting random walk), additive white Gaussian noise, and the calibration
formulas tying model parameters to physical and filter quantities.

State indexing for the walk is zero-based: index i holds the level (i - M)s,
so the centre (zero) level sits at index M.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from numba import njit
from scipy import linalg, optimize
from typing_extensions import Literal

from .exceptions import DataValidationError, ModelError, NumericalError
from .logging_config import get_logger

logger = get_logger(__name__)

Hypothesis = Literal["H0", "H1"]

ELECTRON_MOMENT = 9.28e-24  # J/T

# Substream labels for counter-based seeding
STREAMS = {"signal": 0, "noise-H0": 1, "noise-H1": 2}


def trial_seed(master_seed: int, trial_index: int, stream: str) -> int:
    """
    Derive the seed of one substream from (master_seed, trial_index, stream).

    The derivation is a pure function of its arguments, so trials can be
    generated in any order or on any worker and still reproduce exactly.

    Args:
        master_seed: Non-negative experiment seed
        trial_index: Zero-based trial counter
        stream: One of "signal", "noise-H0", "noise-H1"

    Returns:
        64-bit integer seed for make_rng()
    """
    if master_seed < 0 or trial_index < 0:
        raise ModelError("Seeds and trial indices must be non-negative")
    if stream not in STREAMS:
        raise ModelError(f"Unknown random stream '{stream}', expected one of {sorted(STREAMS)}")
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(trial_index, STREAMS[stream]))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator for one substream."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class TelegraphModel:
    """Two-state (+A / -A) Markov signal with stay probabilities p (at +A) and q (at -A)."""

    amplitude: float
    p: float
    q: float
    n_samples: int
    sample_period: float = 1e-3

    tag = "telegraph"

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ModelError(f"Telegraph amplitude must be positive, got {self.amplitude}")
        for name in ("p", "q"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ModelError(f"Telegraph probability {name} must lie in (0, 1), got {value}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ModelError(f"n_samples must be a positive integer, got {self.n_samples}")
        if not self.sample_period > 0:
            raise ModelError(f"sample_period must be positive, got {self.sample_period}")

    @property
    def r(self) -> float:
        """Second eigenvalue of the chain, p + q - 1."""
        return self.p + self.q - 1.0

    @property
    def mean_coefficient(self) -> float:
        """C_m = (p - q) / (2 - p - q), the steady-state mean in units of A."""
        return (self.p - self.q) / (2.0 - self.p - self.q)

    @property
    def stationary_mean(self) -> float:
        return self.amplitude * self.mean_coefficient

    @property
    def is_symmetric(self) -> bool:
        return self.p == self.q

    @property
    def duration(self) -> float:
        return self.n_samples * self.sample_period


@dataclass(frozen=True)
class WalkModel:
    """
    Random walk on the 2M+1 levels {-Ms, ..., 0, ..., +Ms} with reflecting ends.

    Rows in the lower quartile step down with K1 and up with K2, rows in the
    upper quartile step down with H1 and up with H2, and the middle rows move
    either way with probability 0.5. With h = ceil(M/2) the lower quartile is
    rows 1..h-1, the middle rows h..2M-h and the upper quartile 2M-h+1..2M-1,
    which reduces to the published ranges when M is even.
    """

    half_states: int
    step: float
    k1: float
    k2: float
    h1: float
    h2: float
    n_samples: int
    sample_period: float = 1e-3

    tag = "walk"

    def __post_init__(self):
        if int(self.half_states) != self.half_states or self.half_states < 1:
            raise ModelError(f"half_states M must be an integer >= 1, got {self.half_states}")
        if not self.step > 0:
            raise ModelError(f"Walk step s must be positive, got {self.step}")
        for name in ("k1", "k2", "h1", "h2"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ModelError(f"Walk probability {name} must lie in (0, 1), got {value}")
        if abs(self.k1 + self.k2 - 1.0) > 1e-12:
            raise ModelError(f"K1 + K2 must equal 1, got {self.k1 + self.k2}")
        if abs(self.h1 + self.h2 - 1.0) > 1e-12:
            raise ModelError(f"H1 + H2 must equal 1, got {self.h1 + self.h2}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ModelError(f"n_samples must be a positive integer, got {self.n_samples}")
        if not self.sample_period > 0:
            raise ModelError(f"sample_period must be positive, got {self.sample_period}")

    @property
    def n_states(self) -> int:
        return 2 * self.half_states + 1

    @property
    def amplitude(self) -> float:
        """Largest level Ms."""
        return self.half_states * self.step

    @property
    def center_index(self) -> int:
        return self.half_states

    @property
    def is_symmetric(self) -> bool:
        return self.k1 == self.h2 and self.k2 == self.h1

    @property
    def duration(self) -> float:
        return self.n_samples * self.sample_period

    @cached_property
    def states(self) -> np.ndarray:
        levels = np.arange(-self.half_states, self.half_states + 1, dtype=float) * self.step
        levels.flags.writeable = False
        return levels

    @cached_property
    def _moves(self) -> Tuple[np.ndarray, np.ndarray]:
        m = self.half_states
        half = math.ceil(m / 2)
        down = np.empty(self.n_states)
        up = np.empty(self.n_states)
        for i in range(1, 2 * m):
            if i <= half - 1:
                down[i], up[i] = self.k1, self.k2
            elif i >= 2 * m - half + 1:
                down[i], up[i] = self.h1, self.h2
            else:
                down[i], up[i] = 0.5, 0.5
        # Reflecting ends
        down[0], up[0] = 0.0, 1.0
        down[2 * m], up[2 * m] = 1.0, 0.0
        down.flags.writeable = False
        up.flags.writeable = False
        return down, up

    @property
    def down_probabilities(self) -> np.ndarray:
        """P[i, i-1] for every row (zero at the bottom row)."""
        return self._moves[0]

    @property
    def up_probabilities(self) -> np.ndarray:
        """P[i, i+1] for every row (zero at the top row)."""
        return self._moves[1]

    def transition_matrix(self) -> np.ndarray:
        """Dense tridiagonal P with P[j, k] = Pr(next = level k | current = level j)."""
        down, up = self._moves
        matrix = np.diag(up[:-1], k=1) + np.diag(down[1:], k=-1)
        return matrix


SignalModel = Union[TelegraphModel, WalkModel]


@dataclass(frozen=True, eq=False)
class SignalPath:
    """A clean signal realisation and the model family that produced it."""

    values: np.ndarray
    model_tag: str

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True, eq=False)
class ObservationRecord:
    """Noisy samples y with their generating metadata."""

    samples: np.ndarray
    sigma: float
    hypothesis: str
    seed: int
    clean_path: Optional[SignalPath] = None

    def __post_init__(self):
        if self.hypothesis not in ("H0", "H1"):
            raise DataValidationError(f"Hypothesis must be 'H0' or 'H1', got {self.hypothesis!r}")
        if self.hypothesis == "H0" and self.clean_path is not None:
            raise DataValidationError("H0 observations carry no clean path")
        # records read back from disk carry no clean path
        if self.clean_path is not None and len(self.clean_path) != len(self.samples):
            raise DataValidationError(
                f"Clean path length {len(self.clean_path)} does not match {len(self.samples)} samples"
            )
        if not self.sigma > 0:
            raise DataValidationError(f"Noise sigma must be positive, got {self.sigma}")

    @property
    def n_samples(self) -> int:
        return len(self.samples)


@njit(cache=True, nogil=True)
def _telegraph_kernel(start_high, uniforms, p, q):
    n = uniforms.shape[0] + 1
    out = np.empty(n)
    high = start_high
    out[0] = 1.0 if high else -1.0
    for i in range(1, n):
        u = uniforms[i - 1]
        if high:
            high = u < p
        else:
            high = u >= q
        out[i] = 1.0 if high else -1.0
    return out


@njit(cache=True, nogil=True)
def _walk_kernel(start_index, uniforms, up):
    n = uniforms.shape[0] + 1
    index = np.empty(n, dtype=np.int64)
    current = start_index
    index[0] = current
    for i in range(1, n):
        if uniforms[i - 1] < up[current]:
            current += 1
        else:
            current -= 1
        index[i] = current
    return index


def gen_telegraph(model: TelegraphModel, seed: int) -> SignalPath:
    """
    Generate a random telegraph path.

    zeta_0 is +A or -A with probability 1/2; afterwards +A stays with
    probability p and -A stays with probability q.

    Args:
        model: Telegraph parameters
        seed: Substream seed

    Returns:
        SignalPath with entries in {+A, -A}
    """
    rng = make_rng(seed)
    start_high = bool(rng.random() < 0.5)
    uniforms = rng.random(model.n_samples - 1)
    signs = _telegraph_kernel(start_high, uniforms, model.p, model.q)
    return SignalPath(values=model.amplitude * signs, model_tag=TelegraphModel.tag)


def gen_random_walk(model: WalkModel, seed: int) -> SignalPath:
    """
    Generate a reflecting random-walk path.

    zeta_0 is +s or -s with probability 1/2 and every later sample moves one
    level up or down according to the transition matrix.

    Args:
        model: Walk parameters
        seed: Substream seed

    Returns:
        SignalPath with entries on the grid {-Ms, ..., +Ms}
    """
    rng = make_rng(seed)
    center = model.center_index
    start = center + 1 if rng.random() < 0.5 else center - 1
    uniforms = rng.random(model.n_samples - 1)
    index = _walk_kernel(start, uniforms, np.asarray(model.up_probabilities))
    return SignalPath(values=model.states[index], model_tag=WalkModel.tag)


def generate_path(model: SignalModel, seed: int) -> SignalPath:
    """Dispatch to the generator matching the model type."""
    if isinstance(model, TelegraphModel):
        return gen_telegraph(model, seed)
    if isinstance(model, WalkModel):
        return gen_random_walk(model, seed)
    raise ModelError(f"Unsupported signal model: {type(model).__name__}")


def add_awgn(
    path: Optional[SignalPath],
    n: int,
    sigma: float,
    seed: int,
    hypothesis: Hypothesis,
) -> ObservationRecord:
    """
    Build an observation under H0 (noise only) or H1 (path plus noise).

    Args:
        path: Clean path under H1, None under H0
        n: Number of samples
        sigma: Noise standard deviation
        seed: Noise substream seed
        hypothesis: "H0" or "H1"

    Returns:
        ObservationRecord with y_i = zeta_i + w_i (H1) or y_i = w_i (H0)

    Raises:
        DataValidationError: If the path does not fit the hypothesis
    """
    if not sigma > 0:
        raise DataValidationError(f"Noise sigma must be positive, got {sigma}")
    if hypothesis == "H1":
        if path is None:
            raise DataValidationError("H1 requires a clean signal path")
        if len(path) != n:
            raise DataValidationError(f"Path length {len(path)} does not match n = {n}")
    elif hypothesis == "H0":
        if path is not None:
            raise DataValidationError("H0 observations must not be given a signal path")
    else:
        raise DataValidationError(f"Hypothesis must be 'H0' or 'H1', got {hypothesis!r}")

    noise = make_rng(seed).normal(0.0, sigma, n)
    samples = noise + path.values if path is not None else noise
    return ObservationRecord(samples=samples, sigma=float(sigma), hypothesis=hypothesis, seed=seed, clean_path=path)


def stationary_distribution(model: WalkModel) -> np.ndarray:
    """
    Solve pi P = pi with sum(pi) = 1 for the walk chain.

    The reflecting walk is periodic, so the distribution is obtained by a
    direct linear solve rather than by iterating P.

    Raises:
        NumericalError: If the solve fails or the residual is not negligible
    """
    transition = model.transition_matrix()
    n = transition.shape[0]
    system = transition.T - np.eye(n)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = linalg.solve(system, rhs)
    except linalg.LinAlgError as e:
        raise NumericalError(f"Stationary distribution solve failed: {e}") from e

    residual = float(np.max(np.abs(pi @ transition - pi)))
    if residual > 1e-10 or np.any(pi < -1e-12):
        raise NumericalError(f"Walk chain has no valid stationary distribution (residual {residual:.2e})")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def signal_power(model: SignalModel) -> float:
    """Steady-state E[zeta^2]."""
    if isinstance(model, TelegraphModel):
        return model.amplitude ** 2
    pi = stationary_distribution(model)
    return float(pi @ (model.states ** 2))


def walk_rms_amplitude(model: WalkModel) -> float:
    """Amplitude of the telegraph with the same steady-state energy as the walk."""
    return math.sqrt(signal_power(model))


def snr_db(model: SignalModel, sigma: float) -> float:
    """SNR in dB: steady-state signal energy over noise variance."""
    if not sigma > 0:
        raise DataValidationError(f"Noise sigma must be positive, got {sigma}")
    if isinstance(model, TelegraphModel):
        return 20.0 * math.log10(model.amplitude / sigma)
    return 10.0 * math.log10(signal_power(model) / sigma ** 2)


def sigma_for_snr(model: SignalModel, target_snr_db: float) -> float:
    """Noise standard deviation that puts the model at the requested SNR."""
    return math.sqrt(signal_power(model) / 10.0 ** (target_snr_db / 10.0))


def telegraph_p_from_rate(rate: float, sample_period: float) -> float:
    """
    Stay probability matching a Poisson reversal rate: p = 1 - T_s * lambda.

    A zero rate returns 1, which TelegraphModel itself rejects.
    """
    product = rate * sample_period
    if not 0.0 <= product < 1.0:
        raise ModelError(f"T_s * lambda must lie in [0, 1), got {product}")
    return 1.0 - product


def alpha_from_bandwidth(omega_c: float) -> float:
    """Pole of the single-pole LPF with -3 dB bandwidth omega_c (rad/sample)."""
    if not 0.0 < omega_c < math.pi / 2:
        raise ModelError(f"omega_c must lie in (0, pi/2), got {omega_c}")
    return (1.0 - math.sin(omega_c)) / math.cos(omega_c)


def fit_telegraph_p_to_paths(
    paths: Iterable[Union[SignalPath, np.ndarray]],
    max_lag: Optional[int] = None,
) -> float:
    """
    Fit the symmetric telegraph stay probability to an averaged autocorrelation.

    The lag-k autocorrelation is averaged over all paths, normalised by the
    lag-0 value, and (2p - 1)^k is fitted to it by unweighted least squares on
    lags 1..L, with L = min(50, N // 10) unless given.

    Args:
        paths: Signal paths (all of the same length N)
        max_lag: Largest lag L used in the fit

    Returns:
        Fitted p in (0, 1)
    """
    lag_sums = None
    lag_counts = None
    energy_sum = 0.0
    energy_count = 0
    n_paths = 0
    lags = None

    for path in paths:
        values = np.asarray(path.values if isinstance(path, SignalPath) else path, dtype=float)
        if lags is None:
            length = values.shape[0]
            top = max_lag if max_lag is not None else max(1, min(50, length // 10))
            if length < 2 or top >= length:
                raise DataValidationError(f"Paths of length {length} are too short for lag {top}")
            lags = np.arange(1, top + 1)
            lag_sums = np.zeros(top)
            lag_counts = np.zeros(top)
        elif values.shape[0] != length:
            raise DataValidationError("All paths must have the same length")

        energy_sum += float(values @ values)
        energy_count += length
        for j, k in enumerate(lags):
            lag_sums[j] += float(values[:-k] @ values[k:])
            lag_counts[j] += length - k
        n_paths += 1

    if n_paths == 0:
        raise DataValidationError("At least one path is required for the autocorrelation fit")
    energy = energy_sum / energy_count
    if energy == 0.0:
        raise DataValidationError("Paths have zero energy; autocorrelation is undefined")
    rho = (lag_sums / lag_counts) / energy

    result = optimize.minimize_scalar(
        lambda c: float(np.sum((c ** lags - rho) ** 2)),
        bounds=(-1.0 + 1e-12, 1.0 - 1e-12),
        method="bounded",
        options={"xatol": 1e-10},
    )
    p_hat = 0.5 * (1.0 + float(result.x))
    logger.debug(f"Autocorrelation fit over {n_paths} paths, lags 1..{lags[-1]}: p_hat = {p_hat:.6f}")
    return p_hat


def fit_telegraph_alpha_to_walk(model: WalkModel, n_paths: int, seed: int) -> Tuple[float, float]:
    """
    Calibrate a symmetric telegraph (p_hat) and LPF pole (alpha) to a symmetric walk.

    Args:
        model: Symmetric walk (K1 = H2 and K2 = H1)
        n_paths: Number of walk realisations averaged
        seed: Master seed for the realisations

    Returns:
        (p_hat, alpha) with alpha = 2 * p_hat - 1

    Raises:
        ModelError: If the walk is asymmetric
    """
    if not model.is_symmetric:
        raise ModelError("Autocorrelation calibration is only defined for symmetric walks (K1 = H2, K2 = H1)")
    if n_paths < 1:
        raise ModelError(f"n_paths must be >= 1, got {n_paths}")

    paths = (gen_random_walk(model, trial_seed(seed, i, "signal")) for i in range(n_paths))
    p_hat = fit_telegraph_p_to_paths(paths)
    return p_hat, 2.0 * p_hat - 1.0


def physical_amplitude(
    spring_k: float,
    omega0: float,
    b1: float,
    gradient: float,
    mu: float = ELECTRON_MOMENT,
) -> float:
    """
    Spin-induced frequency shift amplitude, 0.5 * omega0 * |mu G^2 / (k B1)| in rad/s.

    Args:
        spring_k: Cantilever spring constant (N/m)
        omega0: Natural angular frequency (rad/s)
        b1: RF field amplitude (T)
        gradient: Tip field gradient G (T/m)
        mu: Spin magnetic moment (J/T)
    """
    for name, value in (("spring_k", spring_k), ("omega0", omega0), ("b1", b1), ("gradient", gradient)):
        if not value > 0:
            raise ModelError(f"{name} must be positive, got {value}")
    if mu < 0:
        raise ModelError(f"mu must be non-negative, got {mu}")
    return 0.5 * omega0 * abs(mu * gradient ** 2 / (spring_k * b1))
