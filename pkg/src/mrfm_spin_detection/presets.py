"""
Bundled experiment presets.

Each preset is a flat-format configuration reproducing one published
operating point: T_s = 1 ms, the default cantilever physics for the
amplitude, and the detector set compared at that point.
"""

from typing import List

from .config import ExperimentConfig, parse_flat
from .exceptions import ConfigurationError

_TELEGRAPH_DETECTORS = "mf, rt-lrt, filtered-energy, hybrid, amplitude, energy"
_WALK_DETECTORS = "mf, rw-lrt, rt-lrt, filtered-energy, amplitude, hybrid, energy"

PRESETS = {
    "fig5": f"""
# ROC, symmetric telegraph, lambda = 0.5 /s
model.type = telegraph
model.rate = 0.5
noise.snr_db = -35
run.duration = 60
detectors.names = {_TELEGRAPH_DETECTORS}
""",
    "fig6": f"""
# power curves at pf = 0.1, symmetric telegraph, T = 60 s
model.type = telegraph
model.rate = 0.5
noise.snr_db = -35
run.duration = 60
run.pf = 0.1
run.snr_grid = -50, -47.5, -45, -42.5, -40, -37.5, -35, -32.5, -30
detectors.names = {_TELEGRAPH_DETECTORS}
""",
    "fig7": f"""
# power curves at pf = 0.1, symmetric telegraph, T = 150 s
model.type = telegraph
model.rate = 0.5
noise.snr_db = -35
run.duration = 150
run.pf = 0.1
run.snr_grid = -50, -47.5, -45, -42.5, -40, -37.5, -35, -32.5, -30
detectors.names = {_TELEGRAPH_DETECTORS}
""",
    "fig8": f"""
# ROC, asymmetric telegraph
model.type = telegraph
model.p = 0.9998
model.q = 0.9992
noise.snr_db = -45
run.duration = 150
detectors.names = {_TELEGRAPH_DETECTORS}
""",
    "fig9": f"""
# power curves at pf = 0.1, asymmetric telegraph, T = 150 s
model.type = telegraph
model.p = 0.9998
model.q = 0.9992
noise.snr_db = -45
run.duration = 150
run.pf = 0.1
run.snr_grid = -55, -52.5, -50, -47.5, -45, -42.5, -40, -37.5, -35
detectors.names = {_TELEGRAPH_DETECTORS}
""",
    "fig10": f"""
# ROC, symmetric walk K1 = K2 = H1 = H2 = 0.5
model.type = walk
model.half_states = 10
model.k1 = 0.5
model.k2 = 0.5
model.h1 = 0.5
model.h2 = 0.5
noise.snr_db = -39.9
run.duration = 60
detectors.names = {_WALK_DETECTORS}
""",
    "fig11": f"""
# ROC, symmetric walk K1 = H2 = 0.52, K2 = H1 = 0.48
model.type = walk
model.half_states = 10
model.k1 = 0.52
model.k2 = 0.48
model.h1 = 0.48
model.h2 = 0.52
noise.snr_db = -37.4
run.duration = 60
detectors.names = {_WALK_DETECTORS}
""",
    "fig12": f"""
# ROC, asymmetric walk K1 = H1 = 0.45, K2 = H2 = 0.55
# the autocorrelation fit is undefined here, so the LPF pole is explicit
model.type = walk
model.half_states = 10
model.k1 = 0.45
model.k2 = 0.55
model.h1 = 0.45
model.h2 = 0.55
noise.snr_db = -41.0
run.duration = 60
detectors.names = {_WALK_DETECTORS}
detectors.alpha = 0.9877
""",
}


def preset_names() -> List[str]:
    return sorted(PRESETS, key=lambda name: int(name[3:]))


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigurationError(f"Unknown preset '{name}' (available: {', '.join(preset_names())})")
    return PRESETS[name].lstrip()


def load_preset(name: str) -> ExperimentConfig:
    """Parse a bundled preset into an ExperimentConfig."""
    return parse_flat(preset_text(name))
