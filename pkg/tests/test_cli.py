"""
Integration tests for the mrfm-detect command line
"""

import math
import tempfile
from pathlib import Path

import pytest

from mrfm_spin_detection.cli import build_parser, main

DETECT_CONFIG = """
model.type = telegraph
model.amplitude = 1.5
model.p = 0.9
model.q = 0.9
noise.sigma = 2.0
run.n_samples = 4
detectors.names = amplitude, energy, rt-lrt
"""

ROC_CONFIG = """
model.type = telegraph
model.amplitude = 1.0
model.rate = 5
noise.snr_db = -10
run.n_samples = 200
run.n_trials = 40
run.seed = 3
detectors.names = mf, rt-lrt, filtered-energy, hybrid, amplitude, energy
"""


@pytest.fixture
def temp_dir():
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


def write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path


def detect_output(capsys):
    lines = capsys.readouterr().out.strip().splitlines()
    return {name: float(value) for name, value in (line.split(",") for line in lines)}


@pytest.mark.integration
class TestCli:
    """End-to-end runs of the four commands."""

    def test_parser_requires_source(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["roc"])
        with pytest.raises(SystemExit):
            build_parser().parse_args(["roc", "--preset", "fig5", "--config", "x.cfg"])

    def test_simulate_preset(self, temp_dir):
        main(["simulate", "--preset", "fig5", "--out", str(temp_dir / "obs.csv")])
        lines = (temp_dir / "obs_H1.csv").read_text().splitlines()
        assert "# p=0.9995" in lines
        header = lines.index("index,value")
        assert len(lines) - header - 1 == 60_000
        assert (temp_dir / "obs_H0.csv").exists()

    def test_detect_constant_and_zero_files(self, temp_dir, capsys):
        config = write(temp_dir / "exp.cfg", DETECT_CONFIG)

        ones = write(temp_dir / "ones.csv", "index,value\n0,1\n1,1\n2,1\n3,1\n")
        main(["detect", "--config", str(config), "--input", str(ones)])
        assert detect_output(capsys)["amplitude"] == 1.0

        zeros = write(temp_dir / "zeros.csv", "index,value\n0,0\n1,0\n2,0\n3,0\n")
        main(["detect", "--config", str(config), "--input", str(zeros)])
        assert detect_output(capsys)["energy"] == 0.0

    def test_detect_single_sample_lrt(self, temp_dir, capsys):
        config = write(temp_dir / "exp.cfg", DETECT_CONFIG)
        single = write(temp_dir / "one.csv", "index,value\n0,0.8\n")
        main(["detect", "--config", str(config), "--input", str(single)])
        values = detect_output(capsys)
        assert values["rt-lrt"] == pytest.approx(math.log(math.cosh(1.5 * 0.8 / 2.0 ** 2)), rel=1e-12)

    def test_detect_walk_single_sample(self, temp_dir, capsys):
        config = write(
            temp_dir / "walk.cfg",
            "model.type = walk\nmodel.amplitude = 1.0\nmodel.half_states = 10\n"
            "noise.sigma = 1.0\nrun.n_samples = 1000\ndetectors.names = amplitude\n",
        )
        single = write(temp_dir / "one.csv", "index,value\n0,3.0\n")
        main(["detect", "--config", str(config), "--input", str(single)])
        assert detect_output(capsys) == {"amplitude": 3.0}

    def test_detect_needs_input(self, temp_dir):
        config = write(temp_dir / "exp.cfg", DETECT_CONFIG)
        with pytest.raises(SystemExit) as excinfo:
            main(["detect", "--config", str(config)])
        assert excinfo.value.code == 1

    def test_missing_model_section(self, temp_dir, caplog):
        config = write(temp_dir / "exp.cfg", "noise.snr_db = -35\nrun.duration = 60\n")
        with pytest.raises(SystemExit) as excinfo:
            main(["roc", "--config", str(config), "--out", str(temp_dir / "roc.csv")])
        assert excinfo.value.code == 1
        assert "model" in caplog.text
        assert not (temp_dir / "roc.csv").exists()

    def test_missing_config_file(self, temp_dir):
        with pytest.raises(SystemExit) as excinfo:
            main(["roc", "--config", str(temp_dir / "nope.cfg")])
        assert excinfo.value.code == 1

    def test_roc_is_byte_identical(self, temp_dir):
        config = write(temp_dir / "exp.cfg", ROC_CONFIG)
        for name in ("first.csv", "second.csv"):
            main(["roc", "--config", str(config), "--out", str(temp_dir / name)])

        first = (temp_dir / "first.csv").read_bytes()
        assert first == (temp_dir / "second.csv").read_bytes()
        text = first.decode()
        for detector in ("mf", "rt-lrt", "filtered-energy", "hybrid", "amplitude", "energy"):
            assert f",{detector}\n" in text
        assert "pf,pd,detector" in text

    def test_seed_and_trials_override(self, temp_dir):
        config = write(temp_dir / "exp.cfg", ROC_CONFIG)
        main(["roc", "--config", str(config), "--out", str(temp_dir / "a.csv"), "--seed", "4", "--trials", "30"])
        text = (temp_dir / "a.csv").read_text()
        assert "# seed=4" in text
        assert "# n_trials=30" in text

    def test_power(self, temp_dir):
        config = write(temp_dir / "exp.cfg", ROC_CONFIG + "run.snr_grid = -20, 0\n")
        main(["power", "--config", str(config), "--out", str(temp_dir / "power.csv")])
        assert "snr_db,pd,detector" in (temp_dir / "power.csv").read_text()
