"""
MRFM Spin Detection CLI

Command-line interface: simulate observations, run detectors on a file, and
produce ROC or power-curve CSVs.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .config import ConfigurationManager, ExperimentConfig
from .exceptions import FileNotFoundError, ParseError, SpinDetectionError
from .experiment import ExperimentRunner
from .logging_config import get_logger, setup_logging
from .presets import load_preset, preset_names

DEFAULT_OUTPUTS = {
    "simulate": "observation.csv",
    "roc": "roc.csv",
    "power": "power.csv",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrfm-detect",
        description="MRFM single-spin detection: signal simulation, detectors and Monte-Carlo curves",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s simulate --preset fig5 --out obs.csv     # writes obs_H1.csv and obs_H0.csv
  %(prog)s detect --config exp.cfg --input obs_H1.csv
  %(prog)s roc --preset fig8 --trials 4000 --out fig8_roc.csv
  %(prog)s power --preset fig6 --out fig6_power.csv
        """,
    )

    parser.add_argument("command", choices=["simulate", "detect", "roc", "power"], help="Command to execute")

    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="Experiment configuration (.json or flat section.key = value)")
    source.add_argument("--preset", choices=preset_names(), help="Bundled experiment preset")

    parser.add_argument("--out", type=Path, help="Output CSV path")
    parser.add_argument("--input", type=Path, help="Observation CSV for the detect command")
    parser.add_argument("--seed", type=int, help="Master seed (overrides run.seed)")
    parser.add_argument("--trials", type=int, help="Monte-Carlo trials per hypothesis (overrides run.n_trials)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging output")
    return parser


def load_experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """Load the configuration named on the command line and apply overrides."""
    if args.preset:
        config = load_preset(args.preset)
    else:
        config = ConfigurationManager(args.config).load_config()
    if args.seed is not None:
        config.run.seed = args.seed
    if args.trials is not None:
        config.run.n_trials = args.trials
    return config


def main(argv: Optional[List[str]] = None) -> None:
    """Main CLI entry point."""
    args = build_parser().parse_args(argv)

    setup_logging(level="DEBUG" if args.verbose else "INFO")
    logger = get_logger(__name__)

    try:
        config = load_experiment_config(args)
        setup_logging(level="DEBUG" if args.verbose else config.logging.level, log_file=config.logging.log_file)
        runner = ExperimentRunner(config)
    except SpinDetectionError as e:
        logger.error(f"❌ Configuration failed: {e}")
        sys.exit(1)

    output_file = args.out or Path(DEFAULT_OUTPUTS.get(args.command, "out.csv"))

    try:
        if args.command == "simulate":
            logger.info("🔄 Simulating observations...")
            runner.simulate(output_file)

        elif args.command == "detect":
            if args.input is None:
                logger.error("❌ detect needs --input")
                sys.exit(1)
            logger.info(f"📊 Running detectors on {args.input}")
            for name, value in runner.detect(args.input).items():
                print(f"{name},{value!r}")

        elif args.command == "roc":
            logger.info("📊 Running ROC experiment...")
            runner.run_roc(output_file)

        elif args.command == "power":
            logger.info("📊 Running power-curve experiment...")
            runner.run_power(output_file)

    except FileNotFoundError as e:
        logger.error(f"❌ {e}")
        sys.exit(1)
    except ParseError as e:
        logger.error(f"❌ File error: {e}")
        sys.exit(1)
    except SpinDetectionError as e:
        logger.error(f"❌ {args.command} failed: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
