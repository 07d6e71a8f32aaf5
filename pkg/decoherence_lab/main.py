# decoherence_lab/main.py

import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from . import orchestrator
from .config import load_config
from .errors import ConfigNotFoundError, ConfigValidationError, DecoherenceLabError, OutputWriteError

logger = logging.getLogger(__name__)

CONFIG_DIR = "configs"
ORDER_CHOICES = {"exact": "exact", "first": "first_order"}

EXIT_OK = 0
EXIT_LIBRARY_ERROR = 1
EXIT_CONFIG_NOT_FOUND = 2
EXIT_CONFIG_INVALID = 3
EXIT_OUTPUT_ERROR = 4


def _gamma_list(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decoherence-lab",
        description="Intrinsic-decoherence scenarios written out as CSV.",
    )
    parser.add_argument("scenario", choices=sorted(orchestrator.PLUGIN_REGISTRY))
    parser.add_argument("--config", help=f"YAML scenario file (default: {CONFIG_DIR}/<scenario>.yaml)")
    parser.add_argument("--gamma-inv", type=_gamma_list, help="comma-separated gamma_inv values, e.g. 0,0.2,0.5")
    parser.add_argument("--out", help="output directory (default: run.output_dir or $DECOHERENCE_LAB_OUTPUT_DIR)")
    parser.add_argument("--order", choices=sorted(ORDER_CHOICES), help="Milburn map order")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(level=logging.INFO, format="%(levelname)-8s - %(name)s - %(message)s")
    args = build_parser().parse_args(argv)

    config_path = args.config or os.path.join(CONFIG_DIR, f"{args.scenario}.yaml")
    overrides = {
        "gamma_inv_list": args.gamma_inv,
        "map_order": ORDER_CHOICES[args.order] if args.order else None,
        "run": {"output_dir": args.out},
    }
    try:
        config = load_config(config_path, overrides=overrides, scenario=args.scenario)
        orchestrator.run_scenario(config)
    except ConfigNotFoundError as e:
        logger.error(str(e))
        return EXIT_CONFIG_NOT_FOUND
    except ConfigValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG_INVALID
    except OutputWriteError as e:
        logger.error(f"Output failure: {e}")
        return EXIT_OUTPUT_ERROR
    except DecoherenceLabError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_LIBRARY_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
