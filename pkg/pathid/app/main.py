"""
Command-line entry point

    python -m pathid <subcommand> --config <path> [--out <path>] [--format csv|json] [--seed N]

Exit codes: 0 success, 2 invalid configuration, 3 numeric/domain error,
1 anything unexpected.
"""
import argparse
import json
import sys
from typing import List, Optional

from loguru import logger
from pydantic import ValidationError

from pathid.app.config import settings
from pathid.app.run_config import OutputFormat, RunConfig, as_validation_error, config_schema, parse_config
from pathid.core.errors import ConfigError, DomainError, SpecValidationError
from pathid.handlers import HANDLERS, CommandResult
from pathid.utils.logger import setup_logger
from pathid.utils.serialization import dumps_json, dumps_record_csv, dumps_scan_csv, write_text

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_DOMAIN = 3

DESCRIPTIONS = {
    "rate": "pair rate of the configured interferometer",
    "scan": "1D/2D phase scan with visibility extraction",
    "duality": "visibility/distinguishability of a two-block grouping",
    "block": "rate with sources blocked, attribution probabilities",
    "gedanken": "both grouping perspectives and their contradiction",
    "imperfect": "visibility loss from misalignment and yield imbalance",
    "estimate-v13": "outer-pair visibility from the two neighbour visibilities",
    "opld": "path-length coherence conditions",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathid", description="Multi-source path-identity interferometer simulator")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in DESCRIPTIONS.items():
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.add_argument("--config", required=True, help="Run configuration (JSON, or YAML by suffix)")
        sub.add_argument("--out", default=None, help="Output file, standard output if omitted")
        sub.add_argument("--format", choices=[f.value for f in OutputFormat], default=None,
                         help="Output format, overrides output.format")
        sub.add_argument("--seed", type=int, default=None, help="RNG seed, overrides the config")
        sub.add_argument("--log-level", default=None, help="Console log level (default from settings)")
    schema = subparsers.add_parser("schema", help="print the run configuration JSON schema")
    schema.add_argument("--out", default=None)
    schema.add_argument("--log-level", default=None)
    return parser


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Fold command-line overrides into the config and validate the result like a config file"""
    document = config.model_dump()
    if args.out is not None:
        document["output"]["path"] = args.out
    if args.format is not None:
        document["output"]["format"] = args.format
    if args.seed is not None:
        document["seed"] = args.seed
        if document["scan"] is not None:
            document["scan"]["rng_seed"] = args.seed
    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        raise as_validation_error(e) from e


def metadata(config: RunConfig) -> dict:
    """Effective configuration echoed into JSON output; the output path is left out"""
    echoed = {
        "config": config.model_dump(mode="json", exclude={"output"}),
        "settings": {
            "SCAN_GRID_POINTS": settings.SCAN_GRID_POINTS,
            "OUTPUT_DIGITS": settings.OUTPUT_DIGITS,
            "PHASE_TOLERANCE": settings.PHASE_TOLERANCE,
            "FIT_MAX_ITERATIONS": settings.FIT_MAX_ITERATIONS,
            "TILT_ANCHOR_ANGLE_DEG": settings.TILT_ANCHOR_ANGLE_DEG,
            "TILT_ANCHOR_OVERLAP": settings.TILT_ANCHOR_OVERLAP,
        },
        "units_out": "radians",
    }
    if config.scan is not None:
        echoed["scan"] = config.to_scanspec().model_dump(mode="json")
    return echoed


def render(result: CommandResult, config: RunConfig) -> str:
    digits = settings.OUTPUT_DIGITS
    if config.output.format == OutputFormat.JSON:
        document = {"command": result.command, "metadata": metadata(config), "result": result.record}
        if result.table is not None:
            document["rows"] = [
                dict(zip(("phase_a", "phase_c", "rate_hz", "counts", "sigma"), row))
                for row in result.table.rows()
            ]
        return dumps_json(document, digits)
    if result.table is not None:
        return dumps_scan_csv(result.table.rows(), digits)
    return dumps_record_csv(result.record, digits)


def run_command(command: str, args: argparse.Namespace) -> int:
    config = apply_overrides(parse_config(args.config), args)
    handler = HANDLERS[command](config)
    result = handler.run()
    write_text(render(result, config), config.output.path)
    if config.output.path:
        logger.info(f"Wrote {config.output.format.value} output to {config.output.path}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logger(args.log_level or settings.LOG_LEVEL, settings.LOG_FILE)

    try:
        if args.command == "schema":
            write_text(json.dumps(config_schema(), indent=2) + "\n", args.out)
            return EXIT_OK
        return run_command(args.command, args)
    except (ConfigError, SpecValidationError, ValidationError) as e:
        logger.debug(f"Validation failure: {e!r}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except DomainError as e:
        logger.debug(f"Domain failure: {e!r}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except Exception as e:
        logger.exception(f"Unexpected failure in '{args.command}': {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
