"""
entperc command-line entry point.

Builds one argparse subcommand per command module, turns the flags (or
a JSON config document) into an ExperimentConfig and writes the result
table. Errors are reported as a JSON envelope on stderr.

Exit codes:
    0  success
    1  validation or runtime error
    2  acceptance failure (verify)

Example:
    python cli.py --seed 7 distill --n 2 4 --alpha 0.6
    python cli.py --format json -o square.json square --alpha-grid 0.5:0.6:0.01
    python cli.py --config run.json
"""

import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional, Sequence

from pydantic import ValidationError

from app.config import settings
from app.routers import COMMANDS
from app.routers.base import collect_params
from app.schemas.experiment import (
    PARAMS_BY_COMMAND,
    Command,
    ExperimentConfig,
    OutputFormat,
)
from common.config.base_settings import LOG_LEVELS
from common.utils import (
    AcceptanceError,
    ConfigValidationError,
    EntpercError,
    error_response,
    run_metadata,
    write_table,
)
from common.utils.exceptions import EXIT_OK, EXIT_VALIDATION


logger = logging.getLogger("entperc")


# =============================================================================
# Parser
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entperc",
        description="Singlet distribution in mixed-state quantum networks",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
    parser.add_argument(
        "--format", choices=[f.value for f in OutputFormat], default=OutputFormat.CSV.value,
        help="table format",
    )
    parser.add_argument(
        "--deterministic", action="store_true", help="omit the timestamp from the metadata"
    )
    parser.add_argument(
        "--workers", type=int, default=None, help="worker processes (default: ENTPERC_THREADS)"
    )
    parser.add_argument(
        "--log-level", choices=LOG_LEVELS, default=None, help="log level (default: ENTPERC_LOG_LEVEL)"
    )
    parser.add_argument("--config", default=None, help="JSON experiment config; replaces the flags")

    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    for module in COMMANDS.values():
        module.register(subparsers)
    return parser


def configure_logging(level: Optional[str] = None) -> None:
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format=settings.LOG_FORMAT,
        datefmt=settings.LOG_DATEFMT,
        stream=sys.stderr,
    )


# =============================================================================
# Configuration
# =============================================================================


def _validation_error(exc: ValidationError) -> ConfigValidationError:
    errors = [
        {"field": ".".join(str(part) for part in error["loc"]), "message": error["msg"]}
        for error in exc.errors()
    ]
    return ConfigValidationError("Invalid experiment configuration", errors=errors)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed global and subcommand flags."""
    command = Command(args.command)
    try:
        return ExperimentConfig(
            command=command,
            params=collect_params(args, PARAMS_BY_COMMAND[command]),
            seed=args.seed,
            output_path=args.output,
            format=args.format,
            deterministic=args.deterministic,
            workers=args.workers,
        )
    except ValidationError as exc:
        raise _validation_error(exc)


def load_config_file(path: str) -> ExperimentConfig:
    """
    Read an ExperimentConfig from a JSON document.

    Raises:
        ConfigValidationError: If the file is unreadable, not JSON or has unknown keys
    """
    try:
        with open(path, encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigValidationError(f"Cannot load config {path}: {exc}", details={"path": path})
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as exc:
        raise _validation_error(exc)


# =============================================================================
# Run
# =============================================================================


def run(config: ExperimentConfig, argv: Sequence[str] = ()) -> int:
    """
    Execute one experiment and write its table.

    Returns:
        Process exit code

    Raises:
        EntpercError: On validation, runtime or acceptance failure
    """
    workers = settings.resolve_workers(config.workers)
    logger.debug("Running %s with seed=%d workers=%d", config.command.value, config.seed, workers)
    try:
        params = config.typed_params()
        result = COMMANDS[config.command].handle(params, config.seed, workers)
    except ValidationError as exc:
        raise _validation_error(exc)

    metadata = run_metadata(
        config.command.value,
        seed=config.seed,
        argv=argv,
        version=settings.VERSION,
        schema=settings.SCHEMA_VERSION,
        deterministic=config.deterministic,
        extra=result.extra,
    )
    write_table(result.rows, result.columns, metadata, config.output_path, config.format.value)

    if result.acceptance_failure:
        raise AcceptanceError(result.acceptance_failure)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for acceptance failures
        return EXIT_OK if exc.code in (0, None) else EXIT_VALIDATION

    try:
        settings.validate_required()
    except ValueError as exc:
        print(json.dumps(error_response(str(exc), code="CONFIG_INVALID")), file=sys.stderr)
        return ConfigValidationError.exit_code
    configure_logging(args.log_level)

    try:
        if args.config:
            config = load_config_file(args.config)
        elif args.command:
            config = config_from_args(args)
        else:
            parser.print_help(sys.stderr)
            raise ConfigValidationError("A command or --config is required")
        return run(config, argv)
    except EntpercError as exc:
        payload: Dict[str, Any] = error_response(exc.message, code=exc.code, details=exc.details)
        print(json.dumps(payload), file=sys.stderr)
        logger.debug("Failed with %s", exc.code)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
