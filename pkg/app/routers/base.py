"""
Shared plumbing of the command modules.

Every command module exposes:

- COMMAND: the Command it serves
- register(subparsers): add its argparse subparser
- handle(params, seed, workers): compute a CommandResult

Subcommand flags default to argparse.SUPPRESS, so only flags given on
the command line reach the parameter model and its defaults apply to
the rest.
"""

import argparse
from typing import Any, Dict, Type

from pydantic import BaseModel

from app.schemas.experiment import expand_grid


GRID_SUFFIX = "_grid"


def add_command_parser(
    subparsers: argparse._SubParsersAction, name: str, summary: str, epilog: str
) -> argparse.ArgumentParser:
    return subparsers.add_parser(
        name,
        help=summary,
        description=summary,
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        argument_default=argparse.SUPPRESS,
    )


def add_grid_argument(
    parser: argparse.ArgumentParser, flag: str, dest: str, help_text: str
) -> None:
    """Add `--flag v1 v2 ...` and `--flag-grid start:stop:step` for one list parameter."""
    parser.add_argument(f"--{flag}", dest=dest, type=float, nargs="+", help=help_text)
    parser.add_argument(
        f"--{flag}-grid",
        dest=dest + GRID_SUFFIX,
        metavar="START:STOP:STEP",
        help=f"inclusive grid for --{flag}",
    )


def collect_params(args: argparse.Namespace, model: Type[BaseModel]) -> Dict[str, Any]:
    """Keep the parsed flags that belong to the parameter model."""
    fields = model.model_fields
    params: Dict[str, Any] = {}
    for key, value in vars(args).items():
        if key.endswith(GRID_SUFFIX) and key[: -len(GRID_SUFFIX)] in fields:
            params[key[: -len(GRID_SUFFIX)]] = expand_grid(value)
        elif key in fields and key not in params:
            params[key] = value
    return params


def format_windows(windows) -> str:
    """Render (first, last) windows as "a..b;c..d", or "none"."""
    if not windows:
        return "none"
    return ";".join(f"{first!r}..{last!r}" for first, last in windows)
