"""
verify: formula-vs-oracle suites.
"""

import argparse

from app.routers.base import add_command_parser
from app.schemas.experiment import Command, CommandResult, VerifyParams
from app.services import verification
from common.utils.exceptions import AcceptanceError

COMMAND = Command.VERIFY
COLUMNS = ["suite", "draws", "max_error", "tolerance", "passed"]

EPILOG = """columns:
  suite       suite name
  draws       random parameter tuples evaluated
  max_error   largest |closed form - oracle| (mismatch counts as 1)
  tolerance   acceptance tolerance
  passed      max_error < tolerance

exit code 2 when any suite fails.
"""


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = add_command_parser(subparsers, COMMAND.value, "Check closed forms against the density-matrix oracle", EPILOG)
    parser.add_argument("--suite", nargs="+", choices=list(verification.SUITES) + ["all"], help="suites to run (default: all)")
    parser.add_argument("--draws", type=int, help="random draws per suite (default: 1000)")


def handle(params: VerifyParams, seed: int, workers: int) -> CommandResult:
    reports = verification.run_suites(params.suite, params.draws, seed)
    failure = None
    try:
        verification.require_passed(reports)
    except AcceptanceError as exc:
        failure = exc.message
    return CommandResult(
        rows=[report.model_dump() for report in reports],
        columns=COLUMNS,
        acceptance_failure=failure,
    )
