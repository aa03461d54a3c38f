"""
distill: bond singlet conversion probability of n identical edges.
"""

import argparse

from app.models.distillation import Scheme
from app.routers.base import add_command_parser, add_grid_argument
from app.schemas.experiment import Command, CommandResult, DistillParams
from app.services import distillation

COMMAND = Command.DISTILL
COLUMNS = ["scheme", "n", "alpha", "lambda", "scp", "stderr"]

EPILOG = """columns:
  scheme   recycling | dss | three | auto
  n        edges per bond
  alpha    Schmidt weight of the edge state rho(alpha, lambda)
  lambda   weight of the pure part
  scp      singlet conversion probability
  stderr   Monte Carlo standard error (0 for closed forms)
"""


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = add_command_parser(subparsers, COMMAND.value, "Distillation SCP per scheme", EPILOG)
    parser.add_argument("--scheme", choices=[s.value for s in Scheme], help="distillation scheme (default: recycling)")
    parser.add_argument("--n", type=int, nargs="+", help="edge counts (default: 2 4 6 8)")
    add_grid_argument(parser, "alpha", "alpha", "Schmidt weights (default: 0.5)")
    add_grid_argument(parser, "lambda", "lam", "pure-part weights (default: 1.0)")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials of the three scheme (default: 4096)")


def handle(params: DistillParams, seed: int, workers: int) -> CommandResult:
    rows = []
    for n in params.n:
        for alpha in params.alpha:
            for lam in params.lam:
                stderr = 0.0
                if params.scheme is Scheme.THREE:
                    estimate = distillation.recycling_scp_three(n, alpha, lam, seed, params.trials, workers)
                    value, stderr = estimate.p_hat, estimate.stderr
                else:
                    value = distillation.scp(n, alpha, lam, params.scheme)
                rows.append(
                    {
                        "scheme": params.scheme.value,
                        "n": n,
                        "alpha": alpha,
                        "lambda": lam,
                        "scp": value,
                        "stderr": stderr,
                    }
                )
    return CommandResult(rows=rows, columns=COLUMNS)
