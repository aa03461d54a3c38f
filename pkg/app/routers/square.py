"""
square: square protocol with XZ-swapping vs doubled classical percolation.
"""

import argparse

from app.models.lattice import Geometry
from app.models.strategy import BondPair
from app.routers.base import add_command_parser, add_grid_argument, format_windows
from app.schemas.experiment import Command, CommandResult, SquareParams
from app.services import strategies
from app.services.percolation import THRESHOLDS

COMMAND = Command.SQUARE
COLUMNS = ["alpha", "p_sq", "p_cep_tilde", "p_c", "alpha_hat", "alpha_tilde"]

EPILOG = """columns:
  alpha         first-edge Schmidt weight
  p_sq          square protocol success (triangular-lattice bond probability)
  p_cep_tilde   classical percolation on the same square
  p_c           PCM success per bond
  alpha_hat     Schmidt weight after PCM
  alpha_tilde   Schmidt weight after XZ-swapping two alpha_hat edges

metadata square_window lists the alpha ranges where
p_sq > p_c(triangular) >= p_cep_tilde.
"""


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = add_command_parser(subparsers, COMMAND.value, "Square protocol on the triangular embedding", EPILOG)
    add_grid_argument(parser, "alpha", "alpha", "first-edge Schmidt weights")
    parser.add_argument("--beta", type=float, help="second-edge Schmidt weight (default: 0.5)")
    parser.add_argument("--lambda", dest="lam", type=float, help="first-edge pure weight (default: 0.98)")
    parser.add_argument("--nu", type=float, help="second-edge pure weight (default: 0.98)")


def handle(params: SquareParams, seed: int, workers: int) -> CommandResult:
    threshold = THRESHOLDS[Geometry.TRIANGULAR]
    rows = []
    inside = set()
    for alpha in params.alpha:
        report = strategies.square_protocol_prob(BondPair.of(alpha, params.beta, params.lam, params.nu))
        if report.p_sq > threshold >= report.p_cep_tilde:
            inside.add(alpha)
        rows.append({"alpha": alpha, **report.model_dump()})
    window = format_windows(strategies.locate_window(inside.__contains__, params.alpha))
    return CommandResult(rows=rows, columns=COLUMNS, extra={"square_window": window})
