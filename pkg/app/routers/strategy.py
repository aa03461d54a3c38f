"""
strategy: classical, direct and hybrid swapping on two-edge bonds.
"""

import argparse

from app.models.strategy import BondPair
from app.routers.base import add_command_parser, add_grid_argument, format_windows
from app.schemas.experiment import Command, CommandResult, StrategyParams
from app.services import strategies

COMMAND = Command.STRATEGY
PURE_COLUMNS = ["alpha", "beta", "p_cep", "p_direct", "p_hybrid"]
COLUMNS = ["alpha", "beta", "lambda", "nu", "p_cep", "p_d", "p_d_star", "p_h", "fcc_hybrid", "fcc_cep"]

EPILOG = """columns:
  alpha, beta   Schmidt weights of the two edges of a bond
  lambda, nu    pure-part weights of the two edges
  p_cep         convert both bonds, then swap the singlets
  p_d           swap first, then purify (Bell outcomes kept as measured)
  p_d_star      direct swapping with the swapped edge order
  p_h           hybrid: PCM per bond, then swap and filter
  fcc_hybrid    p_h above the FCC threshold
  fcc_cep       p_cep above the FCC threshold

columns (--pure):
  alpha, beta, p_cep, p_direct, p_hybrid

metadata fcc_windows lists the alpha ranges where hybrid swapping
percolates on FCC and classical percolation does not.
"""


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = add_command_parser(subparsers, COMMAND.value, "Compare swapping strategies", EPILOG)
    add_grid_argument(parser, "alpha", "alpha", "first-edge Schmidt weights")
    add_grid_argument(parser, "beta", "beta", "second-edge Schmidt weights (default: 0.5)")
    parser.add_argument("--lambda", dest="lam", type=float, help="first-edge pure weight (default: 1.0)")
    parser.add_argument("--nu", type=float, help="second-edge pure weight (default: 1.0)")
    parser.add_argument("--pure", action="store_true", help="compare pure edges only")


def handle(params: StrategyParams, seed: int, workers: int) -> CommandResult:
    if params.pure:
        return CommandResult(rows=strategies.pure_report(params.alpha, params.beta), columns=PURE_COLUMNS)

    rows = []
    windows = []
    for beta in params.beta:
        gap = set()
        for alpha in params.alpha:
            bond = BondPair.of(alpha, beta, params.lam, params.nu)
            report = strategies.pms_strategy_report(bond, bond)
            fcc = strategies.fcc_embedding_check(bond)
            if fcc.feasible_hybrid and not fcc.feasible_cep:
                gap.add(alpha)
            rows.append(
                {
                    "alpha": alpha,
                    "beta": beta,
                    "lambda": params.lam,
                    "nu": params.nu,
                    "p_cep": report.p_cep,
                    "p_d": report.p_d,
                    "p_d_star": report.p_d_star,
                    "p_h": report.p_h,
                    "fcc_hybrid": fcc.feasible_hybrid,
                    "fcc_cep": fcc.feasible_cep,
                }
            )
        found = strategies.locate_window(gap.__contains__, params.alpha)
        windows.append(f"beta={beta}:{format_windows(found)}")
    return CommandResult(rows=rows, columns=COLUMNS, extra={"fcc_windows": ",".join(windows)})
