"""
hierarchy: diamond and tree networks, classical recursion vs hybrid reduction.
"""

import argparse

from app.models.strategy import SIMULATION_MAX_ITERATION, BondPair, HierarchyKind, HierarchySpec
from app.routers.base import add_command_parser, add_grid_argument
from app.schemas.experiment import Command, CommandResult, HierarchyParams
from app.services import strategies

COMMAND = Command.HIERARCHY
COLUMNS = ["kind", "iteration", "alpha", "p_cep", "p_hybrid_hat", "stderr"]

EPILOG = f"""columns:
  kind           diamond | tree
  iteration      hierarchy level i
  alpha          first-edge Schmidt weight
  p_cep          classical percolation recursion
  p_hybrid_hat   Monte Carlo hybrid reduction (empty above i = {SIMULATION_MAX_ITERATION} or with --no-simulate)
  stderr         standard error of p_hybrid_hat
"""


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = add_command_parser(subparsers, COMMAND.value, "Diamond and tree hierarchies", EPILOG)
    parser.add_argument("--kind", nargs="+", choices=[k.value for k in HierarchyKind], help="hierarchies (default: both)")
    parser.add_argument("--iteration", type=int, nargs="+", help="levels (default: 1 2 3)")
    add_grid_argument(parser, "alpha", "alpha", "first-edge Schmidt weights")
    parser.add_argument("--beta", type=float, help="second-edge Schmidt weight (default: 0.5)")
    parser.add_argument("--lambda", dest="lam", type=float, help="first-edge pure weight (default: 0.9)")
    parser.add_argument("--nu", type=float, help="second-edge pure weight (default: 0.9)")
    parser.add_argument("--trials", type=int, help="Monte Carlo networks per point (default: 2000)")
    parser.add_argument("--random-order", dest="random_order", action="store_true",
                        help="swap at a random eligible node")
    parser.add_argument("--no-simulate", dest="simulate", action="store_false",
                        help="skip the hybrid Monte Carlo")


def handle(params: HierarchyParams, seed: int, workers: int) -> CommandResult:
    rows = []
    for kind in params.kind:
        for iteration in params.iteration:
            for alpha in params.alpha:
                spec = HierarchySpec(
                    kind=kind,
                    iteration=iteration,
                    bond=BondPair.of(alpha, params.beta, params.lam, params.nu),
                )
                p_cep = strategies.diamond_cep(spec) if kind is HierarchyKind.DIAMOND else strategies.tree_cep(spec)
                p_hybrid = stderr = None
                if params.simulate and iteration <= SIMULATION_MAX_ITERATION:
                    estimate = strategies.hybrid_hierarchy_sim(
                        spec, seed, params.trials, workers, params.random_order
                    )
                    p_hybrid, stderr = estimate.p_hat, estimate.stderr
                rows.append(
                    {
                        "kind": kind.value,
                        "iteration": iteration,
                        "alpha": alpha,
                        "p_cep": p_cep,
                        "p_hybrid_hat": p_hybrid,
                        "stderr": stderr,
                    }
                )
    return CommandResult(rows=rows, columns=COLUMNS)
