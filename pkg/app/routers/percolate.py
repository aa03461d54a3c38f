"""
percolate: percolation curves, or CEP feasibility with --cep.
"""

import argparse

from app.models.distillation import Scheme
from app.models.lattice import Boundary, Geometry, LatticeSpec
from app.routers.base import add_command_parser, add_grid_argument
from app.schemas.experiment import Command, CommandResult, PercolateParams
from app.services import percolation

COMMAND = Command.PERCOLATE
CURVE_COLUMNS = ["geometry", "size", "boundary", "p", "spanning_freq", "theta_hat", "stderr"]
CEP_COLUMNS = ["geometry", "scheme", "n", "alpha", "lambda", "scp", "threshold", "feasible", "ceiling"]

EPILOG = """columns (curve):
  geometry        square | triangular | honeycomb | simple_cubic | fcc
  size            linear size L
  boundary        open | periodic_transverse
  p               bond probability
  spanning_freq   fraction of trials with a spanning cluster
  theta_hat       mean fraction of nodes in the largest cluster
  stderr          standard error of theta_hat

columns (--cep):
  geometry, scheme, n, alpha, lambda
  scp             bond SCP of n edges
  threshold       bond percolation threshold of the geometry
  feasible        scp > threshold
  ceiling         largest SCP reachable with n = 2 or 3 (empty otherwise)
"""


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = add_command_parser(subparsers, COMMAND.value, "Percolation curves and CEP feasibility", EPILOG)
    parser.add_argument("--geometry", choices=[g.value for g in Geometry], help="lattice geometry (default: square)")
    parser.add_argument("--size", type=int, help="linear size L (default: 64)")
    parser.add_argument("--boundary", choices=[b.value for b in Boundary], help="boundary (default: open)")
    add_grid_argument(parser, "p", "p", "bond probabilities (default: 0.5)")
    parser.add_argument("--trials", type=int, help="lattices per point (default: 400)")
    parser.add_argument("--cep", action="store_true", help="report CEP feasibility instead of curves")
    parser.add_argument("--n", type=int, nargs="+", help="edges per bond for --cep (default: 2 3)")
    add_grid_argument(parser, "alpha", "alpha", "Schmidt weights for --cep (default: 0.5)")
    add_grid_argument(parser, "lambda", "lam", "pure-part weights for --cep (default: 1.0)")
    parser.add_argument("--scheme", choices=[s.value for s in Scheme], help="distillation scheme for --cep (default: auto)")


def handle(params: PercolateParams, seed: int, workers: int) -> CommandResult:
    if params.cep:
        rows = []
        for n in params.n:
            for alpha in params.alpha:
                for lam in params.lam:
                    report = percolation.cep_feasible(n, alpha, lam, params.geometry, params.scheme)
                    rows.append(
                        {
                            "geometry": params.geometry.value,
                            "scheme": report.scheme.value,
                            "n": n,
                            "alpha": alpha,
                            "lambda": lam,
                            "scp": report.scp,
                            "threshold": report.threshold,
                            "feasible": report.feasible,
                            "ceiling": report.ceiling,
                        }
                    )
        return CommandResult(rows=rows, columns=CEP_COLUMNS)

    spec = LatticeSpec(geometry=params.geometry, linear_size=params.size, boundary=params.boundary)
    points = percolation.theta_curve(spec, params.p, params.trials, seed, workers)
    rows = [
        {
            "geometry": spec.geometry.value,
            "size": spec.linear_size,
            "boundary": spec.boundary.value,
            **point.model_dump(),
        }
        for point in points
    ]
    return CommandResult(rows=rows, columns=CURVE_COLUMNS)
