"""
threshold: spanning-crossing estimate of the bond percolation threshold.
"""

import argparse

from app.models.lattice import Boundary, Geometry, LatticeSpec
from app.routers.base import add_command_parser
from app.schemas.experiment import Command, CommandResult, ThresholdParams
from app.services import percolation

COMMAND = Command.THRESHOLD
COLUMNS = ["geometry", "size", "boundary", "trials", "p_hat", "ci_low", "ci_high", "converged", "reference"]

EPILOG = """columns:
  geometry    square | triangular | honeycomb | simple_cubic | fcc
  size        linear size L
  boundary    open | periodic_transverse
  trials      lattices sampled
  p_hat       p where the spanning frequency crosses 1/2
  ci_low      lower end of the confidence interval
  ci_high     upper end of the confidence interval
  converged   false when the crossing is not bracketed
  reference   threshold of the infinite lattice
"""


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = add_command_parser(subparsers, COMMAND.value, "Estimate the percolation threshold", EPILOG)
    parser.add_argument("--geometry", choices=[g.value for g in Geometry], help="lattice geometry (default: square)")
    parser.add_argument("--size", type=int, help="linear size L (default: 64)")
    parser.add_argument("--boundary", choices=[b.value for b in Boundary], help="boundary (default: open)")
    parser.add_argument("--trials", type=int, help="lattices sampled, at least 100 (default: 400)")
    parser.add_argument("--resolution", type=float, help="grid step in p (default: 0.005)")
    parser.add_argument("--p-min", dest="p_min", type=float, help="grid start (default: 0)")
    parser.add_argument("--p-max", dest="p_max", type=float, help="grid end (default: 1)")
    parser.add_argument("--confidence", type=float, help="confidence level (default: 0.95)")


def handle(params: ThresholdParams, seed: int, workers: int) -> CommandResult:
    spec = LatticeSpec(geometry=params.geometry, linear_size=params.size, boundary=params.boundary)
    estimate = percolation.estimate_threshold(
        spec,
        trials=params.trials,
        resolution=params.resolution,
        seed=seed,
        workers=workers,
        p_min=params.p_min,
        p_max=params.p_max,
        confidence=params.confidence,
    )
    row = {
        "geometry": spec.geometry.value,
        "size": spec.linear_size,
        "boundary": spec.boundary.value,
        "trials": estimate.trials,
        "p_hat": estimate.p_hat,
        "ci_low": estimate.ci_low,
        "ci_high": estimate.ci_high,
        "converged": estimate.converged,
        "reference": percolation.THRESHOLDS[spec.geometry],
    }
    return CommandResult(rows=[row], columns=COLUMNS)
