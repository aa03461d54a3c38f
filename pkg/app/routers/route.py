"""
route: controller, burning and GHZ routing over singlet graphs.

The graph comes from an edge-list file (--edges) or from sampled open
bonds of a lattice, one sample per --samples.
"""

import argparse
import logging
from typing import List, Tuple

from app.models.lattice import Boundary, Geometry, LatticeSpec
from app.models.network import RouteReport, SingletGraph
from app.routers.base import add_command_parser
from app.schemas.experiment import Command, CommandResult, RouteParams, RouteProtocol
from app.services import percolation, routing
from common.utils.exceptions import ParameterRangeError
from common.utils.streams import stream_rng


logger = logging.getLogger(__name__)

COMMAND = Command.ROUTE
COLUMNS = [
    "sample",
    "protocol",
    "success",
    "rounds",
    "completion_round",
    "messages",
    "path_length",
    "distillation_messages",
    "nodes",
    "edges",
]

EPILOG = """columns:
  sample                  sample index (0 for an edge-list file)
  protocol                controller | burning | ghz
  success                 A and B share a singlet (or GHZ state) at the end
  rounds                  round at which B joins the route; 2(N-1) on failure
                          (0 for the controller)
  completion_round        round at which the Swap retrace or the last PhaseInfo
                          reaches A, empty on failure
  messages                classical messages sent
  path_length             edges on the route, empty on failure
  distillation_messages   PCM outcome messages, 0 when fused into Burn
  nodes                   graph nodes
  edges                   graph singlets

--trace and --write-edges apply to the first sample.
"""


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = add_command_parser(subparsers, COMMAND.value, "Route a singlet between A and B", EPILOG)
    parser.add_argument("--edges", help="edge-list file with 'u v' lines")
    parser.add_argument("--source", type=int, help="node A (default: first node of the left face)")
    parser.add_argument("--target", type=int, help="node B (default: last node of the right face)")
    parser.add_argument("--geometry", choices=[g.value for g in Geometry], help="lattice geometry (default: square)")
    parser.add_argument("--size", type=int, help="linear size L (default: 8)")
    parser.add_argument("--boundary", choices=[b.value for b in Boundary], help="boundary (default: open)")
    parser.add_argument("--p", type=float, help="bond probability of sampled lattices (default: 0.7)")
    parser.add_argument("--samples", type=int, help="sampled lattices (default: 1)")
    parser.add_argument("--protocol", choices=[p.value for p in RouteProtocol], help="protocol (default: all)")
    parser.add_argument("--keep", type=int, nargs="+", help="extra nodes kept in the GHZ state")
    parser.add_argument("--fuse-distillation", dest="fuse_distillation", action="store_true",
                        help="carry PCM outcomes inside Burn messages")
    parser.add_argument("--trace", help="write the quantum trace of the first sample as JSON")
    parser.add_argument("--write-edges", dest="write_edges", help="write the first sample's edge list")


def _graphs(params: RouteParams, seed: int) -> List[Tuple[SingletGraph, int]]:
    """(graph, bonds exchanging distillation outcomes) per sample."""
    if params.edges:
        try:
            edges = routing.read_edge_list(params.edges)
        except OSError as exc:
            raise ParameterRangeError(f"Cannot read {params.edges}: {exc}", details={"path": params.edges})
        if params.source is None or params.target is None:
            raise ParameterRangeError("--edges needs --source and --target")
        graph = SingletGraph.from_edges(edges, params.source, params.target)
        return [(graph, len(graph.edges))]

    spec = LatticeSpec(geometry=params.geometry, linear_size=params.size, boundary=params.boundary)
    lattice = percolation.generate_lattice(spec)
    graphs = []
    for index in range(params.samples):
        config = percolation.sample_bonds(lattice, params.p, stream_rng(seed, "route.sample", index))
        graph = percolation.singlet_graph_from_bonds(config, params.source, params.target)
        graphs.append((graph, lattice.bond_count))
    return graphs


def _row(sample: int, report: RouteReport, graph: SingletGraph) -> dict:
    return {
        "sample": sample,
        "protocol": report.protocol,
        "success": report.success,
        "rounds": report.rounds,
        "completion_round": report.completion_round,
        "messages": report.messages,
        "path_length": len(report.path) - 1 if report.path else None,
        "distillation_messages": report.distillation_messages,
        "nodes": graph.node_count,
        "edges": len(graph.edges),
    }


def handle(params: RouteParams, seed: int, workers: int) -> CommandResult:
    wanted = params.protocol
    rows = []
    for sample, (graph, bond_count) in enumerate(_graphs(params, seed)):
        trace = None
        if wanted in (RouteProtocol.CONTROLLER, RouteProtocol.ALL):
            path = routing.controller_path(graph)
            report = RouteReport(
                protocol="controller", success=path is not None, rounds=0, messages=0, path=path
            )
            rows.append(_row(sample, report, graph))
        if wanted in (RouteProtocol.BURNING, RouteProtocol.ALL):
            report = routing.burning_route(graph, params.fuse_distillation, bond_count)
            rows.append(_row(sample, report, graph))
            if report.success and report.path:
                trace = routing.swap_chain_trace(report.path, seed, graph)
        if wanted in (RouteProtocol.GHZ, RouteProtocol.ALL):
            outcome = routing.ghz_protocol(graph, params.keep, seed)
            rows.append(_row(sample, outcome.report, graph))
            if outcome.report.success:
                trace = outcome.trace

        if sample == 0:
            if params.write_edges:
                routing.write_edge_list(graph.edges, params.write_edges)
            if params.trace:
                if trace is None:
                    logger.warning("No successful route in sample 0; trace not written")
                else:
                    routing.write_trace(trace, params.trace)
    return CommandResult(rows=rows, columns=COLUMNS)
