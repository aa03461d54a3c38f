"""
entperc command modules.

One module per subcommand; cli.py registers them all from COMMANDS.
"""

from app.routers import (
    distill,
    hierarchy,
    percolate,
    route,
    square,
    strategy,
    threshold,
    verify,
)

COMMANDS = {
    module.COMMAND: module
    for module in (verify, distill, percolate, threshold, route, strategy, square, hierarchy)
}

__all__ = ["COMMANDS"]
