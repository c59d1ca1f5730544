"""Exception hierarchy shared by the solver, the CLI and the HTTP service."""

from pathlib import Path
from typing import Optional


class CCQueryError(Exception):
    """Base class for every error raised by this project."""


class GraphError(CCQueryError, ValueError):
    """Invalid vertex, self-loop, or a clustering that does not fit its graph."""


class OracleError(CCQueryError, ValueError):
    """A same-cluster query the oracle cannot answer."""


class BudgetExceededError(CCQueryError):
    """The exact search ran out of nodes before proving optimality."""

    def __init__(self, budget: int, nodes: int, n: int):
        self.budget = budget
        self.nodes = nodes
        self.n = n
        super().__init__(
            f"Exact search exceeded its budget of {budget} nodes "
            f"on a {n}-vertex instance (explored {nodes})"
        )


class InstanceFormatError(CCQueryError, ValueError):
    """Malformed graph, weighted or clustering file."""

    def __init__(self, message: str, path: Optional[Path] = None, line_no: Optional[int] = None):
        self.path = path
        self.line_no = line_no
        where = ""
        if path is not None:
            where = f"{path}"
            if line_no is not None:
                where += f":{line_no}"
            where += ": "
        elif line_no is not None:
            where = f"line {line_no}: "
        super().__init__(f"{where}{message}")


class ConfigError(CCQueryError, ValueError):
    """Experiment configuration that cannot be run."""
