"""Exception hierarchy shared by all eikograph modules."""

from __future__ import annotations


class EikographError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EikographError):
    """Malformed input data (bad lengths, unknown ids, schema violations)."""


class ConnectivityError(EikographError):
    """A graph or subgraph that must be connected is not."""


class MetricError(EikographError):
    """A supplied distance table violates the metric axioms."""


class FieldError(EikographError):
    """A scalar field is missing values or violates its role constraints."""


class ProblemError(EikographError):
    """A Dirichlet problem is not well posed (e.g. empty boundary)."""


class GraphError(EikographError):
    """A graph query was asked at a vertex where it is undefined."""


class HamiltonianError(EikographError):
    """Hamiltonian evaluation failed or validation rejected it."""


class CoercivityError(HamiltonianError):
    """Root bracketing exceeded the coercivity cap without a sign change."""


class ConvergenceError(EikographError):
    """Fixed-point iteration did not converge; carries the residual history."""

    def __init__(self, message: str, history: list[float] | None = None):
        super().__init__(message)
        self.history = list(history or [])
