"""Exception hierarchy shared by every module."""

from __future__ import annotations


class ParameterError(ValueError):
    """Input outside the admissible range (exponents, masses, grid sizes)."""


class GridMismatchError(ValueError):
    """Two fields that must share a grid were built on different grids."""


class SolverError(RuntimeError):
    """A numerical procedure failed to converge or to bracket a root.

    ``diagnostics`` carries whatever the failing routine knew at the time.
    """

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ExpansionRegimeError(SolverError):
    """Small-parameter fit rejected because the data left the asymptotic regime."""
