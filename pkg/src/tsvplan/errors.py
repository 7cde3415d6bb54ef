"""Exception hierarchy shared across the package."""


class DesignError(Exception):
    """Bad input data: parse failures, unresolved references, invariant breaks."""


class ParseError(DesignError):
    """Design-file syntax or semantic error; carries (line, message) pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {n}: {m}" for n, m in self.errors))


class GridError(DesignError):
    """Grid configuration does not tile the footprint exactly."""


class InvalidMoveError(Exception):
    """A candidate farm move or reshape is geometrically illegal."""


class SolverError(Exception):
    """Steady-state solve failed; carries the final residual if known."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class SingularNetworkError(SolverError):
    """Thermal network has no conductive path to ambient."""


class ThermalRunawayError(SolverError):
    """Leakage fixed-point iteration diverged."""
