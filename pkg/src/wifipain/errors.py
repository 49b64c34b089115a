"""Exception hierarchy. The CLI maps these onto exit codes."""


class WifiPainError(Exception):
    """Base class for all package errors."""


class DataError(WifiPainError, ValueError):
    """Malformed or inconsistent input data (bad CSV row, unknown home, ...)."""


class DimensionError(DataError):
    """Two matrices whose shapes must agree do not."""


class SolverError(WifiPainError):
    """A solver cannot handle the instance it was given."""


class NodeLimitExceeded(SolverError):
    """Branch-and-bound ran out of its node budget.

    ``incumbent`` holds the best allocation found so far (a channel index per
    home) or ``None`` if no leaf was reached.
    """

    def __init__(self, message, incumbent=None, incumbent_objective=None):
        super().__init__(message)
        self.incumbent = incumbent
        self.incumbent_objective = incumbent_objective
