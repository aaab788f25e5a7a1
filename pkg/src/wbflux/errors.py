"""Exception hierarchy shared by all wbflux modules."""

from __future__ import annotations


class WBFluxError(Exception):
    """Base class for all errors raised by :mod:`wbflux`."""


class AssumptionViolation(WBFluxError, ValueError):
    """A structural assumption on the model (e.g. ``inf D' > 0``) fails."""


class NonIntegrableSource(WBFluxError, ValueError):
    """``f'/b`` is unbounded on the requested integration range."""


class ConvergenceFailure(WBFluxError, RuntimeError):
    pass


class QuadratureFailure(WBFluxError, ValueError):
    pass


class GridError(WBFluxError, ValueError):
    pass


class IncompatibleGrids(GridError):
    pass


class StateBlowup(WBFluxError, RuntimeError):
    """The numerical solution left the admissible envelope."""

    def __init__(self, message: str, step: int | None = None) -> None:
        super().__init__(message)
        self.step = step


class HistoryUnavailable(WBFluxError, RuntimeError):
    pass


class ConfigError(WBFluxError, ValueError):
    pass
