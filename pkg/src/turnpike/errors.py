"""Exception hierarchy. Every error carries a ``details`` dict so the CLI can
emit machine-readable failure reports."""

from __future__ import annotations


class TurnpikeError(Exception):
    """Base class for all library errors."""

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict:
        out = {"error": type(self).__name__, "message": self.message}
        for key, val in self.details.items():
            out[key] = _jsonable(val)
        return out


def _jsonable(val):
    try:
        import numpy as np

        if isinstance(val, np.ndarray):
            return val.tolist()
        if isinstance(val, np.generic):
            return val.item()
    except ImportError:  # pragma: no cover
        pass
    if isinstance(val, (list, tuple)):
        return [_jsonable(v) for v in val]
    return val


class DimensionError(TurnpikeError, ValueError):
    pass


class ProblemSpecError(TurnpikeError, ValueError):
    pass


class DerivativeError(TurnpikeError, FloatingPointError):
    pass


class LegendreError(TurnpikeError):
    """H_uu is singular or not negative definite."""


class StaticSolveError(TurnpikeError):
    pass


class SingularSystemError(TurnpikeError):
    pass


class NonHyperbolicError(TurnpikeError):
    pass


class IntegrationBlowUp(TurnpikeError):
    pass


class ShootingError(TurnpikeError):
    pass


class NLPError(TurnpikeError):
    pass
