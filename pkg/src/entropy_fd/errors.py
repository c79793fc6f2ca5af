"""Exception hierarchy shared by the solver modules."""


class EntropyFDError(Exception):
    """Base class for every error raised by :mod:`entropy_fd`."""


class SingularDenominator(EntropyFDError, ZeroDivisionError):
    pass


class InvalidAlpha(EntropyFDError, ValueError):
    pass


class NotNonnegative(EntropyFDError, ValueError):
    pass


class NonpositiveState(EntropyFDError, ValueError):
    pass


class ZeroEntropyVariable(EntropyFDError, ZeroDivisionError):
    pass


class IntegrationError(EntropyFDError, RuntimeError):
    """Raised by the time integrator; ``t`` is the time of failure when known."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (t={t:.6g})")
        self.t = t


class StepSizeUnderflow(IntegrationError):
    pass


class PositivityLoss(IntegrationError):
    pass


class DegenerateWindow(EntropyFDError, ValueError):
    pass


class IncompatibleGrids(EntropyFDError, ValueError):
    pass


class UnknownPreset(EntropyFDError, KeyError):
    pass


class ConfigError(EntropyFDError, ValueError):
    pass


class MalformedHeader(EntropyFDError, ValueError):
    pass


class TruncatedData(EntropyFDError, ValueError):
    pass
