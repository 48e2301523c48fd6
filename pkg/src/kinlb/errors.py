"""Exception types raised by the solvers."""


class KinlbError(Exception):
    """Base class for solver errors."""


class InvalidInputError(KinlbError, ValueError):
    pass


class QuadratureError(KinlbError):
    def __init__(self, message, achieved=None):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


class InversionError(KinlbError):
    """Moment inversion u - dt/2 s(u) = F found no root."""

    def __init__(self, cell, residual):
        super().__init__(f"moment inversion failed at cell {cell}, residual {residual:.3e}")
        self.cell = cell
        self.residual = residual


class InstabilityError(KinlbError):
    def __init__(self, step):
        super().__init__(f"non-finite values in u at step {step}")
        self.step = step


class SteadyStateError(KinlbError):
    """max_steps exhausted before the steady-state tolerance was met."""


class CFLError(KinlbError):
    pass


class UnknownProblemError(KinlbError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown problem"
