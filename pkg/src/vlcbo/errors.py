"""Exception types raised across the package."""


class VlcboError(Exception):
    pass


class NonUnitInput(VlcboError, ValueError):
    pass


class DegenerateGeometry(VlcboError, ValueError):
    pass


class NoConvergence(VlcboError, RuntimeError):
    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


class Infeasible(VlcboError):
    pass


class NoFeasibleCandidate(Infeasible):
    pass


class OrientationInfeasible(Infeasible):
    pass


class EmptyLedSet(Infeasible):
    pass


class ParseError(VlcboError, ValueError):
    pass


class ValidationError(VlcboError, ValueError):
    def __init__(self, field, reason):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason
