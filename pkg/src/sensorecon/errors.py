"""Exception types shared across the package."""


class SensorEconError(Exception):
    """Base class for all package errors."""


class ValidationError(SensorEconError):
    """Invalid input data or violated type invariant.

    ``errors`` carries one message per offending field, each prefixed with
    the field path (e.g. ``costs.maintenance_hourly_rate: must be >= 0``).
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class StateError(SensorEconError):
    """Operation applied in a state that does not permit it."""


class DomainError(SensorEconError):
    """Numeric formula evaluated outside its real-valued domain."""


class InfeasibleError(SensorEconError):
    """Assignment instance admits no feasible solution."""

    def __init__(self, message, company_id=None):
        self.company_id = company_id
        super().__init__(message)
