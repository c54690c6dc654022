"""Exception hierarchy shared across the simulator."""


class KPRError(Exception):
    """Base class for all simulator errors."""


class InvalidSizeError(KPRError, ValueError):
    pass


class CorruptedStateError(KPRError):
    """A probability vector no longer satisfies its invariants."""


class DegenerateSupportError(KPRError, ValueError):
    """Zeroing would remove every restaurant from the support."""


class InvariantViolation(KPRError):
    """Internal state machine reached a state that should be impossible."""


class ConfigError(KPRError, ValueError):
    pass


class AggregationError(KPRError, ValueError):
    pass
