"""Exception hierarchy shared by all gl2zig modules."""


class GL2ZigError(Exception):
    """Base class for all library errors."""

    code = "ERROR"


class ConfigurationError(GL2ZigError):
    """Invalid field spec, experiment config or group data."""

    code = "CONFIG"


class ConfigParseError(ConfigurationError):
    """Config file could not be read or parsed."""

    code = "CONFIG_PARSE"


class PrecisionError(GL2ZigError):
    """A quantity could not be decided at the current working precision.

    Carries an operation trail so escalating callers can report what was
    being computed when the precision ran out.
    """

    code = "PRECISION"

    def __init__(self, message, trail=()):
        super().__init__(message)
        self.trail = tuple(trail)


class ModelError(GL2ZigError):
    """Representation-model data is inconsistent (bad character, bad nu, ...)."""

    code = "MODEL"


class ClosureError(GL2ZigError):
    """Generator saturation failed to terminate within the pass cap."""

    code = "CLOSURE"


class ContainmentError(GL2ZigError):
    """An index was requested for a pair of lattices without containment."""

    code = "CONTAINMENT"


class PredicateError(GL2ZigError):
    """Predicate evaluated outside its hypotheses (non-integral center)."""

    code = "PREDICATE"
