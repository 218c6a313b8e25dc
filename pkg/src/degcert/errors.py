"""Exception types shared across the package."""


class DegcertError(Exception):
    """Base class for package errors."""


class CapacityError(DegcertError):
    """A requested computation exceeds a configured memory or sieve budget."""


class ParameterError(DegcertError, ValueError):
    """An argument is outside the supported domain of an operation."""


class DecompositionError(DegcertError, ValueError):
    """No valid certificate decomposition exists; the message names the
    failing constraint."""
