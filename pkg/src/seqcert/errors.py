"""Exception taxonomy shared by all modules."""


class ParameterError(ValueError):
    """A scalar argument lies outside its admissible domain."""


class DependenceError(ValueError):
    """A family of vectors that must be linearly independent is not."""


class TruncationError(ValueError):
    """A map or construction is not closed at the requested truncation."""


class BlockSpecError(ValueError):
    """A convex block specification violates ordering or weight constraints."""


class ConfigError(ValueError):
    """An experiment configuration is malformed or inconsistent."""
