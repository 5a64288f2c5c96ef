"""Exception hierarchy shared by all modules."""


class HJFrontError(Exception):
    """Base class for every error raised by the package."""


class InputError(HJFrontError, ValueError):
    """Malformed or non-finite input."""


class DomainError(InputError):
    """Coefficient value outside the model's admissible box."""


class NoPreimageError(HJFrontError, ValueError):
    """Flux value above the peak H(0, a, g); no p has this flux."""


class RangeError(HJFrontError, ValueError):
    """Value outside a guarded or covered range."""


class UnsolvableRiemannError(HJFrontError):
    """The interface Riemann problem has no feasible grid pair."""


class ExpressionError(HJFrontError, ValueError):
    """A coefficient expression failed to parse or evaluate."""


class ConfigError(HJFrontError, ValueError):
    """Configuration schema violation; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class RunError(HJFrontError):
    """Front tracking could not continue; carries a state dump."""

    def __init__(self, message, dump=None):
        self.dump = dump
        super().__init__(message)
