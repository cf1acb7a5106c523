class DegenerateInput(ValueError):
    """Input carries no information about the requested quantity."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its cap; ``best`` holds the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DataError(ValueError):
    """Malformed external data (bad rows, too few samples)."""


class InvalidParams(ValueError):
    """Model parameters outside their admissible ranges."""
