"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when an input graph or parameter set is outside the supported range."""


class TheoryViolation(RuntimeError):
    """Raised when the repair engine exhausts its sanctioned moves.

    On supported inputs this indicates a bug, so the exception carries a
    replayable dump of the stuck state for offline analysis.
    """

    def __init__(self, message: str, dump: dict | None = None):
        super().__init__(message)
        self.dump = dump or {}


class ResourceCapError(RuntimeError):
    """Raised when a bounded search exceeds its node or size budget."""
