"""Error types shared across the toolkit."""

__all__ = [
    "InvalidRegionError",
    "DegenerateWeightError",
    "SingularGramianError",
    "ForcingGridError",
    "ConfigError",
]


class InvalidRegionError(ValueError):
    """Control region does not fit inside the beam domain (0, 1)."""


class DegenerateWeightError(ValueError):
    """A modal weight vanished where a positive weight is required."""

    def __init__(self, mode: int, message: str):
        self.mode = mode
        super().__init__(message)


class SingularGramianError(RuntimeError):
    """Observability Gramian is singular to tolerance; carries the near-null mode."""

    def __init__(self, mode: int, message: str):
        self.mode = mode
        super().__init__(message)


class ForcingGridError(ValueError):
    """Sampled forcing grid is too coarse for the requested mode range."""


class ConfigError(ValueError):
    """Configuration file rejected; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        prefix = ""
        if path is not None:
            prefix += f"{path}:"
        if line is not None:
            prefix += f"{line}:"
        super().__init__(f"{prefix} {message}" if prefix else message)
