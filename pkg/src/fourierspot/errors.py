"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A configuration is internally inconsistent (e.g. a non-PSD driver
    correlation matrix, a weight function that is not positive semi-definite,
    or a price level that overflows the rounding transform)."""


class InputFileError(ValueError):
    """An on-disk input could not be parsed. Carries the offending row."""

    def __init__(self, path, row, message):
        self.path = path
        self.row = row
        super().__init__(f"{path}:{row}: {message}")


class NumericalError(RuntimeError):
    """A numerical sanity bound was violated (e.g. the imaginary residue of
    a Hermitian product exceeded its tolerance). Raised instead of silently
    clamping."""
