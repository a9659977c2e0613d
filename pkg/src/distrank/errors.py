"""Exception types shared across the package."""


class UnsupportedRelationError(ValueError):
    """An ordinal relation of 0 (equal depth) was supplied; the loss has no equality term."""


class DegenerateMetricError(ValueError):
    """A metric or normalization is undefined for the given inputs."""


class DegenerateSplitError(ValueError):
    """A train/test split left one side without any pairs."""


class DivergenceError(FloatingPointError):
    """Training produced non-finite values or an out-of-range sigma."""


class DatasetFormatError(ValueError):
    """A JSON-Lines dataset record could not be parsed or violates the schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
