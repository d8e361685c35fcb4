"""Exception types shared across the pipeline."""


class CkdPipeError(Exception):
    """Base class for all pipeline errors."""


class ParseError(CkdPipeError):
    """Malformed input file (carries a line number when known)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SchemaError(CkdPipeError):
    """Value or column inconsistent with the declared schema."""


class ArgumentError(CkdPipeError):
    """Caller passed an out-of-contract argument."""


class StateError(CkdPipeError):
    """Operation invoked before its prerequisites (e.g. apply before fit)."""


class ContractError(CkdPipeError):
    """Internal pipeline contract violated (e.g. masked cell at standardization)."""


class UndefinedMetricError(CkdPipeError):
    """Metric undefined for the given inputs (e.g. AUC with a single class)."""


class ConfigError(CkdPipeError):
    """Invalid experiment configuration."""


class MissingDataError(CkdPipeError):
    """Dataset file absent."""
