"""
Exception hierarchy for LayerAgg.

ValidationError subclasses describe bad input (CLI exit code 1);
ExecutionError subclasses describe failures while running (exit code 2).
"""


class LayerAggError(Exception):
    """Base class for all LayerAgg errors."""
    pass


class ValidationError(LayerAggError):
    """Input, configuration or data did not satisfy a precondition."""
    pass


class ExecutionError(LayerAggError):
    """A computation failed after its inputs were accepted."""
    pass


class DimensionError(ValidationError):
    """Tensor shapes do not agree."""
    pass


class ConfigurationError(ValidationError):
    """An interface or training configuration is invalid."""
    pass


class DegenerateWindowError(ConfigurationError):
    """A convolution window does not fit the padded layer axis."""
    pass


class DataError(ValidationError):
    """A dataset, manifest or label set is unusable."""
    pass


class ParseError(DataError):
    """A manifest line could not be parsed."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class FormatError(DataError):
    """A binary file has a bad header or a truncated payload."""
    pass


class StateError(ExecutionError):
    """An object was used in the wrong state (unfitted PCA, stale cache)."""
    pass


class ConvergenceError(ExecutionError):
    """An iterative solver ran out of its iteration budget."""
    pass


class NonFiniteError(ExecutionError):
    """A kernel produced NaN or Inf."""
    pass


class DivergenceError(ExecutionError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"non-finite training loss {loss} in epoch {epoch}")
        self.epoch = epoch
        self.loss = loss
