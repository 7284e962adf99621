"""Exception hierarchy shared by every paralex module."""


class ParalexError(Exception):
    """Base class for all errors raised by paralex."""


class TensorError(ParalexError, ValueError):
    """Bad slot index, variance mismatch or malformed metric."""


class DomainError(ParalexError):
    """A point (or a finite-difference stencil point) lies outside the chart."""


class SingularFrameError(ParalexError):
    """The frame matrix is singular or too badly conditioned to invert."""


class NonFiniteError(ParalexError):
    """A field evaluation produced NaN or infinity."""


class UnknownFrameError(ParalexError, KeyError):
    def __init__(self, name, available):
        self.name = name
        self.available = list(available)
        super().__init__(name)

    def __str__(self):
        return f"unknown frame {self.name!r}; available: {', '.join(self.available)}"


class FrameSyntaxError(ParalexError):
    """Malformed frame expression file; carries 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class NotFlatError(ParalexError):
    """Operation requires a flat parallelism (vanishing linear curvature)."""


class FlowError(ParalexError):
    """Integration of a pre-1-parameter path failed."""
