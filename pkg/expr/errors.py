"""Errors raised while reading and evaluating immersion expressions."""

from typing import Optional, Tuple

Span = Tuple[int, int]


class ExprError(ValueError):
    """Base error carrying a source span (byte offsets, end exclusive)."""

    def __init__(self, message: str, span: Span = (0, 0), source: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.span = (int(span[0]), int(span[1]))
        self.source = source

    def with_source(self, source: str) -> "ExprError":
        if self.source is None:
            self.source = source
        return self

    def format(self) -> str:
        """Message plus the offending source line with a caret marker."""
        start, end = self.span
        header = f"{type(self).__name__} at offset {start}: {self.message}"
        if self.source is None:
            return header
        line_start = self.source.rfind("\n", 0, start) + 1
        line_end = self.source.find("\n", start)
        if line_end == -1:
            line_end = len(self.source)
        line = self.source[line_start:line_end]
        width = max(1, min(end, line_end) - start)
        marker = " " * (start - line_start) + "^" * width
        return f"{header}\n  {line}\n  {marker}"

    def __str__(self) -> str:
        return self.format()


class LexError(ExprError):
    """Bad character in the source."""


class ParseError(ExprError):
    """Malformed expression: unbalanced parentheses, arity, unknown names, counts."""


class ExprDomainError(ExprError):
    """Evaluation left the domain of an operation (log/sqrt of non-positive, division by zero)."""
