"""
Expression package for mce.

A small language for user-defined immersions: lexer, precedence-climbing
parser with a round-tripping pretty-printer, Jet2 forward-mode derivatives,
and charts built from parsed coordinates.
"""

from .errors import ExprDomainError, ExprError, LexError, ParseError
from .evaluator import ExpressionChart, chart_from_expressions, eval_jet2
from .jet import Jet2
from .parser import format_immersion, parse_expression, parse_immersion, to_source

__all__ = [
    "ExprDomainError",
    "ExprError",
    "LexError",
    "ParseError",
    "ExpressionChart",
    "chart_from_expressions",
    "eval_jet2",
    "Jet2",
    "format_immersion",
    "parse_expression",
    "parse_immersion",
    "to_source",
]
