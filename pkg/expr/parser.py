"""
Parser and pretty-printer for the immersion expression language.

Grammar (lowest to highest precedence):

    immersion := sum (';' sum)*
    sum       := product (('+' | '-') product)*
    product   := unary (('*' | '/') unary)*
    unary     := '-' unary | power
    power     := atom ('^' exponent)?
    exponent  := '-'? INTEGER | '(' '-'? INTEGER ')'
    atom      := NUMBER | 'pi' | variable | FUNCTION '(' sum ')' | '(' sum ')'

Variables are u1..un; for n <= 3 the aliases u, v, w name u1, u2, u3.
Functions: sin cos sinh cosh tanh exp log sqrt neg.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Union

from expr.errors import ParseError, Span
from expr.lexer import Token, tokenize

logger = logging.getLogger(__name__)

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "neg")
ALIASES = ("u", "v", "w")

# Binary operator binding power; higher binds tighter
BINARY_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


@dataclass(frozen=True)
class Const:
    value: float
    name: Optional[str] = None
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    index: int
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprAst"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"
    span: Span = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Pow:
    base: "ExprAst"
    exponent: int
    span: Span = field(default=(0, 0), compare=False, repr=False)


ExprAst = Union[Const, Var, Neg, Call, BinOp, Pow]


class Parser:
    """Precedence-climbing parser over a token list."""

    def __init__(self, source: str, n: int):
        if n < 1:
            raise ValueError(f"Parameter dimension must be >= 1, got {n}")
        self.source = source
        self.n = n
        self.tokens = tokenize(source)
        self.index = 0
        self.variables: Dict[str, int] = {f"u{i + 1}": i for i in range(n)}
        if n <= len(ALIASES):
            for i in range(n):
                self.variables[ALIASES[i]] = i

    @property
    def token(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        if token.kind != "EOF":
            self.index += 1
        return token

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.token
        return ParseError(message, token.span, self.source)

    def unexpected(self) -> ParseError:
        token = self.token
        if token.kind == "EOF":
            return self.error("unexpected end of input")
        return self.error(f"unexpected token '{token.text}'")

    def expect(self, kind: str, what: str) -> Token:
        if self.token.kind != kind:
            if self.token.kind == "EOF":
                raise self.error(f"unexpected end of input, expected {what}")
            raise self.error(f"expected {what}, found '{self.token.text}'")
        return self.advance()

    def parse_immersion(self) -> List[ExprAst]:
        exprs = [self.parse_sum()]
        while self.token.kind == "SEMI":
            self.advance()
            exprs.append(self.parse_sum())
        if self.token.kind != "EOF":
            raise self.unexpected()
        return exprs

    def parse_sum(self, min_precedence: int = 1) -> ExprAst:
        left = self.parse_unary()
        while self.token.kind == "OP" and BINARY_PRECEDENCE.get(self.token.text, 0) >= min_precedence:
            op = self.advance().text
            right = self.parse_sum(BINARY_PRECEDENCE[op] + 1)
            left = BinOp(op, left, right, (left.span[0], right.span[1]))
        return left

    def parse_unary(self) -> ExprAst:
        if self.token.kind == "OP" and self.token.text == "-":
            start = self.advance().start
            operand = self.parse_unary()
            return Neg(operand, (start, operand.span[1]))
        return self.parse_power()

    def parse_power(self) -> ExprAst:
        base = self.parse_atom()
        if self.token.kind == "OP" and self.token.text == "^":
            self.advance()
            exponent, end = self.parse_exponent()
            return Pow(base, exponent, (base.span[0], end))
        return base

    def parse_exponent(self):
        parenthesized = self.token.kind == "LPAREN"
        if parenthesized:
            self.advance()
        sign = 1
        if self.token.kind == "OP" and self.token.text == "-":
            self.advance()
            sign = -1
        token = self.token
        if token.kind != "NUMBER" or not token.text.isdigit():
            if token.kind == "EOF":
                raise self.error("unexpected end of input, expected an integer exponent")
            raise self.error("exponent must be a constant integer")
        self.advance()
        end = token.end
        if parenthesized:
            end = self.expect("RPAREN", "')'").end
        return sign * int(token.text), end

    def parse_atom(self) -> ExprAst:
        token = self.token
        if token.kind == "NUMBER":
            self.advance()
            return Const(float(token.text), None, token.span)
        if token.kind == "LPAREN":
            self.advance()
            inner = self.parse_sum()
            self.expect("RPAREN", "')'")
            return inner
        if token.kind == "IDENT":
            return self.parse_identifier()
        raise self.unexpected()

    def parse_identifier(self) -> ExprAst:
        token = self.advance()
        name = token.text
        if self.token.kind == "LPAREN":
            if name not in FUNCTIONS:
                raise self.error(f"unknown function '{name}'", token)
            self.advance()
            arg = self.parse_sum()
            if self.token.kind == "COMMA":
                raise self.error(f"function '{name}' takes exactly one argument")
            end = self.expect("RPAREN", "')'").end
            if name == "neg":
                return Neg(arg, (token.start, end))
            return Call(name, arg, (token.start, end))
        if name in FUNCTIONS:
            raise self.error(f"function '{name}' needs a parenthesized argument", token)
        if name == "pi":
            return Const(math.pi, "pi", token.span)
        if name in self.variables:
            return Var(self.variables[name], token.span)
        raise self.error(f"unknown identifier '{name}'", token)


def parse_expression(source: str, n: int) -> ExprAst:
    """Parse a single expression over u1..un."""
    exprs = Parser(source, n).parse_immersion()
    if len(exprs) != 1:
        raise ParseError(f"expected one expression, found {len(exprs)}", (0, len(source)), source)
    return exprs[0]


def parse_immersion(source: str, n: int, ambient_dim: int) -> List[ExprAst]:
    """Parse a ';'-separated list of ambient_dim coordinate expressions.

    Raises:
        LexError: On characters outside the language.
        ParseError: On malformed input or a wrong expression count.
    """
    exprs = Parser(source, n).parse_immersion()
    if len(exprs) != ambient_dim:
        raise ParseError(
            f"expected {ambient_dim} coordinate expressions, found {len(exprs)}", (0, len(source)), source
        )
    logger.debug(f"Parsed immersion with {len(exprs)} coordinates over {n} parameters")
    return exprs


def to_source(node: ExprAst) -> str:
    """Fully parenthesized source text that parses back to an equal AST."""
    if isinstance(node, Const):
        return node.name if node.name else repr(float(node.value))
    if isinstance(node, Var):
        return f"u{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Pow):
        return f"({to_source(node.base)} ^ {node.exponent})"
    raise TypeError(f"Not an expression node: {node!r}")


def format_immersion(exprs: List[ExprAst]) -> str:
    return "; ".join(to_source(e) for e in exprs)
