"""
Lexer for the immersion expression language.

Tokens: decimal literals (with optional exponent), identifiers, the operators
+ - * / ^, parentheses, commas and the ';' separating ambient coordinates.
Only ASCII input is accepted, so character offsets are byte offsets.
"""

import logging
import re
from dataclasses import dataclass
from typing import List

from expr.errors import LexError

logger = logging.getLogger(__name__)

NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")

SINGLE_CHAR_TOKENS = {
    "+": "OP",
    "-": "OP",
    "*": "OP",
    "/": "OP",
    "^": "OP",
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    ";": "SEMI",
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    start: int
    end: int

    @property
    def span(self):
        return (self.start, self.end)


def tokenize(source: str) -> List[Token]:
    """Split source into tokens, ending with an EOF token.

    Raises:
        LexError: On any character outside the language, with its position.
    """
    tokens: List[Token] = []
    pos = 0
    length = len(source)
    while pos < length:
        char = source[pos]
        if char.isspace() and char.isascii():
            pos += 1
            continue
        if not char.isascii():
            raise LexError(f"non-ASCII character {char!r}", (pos, pos + 1), source)
        if char in SINGLE_CHAR_TOKENS:
            tokens.append(Token(SINGLE_CHAR_TOKENS[char], char, pos, pos + 1))
            pos += 1
            continue
        match = NUMBER_RE.match(source, pos)
        if match:
            tokens.append(Token("NUMBER", match.group(), pos, match.end()))
            pos = match.end()
            continue
        match = IDENT_RE.match(source, pos)
        if match:
            tokens.append(Token("IDENT", match.group(), pos, match.end()))
            pos = match.end()
            continue
        raise LexError(f"unexpected character {char!r}", (pos, pos + 1), source)

    tokens.append(Token("EOF", "", length, length))
    return tokens
