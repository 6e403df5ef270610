"""Line-oriented tokenizer for circuit files."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # NUMBER, NAME, STAR, MINUS
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#.*)
  | (?P<NUMBER>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?(?![A-Za-z_\d.]))
  | (?P<NAME>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<STAR>\*)
  | (?P<MINUS>-)
    """,
    re.VERBOSE,
)


def tokenize_line(text: str, lineno: int) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), lineno, pos + 1))
        pos = m.end()
    return tokens


def tokenize(source: str) -> Iterator[list[Token]]:
    """Yield the token list of every non-blank line."""
    for lineno, line in enumerate(source.splitlines(), start=1):
        tokens = tokenize_line(line, lineno)
        if tokens:
            yield tokens
