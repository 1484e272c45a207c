"""Tokenizer. JML annotation comments are kept as ``annot`` tokens."""

from __future__ import annotations

import re
from typing import NamedTuple


class ParseError(Exception):
    """Syntax or static-semantics error with a source position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class Token(NamedTuple):
    kind: str  # "id", "int", "op", "annot", "eof"
    text: str
    line: int
    col: int


_OPERATORS = sorted(
    """== != <= >= && || ++ -- += -= *= /= %= + - * / % < > = ! ( ) { } [ ] ; , .""".split(),
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<annot_line>//@[^\n]*)
  | (?P<annot_block>/\*@.*?@?\*/)
  | (?P<comment_line>//[^\n]*)
  | (?P<comment_block>/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>""" + "|".join(re.escape(o) for o in _OPERATORS) + r""")
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "annot_line":
            tokens.append(Token("annot", text[3:], line, col))
        elif kind == "annot_block":
            body = text[3:-2]
            if body.endswith("@"):
                body = body[:-1]
            tokens.append(Token("annot", body, line, col))
        elif kind in ("int", "id", "op"):
            tokens.append(Token(kind, text, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens
