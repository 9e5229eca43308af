"""Tokenizer for rules files.

Comments run from ``#`` to end of line (which also covers a leading ``#!``
interpreter line). Whitespace and newlines only separate tokens. The Unicode
arrow connectors U+2192 and U+219B are normalized to ``=>`` and ``!>`` here,
so the parser only ever sees the ASCII forms.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from .errors import LexError


class TokenKind(Enum):
    KEYWORD = auto()
    IDENT = auto()
    INT = auto()
    FLOAT = auto()
    STRING = auto()
    BOOL = auto()
    OPERATOR = auto()
    CONNECTOR = auto()
    PUNCT = auto()
    EOF = auto()


# Section and declaration keywords. Type names (string/int/bool/float) stay
# identifiers so the builtin call `string(...)` keeps working.
KEYWORDS = frozenset({"levels", "consts", "vars", "rules", "Graph", "Msg", "External", "soft"})

# Two-character operators/connectors, checked before single characters.
_TWO_CHAR = {
    "=>": (TokenKind.CONNECTOR, "=>"),
    "!>": (TokenKind.CONNECTOR, "!>"),
    "==": (TokenKind.OPERATOR, "=="),
    "!=": (TokenKind.OPERATOR, "!="),
    "<=": (TokenKind.OPERATOR, "<="),
    ">=": (TokenKind.OPERATOR, ">="),
    "&&": (TokenKind.OPERATOR, "&&"),
    "||": (TokenKind.OPERATOR, "||"),
}

_ONE_CHAR_OPS = frozenset("+-*/%<>!~&|^=")
_PUNCT = frozenset(":;?(),")

# Unicode arrows accepted as connector aliases.
_ARROWS = {"→": "=>", "↛": "!>"}

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", '"': '"'}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int
    value: object = None  # decoded literal value for INT/FLOAT/STRING/BOOL

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.lexeme!r}, {self.line}:{self.column})"


def _is_ident_start(c: str) -> bool:
    return c.isalpha() and c.isascii() or c == "_"


def _is_ident_char(c: str) -> bool:
    return (c.isalnum() and c.isascii()) or c == "_"


def tokenize(source: str) -> list[Token]:
    """Tokenize a rules source string, raising LexError on bad input."""
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def err(message: str, l: int, c: int):
        raise LexError(message, l, c)

    while i < n:
        c = source[i]

        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r\f\v":
            i += 1
            col += 1
            continue

        # Comment to end of line.
        if c == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue

        start_line, start_col = line, col

        if c in _ARROWS:
            tokens.append(Token(TokenKind.CONNECTOR, _ARROWS[c], start_line, start_col))
            i += 1
            col += 1
            continue

        pair = source[i : i + 2]
        if pair in _TWO_CHAR:
            kind, lexeme = _TWO_CHAR[pair]
            tokens.append(Token(kind, lexeme, start_line, start_col))
            i += 2
            col += 2
            continue

        if c == '"':
            i += 1
            col += 1
            buf: list[str] = []
            while True:
                if i >= n or source[i] == "\n":
                    err("unterminated string literal", start_line, start_col)
                ch = source[i]
                if ch == '"':
                    i += 1
                    col += 1
                    break
                if ch == "\\":
                    if i + 1 >= n:
                        err("unterminated string literal", start_line, start_col)
                    esc = source[i + 1]
                    if esc in _ESCAPES:
                        buf.append(_ESCAPES[esc])
                        i += 2
                        col += 2
                    elif esc == "x":
                        hexpart = source[i + 2 : i + 4]
                        if len(hexpart) < 2 or not all(h in "0123456789abcdefABCDEF" for h in hexpart):
                            err("invalid \\x escape: expected two hex digits", line, col)
                        buf.append(chr(int(hexpart, 16)))
                        i += 4
                        col += 4
                    else:
                        err(f"invalid escape sequence \\{esc}", line, col)
                else:
                    buf.append(ch)
                    i += 1
                    col += 1
            text = "".join(buf)
            tokens.append(Token(TokenKind.STRING, text, start_line, start_col, value=text))
            continue

        if c.isdigit():
            j = i
            if source.startswith("0b", i) or source.startswith("0B", i):
                j = i + 2
                while j < n and source[j] in "01":
                    j += 1
                if j == i + 2:
                    err("binary literal needs at least one digit", start_line, start_col)
                lexeme = source[i:j]
                tokens.append(Token(TokenKind.INT, lexeme, start_line, start_col, value=int(lexeme, 2)))
                col += j - i
                i = j
                continue
            while j < n and source[j].isdigit():
                j += 1
            is_float = False
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                is_float = True
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    is_float = True
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            lexeme = source[i:j]
            if is_float:
                tokens.append(Token(TokenKind.FLOAT, lexeme, start_line, start_col, value=float(lexeme)))
            else:
                tokens.append(Token(TokenKind.INT, lexeme, start_line, start_col, value=int(lexeme, 10)))
            col += j - i
            i = j
            continue

        if _is_ident_start(c):
            j = i
            while j < n and _is_ident_char(source[j]):
                j += 1
            name = source[i:j]
            if name in ("true", "false"):
                tokens.append(Token(TokenKind.BOOL, name, start_line, start_col, value=(name == "true")))
            elif name in KEYWORDS:
                tokens.append(Token(TokenKind.KEYWORD, name, start_line, start_col))
            else:
                tokens.append(Token(TokenKind.IDENT, name, start_line, start_col))
            col += j - i
            i = j
            continue

        if c in _PUNCT:
            tokens.append(Token(TokenKind.PUNCT, c, start_line, start_col))
            i += 1
            col += 1
            continue

        if c in _ONE_CHAR_OPS:
            tokens.append(Token(TokenKind.OPERATOR, c, start_line, start_col))
            i += 1
            col += 1
            continue

        err(f"invalid character {c!r}", start_line, start_col)

    tokens.append(Token(TokenKind.EOF, "", line, col))
    return tokens
