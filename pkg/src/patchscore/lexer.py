"""Tokenizer for the supported SystemVerilog subset.

Comments are stripped, based literals (64'b0, 'h0, 5'd3) come out as single
tokens, and every token carries its 1-based source position.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto

from .errors import LexError, UnsupportedConstruct


class TokenKind(Enum):
    IDENTIFIER = auto()
    KEYWORD = auto()
    INT = auto()           # plain decimal literal
    BASED = auto()         # based literal, optionally sized: 64'b0, 'h0, 5'd3
    OP = auto()
    PUNCT = auto()
    EOF = auto()


KEYWORDS = frozenset({
    "module", "endmodule", "input", "output", "inout",
    "wire", "reg", "logic", "integer",
    "assign", "always", "begin", "end",
    "if", "else", "case", "endcase", "default", "for",
    "posedge", "negedge",
    # recognized so the parser can report them as unsupported with a position
    "function", "endfunction", "task", "endtask", "initial",
    "generate", "endgenerate", "genvar", "parameter", "localparam",
    "interface", "endinterface", "modport", "typedef", "struct", "enum",
})

# longest match first
_OPERATORS = ("&&", "||", "==", "!=", "<<", ">>", "<=", ">=", "~^", "^~",
              "!", "~", "&", "|", "^", "<", ">", "+", "-", "=", "?", ":")
_PUNCTUATION = "()[]{};,@#.*"

_BASE_DIGITS = {
    "b": "01_",
    "d": "0123456789_",
    "h": "0123456789abcdefABCDEF_",
}


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int

    def __repr__(self) -> str:
        return f"Token({self.kind.name}, {self.text!r}, L{self.line}:{self.column})"


def tokenize(source: str) -> list[Token]:
    """Split source text into tokens, raising LexError on anything unrecognized."""
    tokens: list[Token] = []
    pos = 0
    line = 1
    col = 1
    n = len(source)

    def advance(count: int) -> None:
        nonlocal pos, line, col
        for _ in range(count):
            if source[pos] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            pos += 1

    while pos < n:
        ch = source[pos]

        if ch in " \t\r\n":
            advance(1)
            continue

        if source.startswith("//", pos):
            while pos < n and source[pos] != "\n":
                advance(1)
            continue

        if source.startswith("/*", pos):
            start_line, start_col = line, col
            advance(2)
            while pos < n and not source.startswith("*/", pos):
                advance(1)
            if pos >= n:
                raise LexError("unterminated block comment", start_line, start_col)
            advance(2)
            continue

        if ch == "`":
            raise UnsupportedConstruct("preprocessor directives are not supported", line, col)
        if ch == "\\":
            raise UnsupportedConstruct("escaped identifiers are not supported", line, col)

        if ch.isdigit() or ch == "'":
            tokens.append(_lex_number(source, pos, line, col))
            advance(len(tokens[-1].text))
            continue

        if ch.isalpha() or ch == "_":
            start = pos
            while pos < n and (source[pos].isalnum() or source[pos] in "_$"):
                pos += 1
            text = source[start:pos]
            pos = start
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENTIFIER
            tokens.append(Token(kind, text, line, col))
            advance(len(text))
            continue

        op = next((o for o in _OPERATORS if source.startswith(o, pos)), None)
        if op is not None:
            tokens.append(Token(TokenKind.OP, op, line, col))
            advance(len(op))
            continue

        if ch in _PUNCTUATION:
            tokens.append(Token(TokenKind.PUNCT, ch, line, col))
            advance(1)
            continue

        raise LexError(f"unrecognized character {ch!r}", line, col)

    tokens.append(Token(TokenKind.EOF, "", line, col))
    return tokens


def _lex_number(source: str, pos: int, line: int, col: int) -> Token:
    """Lex a decimal or based literal starting at pos; validates digits and width."""
    n = len(source)
    start = pos
    while pos < n and (source[pos].isdigit() or source[pos] == "_"):
        pos += 1
    size_text = source[start:pos]

    if pos >= n or source[pos] != "'":
        if not size_text:
            raise LexError("malformed literal", line, col)
        return Token(TokenKind.INT, size_text, line, col)

    pos += 1  # consume '
    if pos < n and source[pos] in "sS":
        raise LexError("signed literals are not supported", line, col)
    if pos >= n or source[pos].lower() not in _BASE_DIGITS:
        raise LexError("malformed based literal: expected base b, d, or h", line, col)
    base = source[pos].lower()
    pos += 1

    digit_start = pos
    while pos < n and (source[pos].isalnum() or source[pos] == "_"):
        pos += 1
    digits = source[digit_start:pos]
    if not digits.strip("_"):
        raise LexError("malformed based literal: missing digits", line, col)
    for d in digits:
        if d in "xXzZ?":
            raise LexError("x/z digits are not supported", line, col)
        if d not in _BASE_DIGITS[base]:
            raise LexError(f"invalid digit {d!r} for base {base!r}", line, col)
    if size_text and int(size_text.replace("_", "")) == 0:
        raise LexError("literal width must be positive", line, col)

    return Token(TokenKind.BASED, source[start:pos], line, col)


def literal_value(text: str) -> tuple[int, int]:
    """Resolve a lexed INT/BASED token text to (value, width).

    Width-less literals default to 32 bits; values are masked to the width.
    """
    text = text.replace("_", "")
    if "'" not in text:
        return int(text), 32
    size_text, rest = text.split("'", 1)
    width = int(size_text) if size_text else 32
    base = {"b": 2, "d": 10, "h": 16}[rest[0].lower()]
    value = int(rest[1:], base)
    return value & ((1 << width) - 1), width
