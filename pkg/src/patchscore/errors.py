"""Exception types shared across the analysis pipeline."""

from __future__ import annotations


class PatchScoreError(Exception):
    """Base class for all tool errors."""


class SourceError(PatchScoreError):
    """Error tied to a position in an RTL source file."""

    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None and column is not None:
            msg = f"{line}:{column}: {msg}"
        elif line is not None:
            msg = f"{line}: {msg}"
        super().__init__(msg)


class LexError(SourceError):
    """Unrecognized character or malformed literal."""


class ParseError(SourceError):
    """Token stream does not match the supported grammar."""

    def __init__(self, msg: str, line: int | None = None, column: int | None = None,
                 expected: tuple[str, ...] = ()):
        self.expected = tuple(expected)
        if self.expected:
            msg = f"{msg} (expected {', '.join(self.expected)})"
        super().__init__(msg, line, column)


class UnsupportedConstruct(ParseError):
    """Input is legal HDL but outside the supported subset."""


class ElabError(PatchScoreError):
    """Module cannot be lowered to a dataflow model."""


class EvalError(PatchScoreError):
    """Score evaluation hit an unresolved signal reference."""


class ConfigError(PatchScoreError):
    """Patch configuration references unknown signals or is malformed."""


class LimitError(PatchScoreError):
    """Request exceeds a hard resource limit."""
