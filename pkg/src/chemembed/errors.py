"""Exception types shared across the workbench.

Argument misuse (bad shapes, out-of-range parameters) raises plain
``ValueError``; these subclasses cover problems with *data*: files that do
not parse, or inputs that parse but cannot be analyzed.
"""

from __future__ import annotations


class ChemembedError(Exception):
    """Base class for data-level errors raised by this package."""


class ParseError(ChemembedError):
    """A file or stream does not conform to its declared format."""

    def __init__(self, message: str, *, source: str | None = None,
                 line: int | None = None, offset: int | None = None):
        self.source = source
        self.line = line
        self.offset = offset
        prefix = ""
        if source is not None:
            prefix = f"{source}: "
        if line is not None:
            prefix += f"line {line}: "
        elif offset is not None:
            prefix += f"byte {offset}: "
        super().__init__(prefix + message)


class DataError(ChemembedError):
    """Input parsed cleanly but violates a requirement of the analysis.

    Examples: empty corpus, empty vocabulary intersection, a query word
    absent from every table, mismatched tag sets between corpora.
    """
