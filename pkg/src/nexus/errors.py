"""Exception hierarchy shared across the package.

Three failure families matter to callers, because the CLI maps them to
distinct exit codes and the service maps them to distinct HTTP statuses:

* :class:`ParseError`     - malformed surface input (facts, rules, formulas,
                            summary tables, unit syntax).
* :class:`SemanticError`  - well-formed input that violates a contract
                            (unknown constant, arity mismatch, tuple already
                            in the unit, ...).
* :class:`CapacityError`  - a configured resource cap was exceeded.

:class:`InvariantError` signals that a computed structure failed one of its
own postconditions; it indicates a bug (or an input outside the supported
regime) and is never converted into a "normal" result.
"""

from __future__ import annotations


class NexusError(Exception):
    """Base class for all package errors."""


class ParseError(NexusError):
    """Malformed textual input; carries a 1-based line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{message} ({where})"
        super().__init__(message)


class SemanticError(NexusError):
    """Structurally valid input that violates an operation's contract."""


class CapacityError(NexusError):
    """A configured size cap (product atoms, candidate tuples) was exceeded."""


class InvariantError(NexusError):
    """A computed structure violated one of its own postconditions."""
