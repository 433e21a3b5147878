"""Exception types shared across the package.

Every error carries a machine-readable ``code`` so the HTTP layer can build
a structured error body without inspecting exception classes.
"""

from __future__ import annotations


class BibsearchError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str, detail: str | None = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class ParseError(BibsearchError):
    """A source file could not be parsed."""

    code = "parse_error"

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: "
        if line is not None:
            where = f"{where}line {line}: "
        super().__init__(f"{where}{message}")


class ValidationError(BibsearchError):
    """Loaded data violates an invariant (duplicate ids, bad ranges, ...)."""

    code = "parse_error"

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}: "
        if line is not None:
            where = f"{where}line {line}: "
        super().__init__(f"{where}{message}")


class NotFoundError(BibsearchError):
    """A referenced id does not exist."""

    code = "not_found"


class EmptySeedError(NotFoundError):
    """A chain seed resolved to no documents."""


class InvalidQueryError(BibsearchError):
    """A query violates its invariants (no fields, bad year range, ...)."""

    code = "invalid_query"


class ConflictError(BibsearchError):
    """State conflict, e.g. concurrent exclusive ingestion."""

    code = "conflict"
