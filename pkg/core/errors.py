"""
Termination Database Miner - Errors
One hierarchy for every failure the tool reports.

Results that are not failures (a failed match, a search with no match,
a rejected certificate) are returned as values, never raised.
"""

from typing import Optional


class TdmError(Exception):
    """Base class for every tool error."""


class TermSyntaxError(TdmError):
    """Malformed surface syntax; `position` is a character offset."""

    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class ArityError(TermSyntaxError):
    """Builtin or stub applied to the wrong number of arguments."""


class SubstitutionError(TdmError):
    """Stub instantiated with a function of different arity."""


class DefinitionError(TdmError):
    """Malformed or ill-scoped function definition."""


class CorpusError(TdmError):
    """Corpus-level problem, such as duplicate function names."""


class CanonicalizationError(TdmError):
    """Obligation cannot be turned into a stored scheme."""


class DecreaseLiteralError(TdmError):
    """Clause has no unique, well-shaped decrease literal."""


class EvaluationError(TdmError):
    """Evaluator met a symbol it has no meaning for."""


class TheoryMismatchError(TdmError):
    """Rewrite theory versions disagree."""


class DatabaseFormatError(TdmError):
    """Unreadable database file; `line` is 1-based."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CertificateFormatError(DatabaseFormatError):
    """Unreadable certificate file; `line` is 1-based."""


class ConfigError(TdmError):
    """Invalid run-time configuration."""


class ReplayError(TdmError):
    """Rewrite trace does not replay on the clause list it claims to."""
