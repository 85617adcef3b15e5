"""Exception hierarchy.

Every domain failure raises a subclass of :class:`MannerforgeError`; the CLI
maps these to exit code 1 with a categorized message.
"""
from __future__ import annotations


class MannerforgeError(Exception):
    """Base class for all domain errors."""


# --- gridworld ---------------------------------------------------------------

class OutOfBounds(MannerforgeError):
    """A movement would leave the grid."""


class Blocked(MannerforgeError):
    """A push or pull would move the object into an occupied cell."""


class IllegalInteraction(MannerforgeError):
    """Push or pull attempted while the agent is not on the target's cell."""


class AlloSymbolPresent(MannerforgeError):
    """The executor received an allocentric symbol."""


class NoReferent(MannerforgeError):
    """No object matches the command's noun phrase."""


class AmbiguousReferent(MannerforgeError):
    """More than one object matches the command's noun phrase."""


class ExhaustedRetries(MannerforgeError):
    """The situation sampler could not place a uniquely describable target."""


# --- adverb DSL --------------------------------------------------------------

class DepthExceeded(MannerforgeError):
    """A program requires more rewrite passes than the allowed depth."""


class DuplicateLhs(MannerforgeError):
    """Two rewrite rules share a left-hand side."""


class ParseError(MannerforgeError):
    """Malformed program text."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# --- meta grammar ------------------------------------------------------------

class Unclassifiable(MannerforgeError):
    """A program satisfies no adverb type's structural invariant."""


class RejectBudgetExceeded(MannerforgeError):
    """Registry sampling hit the consecutive-rejection budget."""


# --- oracle pipeline ---------------------------------------------------------

class UnknownAdverb(MannerforgeError):
    """A command's adverb resolves to no known program."""


# --- dataset forge -----------------------------------------------------------

class RetryExhausted(MannerforgeError):
    """An adverb/world combination could not be realized on this grid."""


class InsufficientExamples(MannerforgeError):
    """A split spec needs more matching examples than the corpus contains."""


class SchemaMismatch(MannerforgeError):
    """A persisted dataset uses an unsupported schema version."""


class DigestMismatch(MannerforgeError):
    """A persisted file does not match its manifest digest."""


class MalformedRecord(MannerforgeError):
    """A record line could not be decoded."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


# --- evaluation harness ------------------------------------------------------

class MissingPrediction(MannerforgeError):
    """A test index has no prediction."""


class DuplicatePrediction(MannerforgeError):
    """A test index has more than one prediction."""


class UnknownIndex(MannerforgeError):
    """A prediction references an index outside the dataset."""
