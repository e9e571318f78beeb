"""
Exception hierarchy for guarded decoding.
"""
from typing import Optional


class GuardedDecodingError(Exception):
    """Base class for domain failures."""


class SafetyExhausted(GuardedDecodingError):
    """Raised when the refill loop cannot produce valid candidates within budget."""

    def __init__(self, step: int, attempts: int, message: Optional[str] = None):
        self.step = step
        self.attempts = attempts
        super().__init__(
            message or f"no valid candidates at step {step} after {attempts} refill rounds"
        )


class RollbackExhausted(GuardedDecodingError):
    """Raised when more rollbacks are needed than the budget allows."""

    def __init__(self, rollbacks: int):
        self.rollbacks = rollbacks
        super().__init__(f"rollback budget exhausted after {rollbacks} rollbacks")


class InfinitePerplexityError(GuardedDecodingError):
    """A scored token has zero probability under an unsmoothed model."""

    def __init__(self, position: int, token: str):
        self.position = position
        self.token = token
        super().__init__(f"infinite perplexity: token {token!r} at position {position} has probability 0")


class EmptyCorpusError(GuardedDecodingError, ValueError):
    """Training on an empty corpus without smoothing leaves the distribution undefined."""


class DimensionMismatchError(GuardedDecodingError, ValueError):
    """Vectors of different dimensions were combined."""


class StoreFormatError(GuardedDecodingError, ValueError):
    """A JSON Lines input file is malformed."""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")
