"""Exception hierarchy shared across the harness."""


class DiffFuzzError(Exception):
    """Base class for all harness-raised errors."""


class CorpusError(DiffFuzzError):
    """Malformed corpus or refactorings file (parse failure, broken invariant)."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(DiffFuzzError):
    """Invalid input schema: unknown kind, bad bounds, unresolved relation name, ..."""


class GenerationExhausted(DiffFuzzError):
    """An input exceeded the rejection-sampling retry cap; the schema is over-constrained."""


class HarnessError(DiffFuzzError):
    """Infrastructure failure (adapter missing, spawn failure, protocol violation).

    Never folded into an ExecutionOutcome: it aborts the affected check
    instead of biasing the verdict.
    """


class DiscardCapExceeded(DiffFuzzError):
    """Too many inputs discarded because the original side failed; data-quality error."""


class ClientError(DiffFuzzError):
    """Base class for completion-service client failures."""


class AuthError(ClientError):
    """Missing or rejected credentials."""


class RateLimitError(ClientError):
    """Rate limit still in effect after all retries."""


class TransportError(ClientError):
    """Network-level failure after all retries."""


class EmptyRefactoringError(ClientError):
    """Model response sanitized down to nothing."""
