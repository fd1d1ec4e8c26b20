"""Exception taxonomy shared by every module.

The CLI maps these onto exit codes: parse/transport problems are input or
environment failures, validation problems are contract violations in
otherwise well-formed input, and anything else is internal.
"""


class SplaxError(Exception):
    """Base class for all toolkit errors."""


class ParseError(SplaxError):
    """Input file is not syntactically valid (bad JSON, bad vocab layout)."""


class ValidationError(SplaxError):
    """Syntactically fine input that violates a documented invariant."""


class ConfigError(SplaxError):
    """Invalid configuration value or combination of values."""


class BackendUnavailableError(SplaxError):
    """The scoring backend could not be reached, even after retries."""


class ProtocolError(SplaxError):
    """The scoring backend answered, but the response is malformed or misaligned."""


class NoAnswerError(SplaxError):
    """No valid span candidate exists for a question."""

    def __init__(self, qid: str, message: str | None = None):
        self.qid = qid
        super().__init__(message or f"no span candidate produced for question {qid!r}")


class TemplateError(SplaxError):
    """A prompt template placeholder could not be satisfied."""


class InternalError(SplaxError):
    """A bug: an internal contract was violated."""
