"""Exception hierarchy shared across the package.

Every error raised by lexviol derives from :class:`LexviolError`, so callers
can catch one type at a process boundary (the CLI does exactly that).
"""

from __future__ import annotations


class LexviolError(Exception):
    """Base class for all lexviol errors."""


class SchemaError(LexviolError):
    """A record does not satisfy the corpus schema.

    Carries optional ``line`` (1-based) and ``record_id`` attributes when the
    error originates from a file loader.
    """

    def __init__(self, message: str, *, line: int | None = None, record_id: str | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.record_id = record_id


class TagError(LexviolError):
    """A string is not a valid IOB2 tag or entity kind."""

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class LabelError(LexviolError):
    """A string is not one of the three inference labels."""

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemeError(LexviolError):
    """An IOB2 tag sequence is ill-formed under strict decoding."""

    def __init__(self, message: str, *, index: int | None = None):
        super().__init__(message)
        self.index = index


class SpanError(LexviolError):
    """A span, or a set of spans, cannot be represented as an IOB2 sequence."""


class EvaluationError(LexviolError):
    """Gold and predicted inputs cannot be compared (misalignment, length)."""


class AggregationError(LexviolError):
    """Metric maps from multiple runs cannot be aggregated."""


class SplitError(LexviolError):
    """A dataset cannot be partitioned as requested."""


class PromptError(LexviolError):
    """A prompt cannot be assembled from the given specification."""


class BackendError(LexviolError):
    """Base class for model-backend failures."""


class AuthError(BackendError):
    """Credential is missing or was rejected by the endpoint."""


class TransportError(BackendError):
    """The endpoint could not be reached."""


class RequestTimeoutError(TransportError):
    """The request timed out after all retries."""


class HttpStatusError(BackendError):
    """The endpoint answered with a non-success HTTP status."""

    def __init__(self, message: str, *, status: int):
        super().__init__(message)
        self.status = status


class ResponseFormatError(BackendError):
    """The endpoint's response body did not match the expected shape."""

    def __init__(self, message: str, *, excerpt: str = ""):
        super().__init__(message)
        self.excerpt = excerpt


class UnparseableLabelError(LexviolError):
    """Model output contains none of the recognized label tokens."""


class PipelineError(LexviolError):
    """A pipeline stage failed for a specific input."""

    def __init__(self, message: str, *, input_id: str | None = None):
        if input_id is not None:
            message = f"input {input_id}: {message}"
        super().__init__(message)
        self.input_id = input_id
