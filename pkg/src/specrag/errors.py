"""Exception types shared across the package."""


class SpecragError(Exception):
    """Base class for all errors raised by this package."""


class DocumentParseError(SpecragError):
    """Normalized document text could not be parsed."""


class GlossaryConflictError(SpecragError):
    """One document defines an abbreviation with two different expansions."""


class ConfigError(SpecragError):
    """A configuration value is out of its legal range."""


class IntegrityError(SpecragError):
    """A vector's dimension does not match what its consumer expects."""


class CorruptStoreError(SpecragError):
    """A store file has a bad magic, version, or is truncated."""


class TransportError(SpecragError):
    """A remote endpoint could not be reached, or kept failing after retries.

    Carries the endpoint and the number of attempts made; when raised from
    the answer path it also carries the retrieval hits gathered before the
    generation call failed, so callers can still report them.
    """

    def __init__(self, message, endpoint=None, attempts=None, hits=None):
        super().__init__(message)
        self.endpoint = endpoint
        self.attempts = attempts
        self.hits = hits


class JudgeProtocolError(SpecragError):
    """The judge model's response had no parsable GRADE line, twice."""

    def __init__(self, message, raw_response=""):
        super().__init__(message)
        self.raw_response = raw_response


class UndefinedScoreError(SpecragError):
    """A similarity score is undefined (an input has no tokens)."""


class DatasetError(SpecragError):
    """A benchmark dataset file is malformed."""
