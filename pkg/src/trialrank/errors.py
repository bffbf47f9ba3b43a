"""Exception hierarchy.

Errors fall in two families so the CLI can map them to exit codes:
``ConfigError`` (exit 2) and ``DataError`` (exit 3).
"""


class TrialRankError(Exception):
    """Base class for all package errors."""


class ConfigError(TrialRankError):
    pass


class DataError(TrialRankError):
    pass


# corpus
class MalformedRecord(DataError):
    pass


class MissingId(DataError):
    pass


# index
class CorpusUnreadable(DataError):
    pass


class UnknownView(ConfigError):
    pass


class IoFailure(DataError):
    pass


class FormatVersionMismatch(DataError):
    pass


# retrieval
class UnknownDocument(DataError):
    pass


class EmptyIndex(DataError):
    pass


class RerankerUnavailable(DataError):
    pass


# keywords
class ProviderUnavailable(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyQuery(DataError):
    pass


class ZeroVector(DataError):
    pass


# fusion
class QueryIdMismatch(DataError):
    pass


class EmptyMatrix(DataError):
    pass


# eval
class MalformedQrels(DataError):
    pass


class MalformedRun(DataError):
    pass


# pipeline
class MissingIndex(DataError):
    pass


class InvalidConfig(ConfigError):
    pass
