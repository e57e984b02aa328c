"""Exception hierarchy shared across the package."""

from __future__ import annotations


class LegalSumError(Exception):
    """Base class for every error raised by legalsum."""


# corpus


class EmptyDocument(LegalSumError):
    pass


class NoTokens(LegalSumError):
    pass


class ParseError(LegalSumError):
    def __init__(self, line: int, reason: str) -> None:
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class DuplicateId(LegalSumError):
    def __init__(self, doc_id: str) -> None:
        super().__init__(f"duplicate document id {doc_id!r}")
        self.doc_id = doc_id


class DatasetIOError(LegalSumError, OSError):
    pass


# features / scoring


class EmptyCorpus(LegalSumError):
    pass


class SentenceNotInDocument(LegalSumError):
    pass


class NonFiniteFeature(LegalSumError):
    pass


class MissingModel(LegalSumError):
    pass


class ConfigError(LegalSumError, ValueError):
    pass


class ModelFormatError(LegalSumError):
    pass


# training


class EmptyBatch(LegalSumError):
    pass


class SingleClassData(LegalSumError):
    pass


class TooFewExamples(LegalSumError):
    pass


# summarizer / evaluation


class ScoreCoverageMismatch(LegalSumError):
    pass


class EmptyReference(LegalSumError):
    pass


class IndexOutOfRange(LegalSumError):
    pass


class NonPositiveManualTime(LegalSumError, ValueError):
    pass


class ZeroBaseline(LegalSumError, ValueError):
    pass


class NoEvaluableRecords(LegalSumError):
    pass
