from __future__ import annotations

from pathlib import Path

import pytest

from legalsum.corpus import RawDocument, build_document
from legalsum.features import FeaturePipeline, build_idf

FIXTURES = Path(__file__).parent / "fixtures"
SEPARABLE = FIXTURES / "separable.jsonl"
GOLDEN_CORPUS = FIXTURES / "golden" / "corpus.jsonl"
GOLDEN_SUMMARIES = FIXTURES / "golden" / "summaries.jsonl"
GOLDEN_TEXT = FIXTURES / "golden" / "summaries.txt"


def make_doc(text: str, doc_id: str = "d"):
    return build_document(RawDocument(doc_id, text))


@pytest.fixture
def five_sentence_doc():
    return make_doc(
        "We hold the statute void. The parties agree. See Roe v. Wade, 410 U.S. 113. "
        "Lunch was served at noon today. The judgment is affirmed and the appeal dismissed.",
        "five",
    )


@pytest.fixture
def self_pipeline():
    """Pipeline whose IDF is built from the document itself (N=1, every idf = 1)."""

    def build(doc):
        return FeaturePipeline(build_idf([doc]))

    return build


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter) -> None:
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
