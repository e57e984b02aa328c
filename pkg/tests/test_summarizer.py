from __future__ import annotations

import itertools
import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from legalsum.errors import ConfigError, ScoreCoverageMismatch
from legalsum.features import build_idf, default_lexicon
from legalsum.scoring import ExtractionConfig, ScoredSentence
from legalsum.summarizer import SummaryBudget, generate_summary, select_sentences, summarize_document

from conftest import make_doc

LENGTHS = [3, 1, 5, 2, 4, 6, 2, 3, 1, 4]


def doc_of(n: int):
    """Sentence i has LENGTHS[i] tokens."""
    words = ["alpha", "beta", "gamma", "delta", "eps", "zeta"]
    text = " ".join(" ".join(["Word"] + words[: LENGTHS[i] - 1]) + "." for i in range(n))
    doc = make_doc(text)
    assert [len(s.tokens) for s in doc.sentences] == LENGTHS[:n]
    return doc


def scored(values):
    return [ScoredSentence(i, v, "rule") for i, v in enumerate(values)]


class TestTopK:
    def test_k_equals_n(self):
        doc = doc_of(4)
        s = generate_summary(doc, scored([0.1, 0.9, 0.5, 0.3]), SummaryBudget.top_k(4))
        assert s.indices == [0, 1, 2, 3]
        assert s.text == doc.text

    def test_tie_example(self):
        s = generate_summary(doc_of(3), scored([0.9, 0.1, 0.9]), SummaryBudget.top_k(2))
        assert s.indices == [0, 2]

    def test_tie_break_lower_index(self):
        s = generate_summary(doc_of(4), scored([0.5, 0.7, 0.5, 0.5]), SummaryBudget.top_k(2))
        assert s.indices == [0, 1]

    def test_k_larger_than_n_is_clamped(self, caplog):
        caplog.set_level("INFO")
        s = generate_summary(doc_of(2), scored([0.2, 0.4]), SummaryBudget.top_k(5))
        assert s.indices == [0, 1]
        assert "exceeds" in caplog.text

    def test_six_sentence_brute_force(self):
        values = [0.41, 0.87, 0.12, 0.66, 0.93, 0.35]
        s = generate_summary(doc_of(6), scored(values), SummaryBudget.top_k(3))
        combos = list(itertools.combinations(range(6), 3))
        assert len(combos) == 20
        best = max(combos, key=lambda c: sum(values[i] for i in c))
        assert tuple(s.indices) == best == (1, 3, 4)

    def test_output_in_document_order(self):
        doc = doc_of(5)
        s = generate_summary(doc, scored([0.1, 0.2, 0.9, 0.8, 0.7]), SummaryBudget.top_k(3))
        assert s.indices == [2, 3, 4]
        assert s.text == " ".join(doc.sentences[i].raw for i in (2, 3, 4))
        assert s.token_count == sum(LENGTHS[i] for i in (2, 3, 4))

    def test_coverage_mismatch(self):
        with pytest.raises(ScoreCoverageMismatch):
            generate_summary(doc_of(3), scored([0.1, 0.2]), SummaryBudget.top_k(1))


class TestTokenBudget:
    def test_greedy_skips_overflow(self):
        # ranked: 2 (5 tok), 5 (6 tok), 0 (3 tok), 1 (1 tok)
        doc = doc_of(6)
        s = generate_summary(doc, scored([0.7, 0.6, 0.9, 0.1, 0.2, 0.8]), SummaryBudget.tokens(9))
        assert s.indices == [0, 1, 2]
        assert s.token_count == 9

    def test_nothing_fits(self):
        s = generate_summary(doc_of(3), scored([0.3, 0.2, 0.1]), SummaryBudget.tokens(1))
        assert s.indices == [1]


@pytest.mark.parametrize(
    "build",
    [lambda: SummaryBudget.top_k(0), lambda: SummaryBudget.tokens(0), lambda: SummaryBudget("words", 3, None)],
)
def test_budget_validation(build):
    with pytest.raises(ConfigError):
        build()


score_lists = st.lists(st.floats(0, 1), min_size=1, max_size=10)


@given(score_lists, st.data())
def test_selection_properties(values, data):
    n = len(values)
    doc = doc_of(n)
    k1 = data.draw(st.integers(1, n))
    k2 = data.draw(st.integers(k1, n))
    a = generate_summary(doc, scored(values), SummaryBudget.top_k(k1))
    b = generate_summary(doc, scored(values), SummaryBudget.top_k(k2))
    assert a.indices == sorted(set(a.indices))
    assert set(a.indices) <= set(b.indices)
    assert a.token_count == sum(LENGTHS[i] for i in a.indices)
    best = max(sum(c) for c in itertools.combinations(values, k1))
    assert sum(values[i] for i in a.indices) == pytest.approx(best, abs=1e-12)
    # strictly monotone transform keeps the selection
    mapped = [math.exp(3 * v) - 7 for v in values]
    # the transform must stay strictly monotone after floating-point rounding
    assume(all((a < b) == (x < y) for a, x in zip(values, mapped) for b, y in zip(values, mapped)))
    transformed = scored(mapped)
    assert generate_summary(doc, transformed, SummaryBudget.top_k(k1)).indices == a.indices


@given(score_lists, st.integers(1, 40))
def test_token_budget_compliance(values, limit):
    s = generate_summary(doc_of(len(values)), scored(values), SummaryBudget.tokens(limit))
    assert s.token_count <= limit
    assert s.indices == sorted(s.indices)


class TestPipeline:
    def test_theta_zero_whole_document(self, five_sentence_doc):
        doc = five_sentence_doc
        s = summarize_document(
            doc, ExtractionConfig(threshold=0.0), None, SummaryBudget.top_k(5), build_idf([doc]), default_lexicon()
        )
        assert s.indices == [0, 1, 2, 3, 4]
        assert s.text == doc.text

    def test_theta_one_empty_pool(self, five_sentence_doc):
        doc = five_sentence_doc
        s = summarize_document(
            doc, ExtractionConfig(threshold=1.0), None, SummaryBudget.top_k(3), build_idf([doc]), default_lexicon()
        )
        assert s.indices == [] and s.text == "" and s.token_count == 0
        assert s.to_dict()["empty_pool"] is True

    def test_pool_smaller_than_budget(self, five_sentence_doc):
        # hand-scored rule scores: [0.528, 0.431, 0.347, 0.225, 0.411]
        doc = five_sentence_doc
        s = summarize_document(
            doc, ExtractionConfig(threshold=0.42), None, SummaryBudget.top_k(4), build_idf([doc]), default_lexicon()
        )
        assert s.indices == [0, 1]

    def test_prefilter_off(self, five_sentence_doc):
        doc = five_sentence_doc
        s = summarize_document(
            doc, ExtractionConfig(threshold=1.0), None, SummaryBudget.top_k(2), build_idf([doc]), default_lexicon(),
            prefilter=False,
        )
        assert s.indices == [0, 1]

    def test_select_sentences_threshold(self):
        s = select_sentences(doc_of(4), scored([0.6, 0.2, 0.7, 0.5]), SummaryBudget.top_k(3), threshold=0.5)
        assert s.indices == [0, 2, 3]

    def test_to_dict_shape(self):
        s = generate_summary(doc_of(3), scored([0.3, 0.2, 0.1]), SummaryBudget.top_k(1))
        assert s.to_dict() == {"doc_id": "d", "indices": [0], "scores": [0.3], "text": s.text, "token_count": 3}
