from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legalsum.corpus import RawDocument, build_document
from legalsum.errors import EmptyCorpus, SentenceNotInDocument
from legalsum.features import (
    FEATURE_NAMES,
    FeaturePipeline,
    IdfTable,
    Lexicon,
    build_idf,
    default_cues,
    default_lexicon,
    detect_citations,
    extract_features,
    load_lexicon,
    parse_lexicon,
)

from conftest import FIXTURES, make_doc


class TestIdf:
    def test_single_doc(self):
        idf = build_idf([make_doc("The court.")])
        assert idf.idf("court") == 1.0
        assert idf.doc_count == 1

    def test_unseen_token(self):
        idf = build_idf([make_doc("A one."), make_doc("B two."), make_doc("C three.")])
        assert idf.idf("zebra") == pytest.approx(math.log(4) + 1)
        assert idf.idf("zebra") == pytest.approx(2.386294, abs=1e-6)

    def test_half_corpus(self):
        idf = build_idf([make_doc("Court rules."), make_doc("Nothing here.")])
        assert idf.idf("court") == pytest.approx(1.405465, abs=1e-6)

    def test_counts_documents_not_occurrences(self):
        idf = build_idf([make_doc("Court court court."), make_doc("Court.")])
        assert idf.idf("court") == 1.0

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            build_idf([])

    def test_round_trip(self):
        idf = build_idf([make_doc("Alpha beta."), make_doc("Beta gamma.")])
        again = IdfTable.from_dict(json.loads(json.dumps(idf.to_dict())))
        assert dict(again.values) == dict(idf.values)
        assert again.doc_count == idf.doc_count

    def test_all_positive(self):
        idf = build_idf([make_doc(t) for t in ("A b c.", "B c d.", "C d e.", "The c.")])
        assert all(v > 0 for v in idf.values.values())


class TestLexicon:
    def test_parse_with_header(self):
        lex = parse_lexicon("# name: mini\n# version: 7\ntort\nres judicata\n\n# comment\n")
        assert lex.name == "mini"
        assert lex.version == "7"
        assert lex.terms == frozenset({"tort", "res judicata"})
        assert ("res", "judicata") in lex.phrases

    def test_uppercase_rejected(self):
        with pytest.raises(ValueError):
            parse_lexicon("Tort\n")

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            parse_lexicon("# only a comment\n")

    def test_bundled_lists_pinned(self):
        lex, cues = default_lexicon(), default_cues()
        assert (lex.name, lex.version) == ("legal-core", "1")
        assert (cues.name, cues.version) == ("holding-cues", "1")
        for term in ("held", "we conclude", "it is ordered", "the court finds"):
            assert term in cues.terms
        assert len(set(lex.terms)) == len(lex.terms)
        assert all(t == t.lower() for t in lex.terms)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "terms.txt"
        path.write_text("negligence\n", encoding="utf-8")
        assert load_lexicon(path).terms == frozenset({"negligence"})


class TestCitations:
    def test_case_citation(self):
        spans = detect_citations("Smith v. Jones, 410 U.S. 113")
        assert [s.kind for s in spans] == ["case-citation"]

    def test_statute(self):
        text = "pursuant to 42 U.S.C. § 1983"
        spans = detect_citations(text)
        assert len(spans) == 1
        assert text[spans[0].start : spans[0].end] == "42 U.S.C. § 1983"

    def test_none(self):
        assert detect_citations("the parties met in March") == []

    def test_docket(self):
        spans = detect_citations("Appeal No. 21-1234 was consolidated.")
        assert len(spans) == 1
        assert spans[0].kind == "docket"

    def test_bare_section(self):
        assert len(detect_citations("The claim fails under § 12 of the act.")) == 1

    def test_multiple_non_overlapping(self):
        text = "Roe v. Wade, 410 U.S. 113, and 42 U.S.C. § 1983 apply in No. 5-6."
        spans = detect_citations(text)
        assert len(spans) == 3
        for a, b in zip(spans, spans[1:]):
            assert a.end <= b.start
        assert all(0 <= s.start < s.end <= len(text) for s in spans)


class TestExtractFeatures:
    def test_golden_vector(self):
        golden = json.loads((FIXTURES / "features_golden.json").read_text())
        docs = [build_document(RawDocument(d["id"], d["text"])) for d in golden["corpus"]]
        pipeline = FeaturePipeline(build_idf(docs))
        got = pipeline.document_features(docs[0])
        assert len(got) == len(golden["expected"])
        for vec, expected in zip(got, golden["expected"]):
            assert list(vec) == pytest.approx(expected, abs=1e-12)

    def test_single_sentence(self):
        doc = make_doc("Motion granted.")
        fv = extract_features(doc.sentences[0], doc, build_idf([doc]), default_lexicon())
        assert fv.position == 0.0
        assert fv.rel_length == 1.0
        assert fv.numeric_density == 0.0

    def test_sentence_from_other_document(self):
        a, b = make_doc("First one. Second one."), make_doc("Other text. Again here.")
        with pytest.raises(SentenceNotInDocument):
            extract_features(b.sentences[1], a, build_idf([a]), default_lexicon())

    def test_first_and_last_position(self):
        doc = make_doc("One here. Two here. Three here. Four here.")
        feats = FeaturePipeline(build_idf([doc])).document_features(doc)
        assert feats[0].position == 0.0
        assert feats[-1].position == 1.0

    def test_custom_cues(self):
        doc = make_doc("Ordered that the writ issue.")
        cues = Lexicon(("ordered that",), "test", "1")
        fv = extract_features(doc.sentences[0], doc, build_idf([doc]), default_lexicon(), cues)
        assert fv.cue_phrase == 1.0

    def test_cue_must_start_sentence(self):
        doc = make_doc("Later we hold otherwise.")
        fv = extract_features(doc.sentences[0], doc, build_idf([doc]), default_lexicon())
        assert fv.cue_phrase == 0.0

    def test_matrix_width(self):
        doc = make_doc("One here. Two here.")
        m = FeaturePipeline(build_idf([doc])).matrix(doc)
        assert m.shape == (2, len(FEATURE_NAMES)) == (2, 8)


WORDS = ["The", "court", "held", "plaintiff", "liable", "No.", "12", "v.", "damages", "we", "hold", "§", "3"]
sentence = st.lists(st.sampled_from(WORDS), min_size=1, max_size=10).map(lambda ws: " ".join(ws) + ".")
document_text = st.lists(sentence, min_size=1, max_size=6)


def _doc(sentences: list[str]):
    return make_doc(" ".join(s[0].upper() + s[1:] if s[0].isalpha() else "X " + s for s in sentences))


@settings(max_examples=100, deadline=None)
@given(document_text)
def test_feature_invariants(sentences):
    doc = _doc(sentences)
    pipeline = FeaturePipeline(build_idf([doc, make_doc("The court.")]))
    first = pipeline.document_features(doc)
    assert first == pipeline.document_features(doc)
    for fv in first:
        assert len(fv) == 8
        assert all(math.isfinite(v) for v in fv)
        for v in (fv.position, fv.rel_length, fv.cue_phrase, fv.numeric_density):
            assert 0.0 <= v <= 1.0
        assert fv.tfidf_mean >= 0 and fv.tfidf_max >= fv.tfidf_mean - 1e-12
        assert fv.lexicon_hits >= 0 and fv.citation_count >= 0


@settings(max_examples=60, deadline=None)
@given(document_text, st.data())
def test_locality(sentences, data):
    """Editing one sentence leaves the others unchanged apart from rel_length."""
    if len(sentences) < 2:
        return
    j = data.draw(st.integers(0, len(sentences) - 1))
    replacement = data.draw(sentence)
    before_doc = _doc(sentences)
    after_doc = _doc(sentences[:j] + [replacement] + sentences[j + 1 :])
    if len(before_doc.sentences) != len(after_doc.sentences):
        return
    # the edit must not move sentence boundaries (abbreviations can merge sentences)
    if any(a.raw != b.raw for a, b in zip(before_doc.sentences, after_doc.sentences) if a.index != j):
        return
    idf = build_idf([make_doc("Fixed reference corpus text.")])
    before = FeaturePipeline(idf).document_features(before_doc)
    after = FeaturePipeline(idf).document_features(after_doc)
    for i, (a, b) in enumerate(zip(before, after)):
        if i == j:
            continue
        assert a._replace(rel_length=0.0) == b._replace(rel_length=0.0)
