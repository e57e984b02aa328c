from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from legalsum.corpus import RawDocument, build_document, clean, load_dataset, segment_sentences, tokenize
from legalsum.errors import DatasetIOError, DuplicateId, EmptyDocument, NoTokens, ParseError

from conftest import GOLDEN_CORPUS


class TestClean:
    def test_collapses_whitespace(self):
        assert clean("Order\r\n\r\n  GRANTED.") == "Order GRANTED."

    def test_identity_on_clean_text(self):
        assert clean("already clean text.") == "already clean text."

    def test_normalizes_quotes_and_dashes(self):
        assert clean("“Held” — the court’s view…") == "\"Held\" - the court's view..."

    def test_strips_control_characters(self):
        assert clean("a\x00b​c\x07 d") == "abc d"

    @pytest.mark.parametrize("text", ["", "   ", "\r\n\t", "\x00\x01"])
    def test_empty(self, text):
        with pytest.raises(EmptyDocument):
            clean(RawDocument("e", text))

    def test_thousand_char_fixture_has_no_double_spaces(self):
        chunks = ["The motion\r\nis denied.", "\tCosts\t\tawarded.", "  See No. 12-345.\r\n\r\n", "Id.  at 4."]
        text = ""
        i = 0
        while len(text) < 1000:
            text += chunks[i % len(chunks)] + (" " * (i % 3))
            i += 1
        text = text[:1000]
        out = clean(text)
        assert all(not (a == " " and b == " ") for a, b in zip(out, out[1:]))
        assert "\t" not in out and "\r" not in out and "\n" not in out
        assert [c for c in text if c.isalnum()] == [c for c in out if c.isalnum()]

    @given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=200))
    def test_idempotent(self, text):
        try:
            once = clean(text)
        except EmptyDocument:
            return
        assert clean(once) == once


class TestSegment:
    def test_plain_split(self):
        assert [s.raw for s in segment_sentences("The motion is denied. Costs are awarded.")] == [
            "The motion is denied.",
            "Costs are awarded.",
        ]

    def test_abbreviations_do_not_split(self):
        sents = segment_sentences("See Smith v. Jones, 410 U.S. 113. The court agrees.")
        assert [s.raw for s in sents] == ["See Smith v. Jones, 410 U.S. 113.", "The court agrees."]

    def test_no_terminator(self):
        sents = segment_sentences("no terminator here")
        assert len(sents) == 1
        assert sents[0].char_span == (0, len("no terminator here"))

    @pytest.mark.parametrize(
        "text, expected",
        [
            ("Filed under No. 12-345 today. Next item.", 2),
            ("Acme Inc. Agreed to pay. Done.", 2),
            ("Smith et al. Moved to dismiss.", 1),
            ("Under § 12. 3 of the code it fails. Done.", 2),
            ("Reported at 5 N.Y. 339. Affirmed.", 2),
            ("Is it so? Yes! It is.", 3),
        ],
    )
    def test_legal_boundaries(self, text, expected):
        assert len(segment_sentences(text)) == expected

    def test_indices_and_spans(self):
        text = clean("One. Two here. Three is last.")
        sents = segment_sentences(text)
        assert [s.index for s in sents] == [0, 1, 2]
        for s in sents:
            assert text[slice(*s.char_span)] == s.raw
            assert s.char_span[0] < s.char_span[1]

    @settings(max_examples=150)
    @given(
        st.lists(
            st.sampled_from(["The", "court", "v.", "No.", "12.", "U.S.", "held", "it", "A", "?", "!", ".", "§", "3"]),
            min_size=1,
            max_size=40,
        )
    )
    def test_coverage_and_monotone_spans(self, words):
        try:
            text = clean(" ".join(words))
            sents = segment_sentences(text)
        except (EmptyDocument, NoTokens):
            return
        rebuilt = ""
        prev_end = 0
        for s in sents:
            start, end = s.char_span
            assert start >= prev_end
            assert text[prev_end:start].strip() == ""
            rebuilt += text[prev_end:start] + s.raw
            prev_end = end
            assert s.tokens
        assert rebuilt + text[prev_end:] == text
        assert [s.index for s in sents] == list(range(len(sents)))


class TestTokenize:
    def test_lowercase_split(self):
        assert tokenize("The Court DENIED it.") == ["the", "court", "denied", "it"]

    def test_empty(self):
        with pytest.raises(NoTokens):
            tokenize("")

    def test_no_alphanumerics(self):
        with pytest.raises(NoTokens):
            tokenize("... -- !!")

    def test_reporter_abbreviation_kept(self):
        assert tokenize("410 U.S. 113") == ["410", "u.s.", "113"]

    def test_reporter_series_kept(self):
        assert tokenize("512 F.2d 10") == ["512", "f.2d", "10"]

    @given(st.text(max_size=80))
    def test_no_empty_tokens(self, text):
        try:
            toks = tokenize(text)
        except NoTokens:
            return
        assert all(toks) and all(t == t.lower() for t in toks)


def test_build_document_invariants():
    doc = build_document(RawDocument("x", "First point. Second point here. Third."))
    assert doc.token_count == sum(len(s.tokens) for s in doc.sentences)
    assert [s.index for s in doc.sentences] == [0, 1, 2]


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


class TestLoadDataset:
    def test_schema_round_trip(self, tmp_path):
        recs = load_dataset(write_jsonl(tmp_path / "a.jsonl", [{"id": "a", "text": "x. y.", "labels": [0]}]))
        assert len(recs) == 1
        assert recs[0].id == "a"
        assert recs[0].key_segment_labels == frozenset({0})
        assert recs[0].reference_summary is None

    def test_duplicate_id(self, tmp_path):
        rows = [{"id": "a", "text": "One."}, {"id": "b", "text": "Two."}, {"id": "a", "text": "Three."}]
        with pytest.raises(DuplicateId) as info:
            load_dataset(write_jsonl(tmp_path / "d.jsonl", rows))
        assert info.value.doc_id == "a"

    def test_order_preserved(self):
        recs = load_dataset(GOLDEN_CORPUS)
        raw_ids = [json.loads(line)["id"] for line in GOLDEN_CORPUS.read_text().splitlines()]
        assert [r.id for r in recs] == raw_ids

    def test_three_record_fixture(self, tmp_path):
        rows = [
            {"id": "c", "text": "Gamma text.", "summary": "Gamma."},
            {"id": "a", "text": "Alpha text. More alpha.", "labels": [1]},
            {"id": "b", "text": "Beta text."},
        ]
        recs = load_dataset(write_jsonl(tmp_path / "t.jsonl", rows))
        assert [r.id for r in recs] == ["c", "a", "b"]
        assert recs[0].reference_summary == "Gamma."
        assert recs[1].key_segment_labels == frozenset({1})

    @pytest.mark.parametrize(
        "line, reason",
        [
            ('{"id": "a"}', "text"),
            ('{"id": "", "text": "x"}', "id"),
            ('{"id": "a", "text": "One.", "labels": [5]}', "out of range"),
            ('{"id": "a", "text": "One.", "labels": [true]}', "invalid label"),
            ('{"id": "a", "text": "One.", "labels": "0"}', "array"),
            ("[1, 2]", "object"),
            ("{not json", ""),
        ],
    )
    def test_parse_errors_carry_line(self, tmp_path, line, reason):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"id": "ok", "text": "Fine."}\n' + line + "\n", encoding="utf-8")
        with pytest.raises(ParseError) as info:
            load_dataset(path)
        assert info.value.line == 2
        assert reason in str(info.value)

    def test_missing_path(self, tmp_path):
        with pytest.raises(DatasetIOError):
            load_dataset(tmp_path / "nope.jsonl")

    def test_text_dir(self, tmp_path):
        (tmp_path / "b.txt").write_text("Beta opinion.", encoding="utf-8")
        (tmp_path / "a.txt").write_text("Alpha opinion.", encoding="utf-8")
        (tmp_path / "skip.md").write_text("ignored", encoding="utf-8")
        recs = load_dataset(tmp_path)
        assert [r.id for r in recs] == ["a", "b"]
        assert all(r.key_segment_labels is None for r in recs)

    def test_single_text_file(self, tmp_path):
        path = tmp_path / "case.txt"
        path.write_text("The appeal is denied.", encoding="utf-8")
        [rec] = load_dataset(path)
        assert rec.id == "case"
