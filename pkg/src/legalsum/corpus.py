"""Document ingestion: cleaning, sentence segmentation, tokenization, dataset loading."""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import DatasetIOError, DuplicateId, EmptyDocument, NoTokens, ParseError

logger = logging.getLogger(__name__)

# Abbreviations after which a period never ends a sentence. Matched
# case-sensitively against the whitespace-delimited word carrying the period.
ABBREVIATIONS: frozenset[str] = frozenset(
    {
        "v.", "vs.", "No.", "Nos.", "no.", "Fed.", "Stat.", "U.S.", "Inc.",
        "Corp.", "Id.", "id.", "Co.", "Ltd.", "L.L.C.", "Cir.", "Ct.", "Supp.",
        "App.", "Cal.", "Dist.", "Civ.", "Crim.", "Proc.", "Evid.", "Reg.",
        "Sec.", "Secs.", "sec.", "Art.", "art.", "Ch.", "ch.", "cl.", "Pt.",
        "para.", "Mr.", "Mrs.", "Ms.", "Dr.", "Jr.", "Sr.", "St.", "Hon.",
        "e.g.", "i.e.", "cf.", "Cf.", "et al.", "al.", "ex rel.", "rel.",
        "U.S.C.", "C.F.R.", "F.", "S.", "L.", "Ed.", "So.", "N.E.", "N.W.",
        "S.E.", "S.W.", "P.", "A.",
    }
)
ABBREVIATIONS_VERSION = "1"

_TRANSLATE = str.maketrans(
    {
        "‘": "'", "’": "'", "‚": "'", "‛": "'", "′": "'",
        "“": '"', "”": '"', "„": '"', "‟": '"', "″": '"',
        "«": '"', "»": '"',
        "‐": "-", "‑": "-", "‒": "-", "–": "-", "—": "-",
        "―": "-", "−": "-",
        "…": "...",
    }
)

_WS_RUN = re.compile(r"\s+")

# Terminator (plus closing quotes/brackets), then whitespace, then an
# optionally quoted/bracketed uppercase letter or digit.
_BOUNDARY = re.compile(r"[.!?]+[\"')\]]*(?=\s+[\"'(\[]?[A-Z0-9])")
_SECTION_NUMBER = re.compile(r"§+\s*[\w\-()]*\d$")
# Reporter-style abbreviations ("N.Y.", "Ex.", "Rep.") followed by a page number.
_REPORTER_ABBREV = re.compile(r"(?:[A-Za-z]+\.){2,}|[A-Z][A-Za-z]{0,3}\.")

# Dotted abbreviations ("u.s.", "u.s.c.") and reporter series ("f.2d") are
# single tokens so reporter citations survive tokenization intact.
_TOKEN = re.compile(r"(?:[^\W\d_]{1,4}\.){2,}|[^\W\d_]{1,4}\.\d+[^\W\d_]{1,2}\b|[^\W_]+")


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str
    source_path: str = ""


@dataclass(frozen=True)
class Sentence:
    index: int
    raw: str
    tokens: tuple[str, ...]
    char_span: tuple[int, int]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class CleanDocument:
    id: str
    sentences: tuple[Sentence, ...]
    token_count: int
    text: str

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class DatasetRecord:
    document: RawDocument
    reference_summary: str | None = None
    key_segment_labels: frozenset[int] | None = None

    @property
    def id(self) -> str:
        return self.document.id


def clean(doc: RawDocument | str) -> str:
    """Return the cleaned text of ``doc``.

    Unicode quotes and dashes are folded to ASCII, control and format
    characters are dropped (whitespace controls become spaces), and every run
    of whitespace collapses to one space. Raises EmptyDocument when nothing
    printable remains.
    """
    text = doc.text if isinstance(doc, RawDocument) else doc
    text = text.translate(_TRANSLATE)
    chars = []
    for ch in text:
        if ch.isspace():
            chars.append(" ")
        elif unicodedata.category(ch) in ("Cc", "Cf"):
            continue
        else:
            chars.append(ch)
    cleaned = _WS_RUN.sub(" ", "".join(chars)).strip()
    if not cleaned:
        raise EmptyDocument(getattr(doc, "id", "<text>"))
    return cleaned


def tokenize(sentence_raw: str) -> list[str]:
    tokens = _TOKEN.findall(sentence_raw.lower())
    if not tokens:
        raise NoTokens(sentence_raw[:40])
    return tokens


def _is_boundary(text: str, match: re.Match[str]) -> bool:
    if text[match.start()] != "." or match.end() - match.start() != 1:
        return True
    word_start = text.rfind(" ", 0, match.start()) + 1
    word = text[word_start : match.end()].lstrip("\"'([")
    if word in ABBREVIATIONS:
        return False
    # two-word abbreviations such as "et al." and "ex rel."
    prev_start = text.rfind(" ", 0, max(word_start - 1, 0)) + 1
    if text[prev_start : match.end()] in ABBREVIATIONS:
        return False
    next_is_digit = text[match.end() :].lstrip()[:1].isdigit()
    if next_is_digit and _REPORTER_ABBREV.fullmatch(word):
        return False
    # "§ 12. 3" style numbered subsections
    if next_is_digit and _SECTION_NUMBER.search(text[: match.start()]):
        return False
    return True


def _spans(text: str) -> Iterator[tuple[int, int]]:
    pos = 0
    n = len(text)
    for m in _BOUNDARY.finditer(text):
        if m.end() <= pos or not _is_boundary(text, m):
            continue
        start = pos
        while start < m.end() and text[start].isspace():
            start += 1
        yield start, m.end()
        pos = m.end()
    start = pos
    while start < n and text[start].isspace():
        start += 1
    end = n
    while end > start and text[end - 1].isspace():
        end -= 1
    if end > start:
        yield start, end


def segment_sentences(cleaned_text: str) -> list[Sentence]:
    """Split cleaned text into sentences.

    Segments carrying no alphanumeric content are merged into the preceding
    sentence (or the following one, at the start of the text) so every
    sentence has at least one token.
    """
    pieces: list[list[int]] = []
    pending_start: int | None = None
    for start, end in _spans(cleaned_text):
        if pending_start is not None:
            start, pending_start = pending_start, None
        has_tokens = bool(_TOKEN.search(cleaned_text[start:end]))
        if has_tokens:
            pieces.append([start, end])
        elif pieces:
            pieces[-1][1] = end
        else:
            pending_start = start
    if pending_start is not None and pieces:
        pieces[-1][1] = len(cleaned_text.rstrip())

    sentences = []
    for index, (start, end) in enumerate(pieces):
        raw = cleaned_text[start:end]
        sentences.append(Sentence(index, raw, tuple(tokenize(raw)), (start, end)))
    if not sentences:
        raise NoTokens(cleaned_text[:40])
    return sentences


def build_document(doc: RawDocument) -> CleanDocument:
    """Clean and segment ``doc`` into a CleanDocument."""
    text = clean(doc)
    sentences = tuple(segment_sentences(text))
    return CleanDocument(
        id=doc.id,
        sentences=sentences,
        token_count=sum(len(s.tokens) for s in sentences),
        text=text,
    )


def _parse_labels(value: object, line: int) -> frozenset[int]:
    if not isinstance(value, list):
        raise ParseError(line, "'labels' must be an array of integers")
    for item in value:
        if isinstance(item, bool) or not isinstance(item, int) or item < 0:
            raise ParseError(line, f"invalid label {item!r}")
    return frozenset(value)


def _record_from_json(obj: object, line: int, source: str) -> DatasetRecord:
    if not isinstance(obj, dict):
        raise ParseError(line, "expected a JSON object")
    doc_id = obj.get("id")
    text = obj.get("text")
    if not isinstance(doc_id, str) or not doc_id:
        raise ParseError(line, "'id' must be a non-empty string")
    if not isinstance(text, str):
        raise ParseError(line, "'text' must be a string")
    summary = obj.get("summary")
    if summary is not None and not isinstance(summary, str):
        raise ParseError(line, "'summary' must be a string")
    labels = None
    if obj.get("labels") is not None:
        labels = _parse_labels(obj["labels"], line)
        try:
            n = len(build_document(RawDocument(doc_id, text)).sentences)
        except (EmptyDocument, NoTokens):
            raise ParseError(line, "labels given for a document with no sentences") from None
        bad = sorted(i for i in labels if i >= n)
        if bad:
            raise ParseError(line, f"label(s) {bad} out of range for {n} sentences")
    return DatasetRecord(RawDocument(doc_id, text, source), summary, labels)


def _load_jsonl(path: Path) -> list[DatasetRecord]:
    records: list[DatasetRecord] = []
    seen: set[str] = set()
    try:
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(lineno, exc.msg) from None
                record = _record_from_json(obj, lineno, str(path))
                if record.id in seen:
                    raise DuplicateId(record.id)
                seen.add(record.id)
                records.append(record)
    except UnicodeDecodeError as exc:
        raise DatasetIOError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    except OSError as exc:
        raise DatasetIOError(f"{path}: {exc.strerror or exc}") from None
    return records


def _load_text_dir(path: Path) -> list[DatasetRecord]:
    records = []
    try:
        files = sorted(path.glob("*.txt"))
        for f in files:
            text = f.read_text(encoding="utf-8")
            records.append(DatasetRecord(RawDocument(f.stem, text, str(f))))
    except OSError as exc:
        raise DatasetIOError(f"{path}: {exc.strerror or exc}") from None
    return records


def load_dataset(path: str | Path, format: str | None = None) -> list[DatasetRecord]:
    """Load records from a JSONL file, a directory of ``*.txt`` files, or a single ``.txt``.

    ``format`` is ``"jsonl"`` or ``"text-dir"``; when omitted it is inferred
    from the path.
    """
    path = Path(path)
    if not path.exists():
        raise DatasetIOError(f"{path}: no such file or directory")
    if format is None:
        format = "text-dir" if path.is_dir() or path.suffix == ".txt" else "jsonl"
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "text-dir":
        if path.is_file():
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise DatasetIOError(f"{path}: {exc.strerror or exc}") from None
            return [DatasetRecord(RawDocument(path.stem, text, str(path)))]
        return _load_text_dir(path)
    raise ValueError(f"unknown dataset format {format!r}")
