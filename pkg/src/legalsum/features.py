"""Per-sentence feature map shared by every scorer."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .corpus import CleanDocument, Sentence, tokenize
from .errors import EmptyCorpus, NoTokens, SentenceNotInDocument

FEATURE_NAMES: tuple[str, ...] = (
    "tfidf_mean",
    "tfidf_max",
    "position",
    "rel_length",
    "lexicon_hits",
    "citation_count",
    "cue_phrase",
    "numeric_density",
)


class FeatureVector(NamedTuple):
    tfidf_mean: float
    tfidf_max: float
    position: float
    rel_length: float
    lexicon_hits: float
    citation_count: float
    cue_phrase: float
    numeric_density: float


@dataclass(frozen=True)
class IdfTable:
    """Smoothed inverse document frequencies, ``ln((1+N)/(1+df)) + 1``."""

    values: Mapping[str, float]
    doc_count: int

    def __post_init__(self) -> None:
        if self.doc_count < 1:
            raise EmptyCorpus("IdfTable requires doc_count >= 1")
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))

    def idf(self, token: str) -> float:
        value = self.values.get(token)
        if value is None:
            # unseen token: same formula with df = 0
            return math.log(1 + self.doc_count) + 1.0
        return value

    def __len__(self) -> int:
        return len(self.values)

    def to_dict(self) -> dict:
        return {"doc_count": self.doc_count, "idf": dict(sorted(self.values.items()))}

    @classmethod
    def from_dict(cls, data: Mapping) -> "IdfTable":
        return cls({str(k): float(v) for k, v in data["idf"].items()}, int(data["doc_count"]))


def build_idf(corpus: Iterable[CleanDocument]) -> IdfTable:
    df: Counter[str] = Counter()
    n = 0
    for doc in corpus:
        n += 1
        df.update({tok for s in doc.sentences for tok in s.tokens})
    if n == 0:
        raise EmptyCorpus("cannot build an IDF table from zero documents")
    values = {tok: math.log((1 + n) / (1 + count)) + 1.0 for tok, count in df.items()}
    return IdfTable(values, n)


@dataclass(frozen=True)
class Lexicon:
    """An immutable set of lowercase terms; multi-word terms match as token phrases."""

    terms: frozenset[str]
    name: str = "custom"
    version: str = "0"
    phrases: tuple[tuple[str, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        terms = frozenset(self.terms)
        if not terms:
            raise ValueError(f"lexicon {self.name!r} is empty")
        upper = sorted(t for t in terms if t != t.lower())
        if upper:
            raise ValueError(f"lexicon terms must be lowercase: {upper[:3]}")
        phrases = []
        for term in sorted(terms):
            try:
                phrases.append(tuple(tokenize(term)))
            except NoTokens:
                raise ValueError(f"lexicon term {term!r} has no tokens") from None
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "phrases", tuple(phrases))

    def __len__(self) -> int:
        return len(self.terms)


def parse_lexicon(text: str, name: str = "custom") -> Lexicon:
    """Parse the one-term-per-line format; ``# name:`` / ``# version:`` comments set metadata."""
    terms = []
    version = "0"
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            key = key.strip().lower()
            if key == "name" and value.strip():
                name = value.strip()
            elif key == "version" and value.strip():
                version = value.strip()
            continue
        terms.append(line)
    return Lexicon(frozenset(terms), name, version)


def load_lexicon(path: str | Path) -> Lexicon:
    path = Path(path)
    return parse_lexicon(path.read_text(encoding="utf-8"), name=path.stem)


def _bundled(filename: str) -> Lexicon:
    text = resources.files("legalsum").joinpath("data").joinpath(filename).read_text(encoding="utf-8")
    return parse_lexicon(text, name=filename.rsplit(".", 1)[0])


@lru_cache(maxsize=None)
def default_lexicon() -> Lexicon:
    return _bundled("legal_lexicon.txt")


@lru_cache(maxsize=None)
def default_cues() -> Lexicon:
    return _bundled("cue_phrases.txt")


# --- citations ---------------------------------------------------------------

@dataclass(frozen=True)
class CitationSpan:
    start: int
    end: int
    kind: str  # "case-citation" | "statute" | "docket"

    def __post_init__(self) -> None:
        if self.start >= self.end:
            raise ValueError("citation span must be non-empty")


_NAME_WORD = r"[A-Z][\w'&.\-]*"
_NAME = rf"{_NAME_WORD}(?:,? (?:of|the|and|for|ex rel\.|&|{_NAME_WORD})){{0,5}}"
_REPORTER_PART = r"(?:[A-Z][A-Za-z]*\.?|\d[a-z]{1,2})"
_REPORTER = rf"{_REPORTER_PART}(?: ?{_REPORTER_PART}){{0,4}}"
_SIGNALS = r"(?!(?:See|Cf|Accord|But|Compare|Contra|Also|In)\b)"

CITATION_PATTERNS: dict[str, re.Pattern[str]] = {
    "case-citation": re.compile(
        rf"(?<![\w.]){_SIGNALS}{_NAME} v\. {_NAME}, \d{{1,4}} {_REPORTER} \d{{1,5}}\b"
    ),
    "statute": re.compile(
        r"(?:\b\d{1,3} U\.S\.C\.(?:A\.)? ?)?§§? ?\d+[\w\-]*(?:\.\d+[\w\-]*)*(?:\([\w]+\))*"
    ),
    "docket": re.compile(r"\bNo\. ?\d+(?:-\d+)*\b"),
}


def detect_citations(sentence: Sentence | str) -> list[CitationSpan]:
    """Find case citations, statute references and docket numbers.

    Overlaps between candidate matches resolve to the longest, then the
    leftmost. Offsets are relative to the sentence text.
    """
    text = sentence.raw if isinstance(sentence, Sentence) else sentence
    candidates = [
        CitationSpan(m.start(), m.end(), kind)
        for kind, pattern in CITATION_PATTERNS.items()
        for m in pattern.finditer(text)
    ]
    candidates.sort(key=lambda c: (-(c.end - c.start), c.start))
    chosen: list[CitationSpan] = []
    for cand in candidates:
        if all(cand.end <= c.start or cand.start >= c.end for c in chosen):
            chosen.append(cand)
    return sorted(chosen, key=lambda c: c.start)


# --- features ----------------------------------------------------------------

_NUMERIC = re.compile(r"[0-9]+")


def _count_phrases(tokens: Sequence[str], phrases: Iterable[tuple[str, ...]]) -> int:
    hits = 0
    n = len(tokens)
    for phrase in phrases:
        width = len(phrase)
        if any(tuple(tokens[i : i + width]) == phrase for i in range(n - width + 1)):
            hits += 1
    return hits


def _starts_with_cue(tokens: Sequence[str], cues: Lexicon) -> bool:
    return any(tuple(tokens[: len(p)]) == p for p in cues.phrases)


def extract_features(
    sentence: Sentence,
    doc: CleanDocument,
    idf: IdfTable,
    lexicon: Lexicon,
    cues: Lexicon | None = None,
) -> FeatureVector:
    """Compute the 8-dimensional feature vector of one sentence of ``doc``.

    tf-idf statistics are taken over the sentence's distinct tokens with
    ``tf = count / sentence length``.
    """
    n = len(doc.sentences)
    if not 0 <= sentence.index < n or doc.sentences[sentence.index] != sentence:
        raise SentenceNotInDocument(f"sentence {sentence.index} is not part of {doc.id!r}")
    if cues is None:
        cues = default_cues()
    tokens = sentence.tokens
    length = len(tokens)

    weights = [c / length * idf.idf(tok) for tok, c in Counter(tokens).items()]
    longest = max(len(s.tokens) for s in doc.sentences)
    return FeatureVector(
        tfidf_mean=math.fsum(weights) / len(weights),
        tfidf_max=max(weights),
        position=sentence.index / (n - 1) if n > 1 else 0.0,
        rel_length=length / longest,
        lexicon_hits=float(_count_phrases(tokens, lexicon.phrases)),
        citation_count=float(len(detect_citations(sentence))),
        cue_phrase=1.0 if _starts_with_cue(tokens, cues) else 0.0,
        numeric_density=sum(1 for t in tokens if _NUMERIC.fullmatch(t)) / length,
    )


@dataclass(frozen=True)
class FeaturePipeline:
    """Bundles the shared resources needed to featurize documents."""

    idf: IdfTable
    lexicon: Lexicon = field(default_factory=default_lexicon)
    cues: Lexicon = field(default_factory=default_cues)

    def document_features(self, doc: CleanDocument) -> list[FeatureVector]:
        return [extract_features(s, doc, self.idf, self.lexicon, self.cues) for s in doc.sentences]

    def matrix(self, doc: CleanDocument) -> np.ndarray:
        return np.asarray(self.document_features(doc), dtype=np.float64).reshape(-1, len(FEATURE_NAMES))
