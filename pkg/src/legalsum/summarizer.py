"""Budgeted extractive summary generation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

from .corpus import CleanDocument
from .errors import ConfigError, ScoreCoverageMismatch
from .features import FeaturePipeline, IdfTable, Lexicon
from .scoring import ExtractionConfig, ModelParams, ScoredSentence, score_features

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SummaryBudget:
    mode: str = "top_k"
    k: int | None = 3
    max_tokens: int | None = None

    def __post_init__(self) -> None:
        if self.mode == "top_k":
            if self.k is None or self.k < 1:
                raise ConfigError("top_k budget needs k >= 1")
        elif self.mode == "token_budget":
            if self.max_tokens is None or self.max_tokens < 1:
                raise ConfigError("token_budget needs max_tokens >= 1")
        else:
            raise ConfigError(f"unknown budget mode {self.mode!r}")

    @classmethod
    def top_k(cls, k: int) -> "SummaryBudget":
        return cls("top_k", k=k, max_tokens=None)

    @classmethod
    def tokens(cls, max_tokens: int) -> "SummaryBudget":
        return cls("token_budget", k=None, max_tokens=max_tokens)


@dataclass(frozen=True)
class Summary:
    doc_id: str
    selected: tuple[tuple[int, float], ...]
    text: str
    token_count: int
    empty_pool: bool = False

    @property
    def indices(self) -> list[int]:
        return [i for i, _ in self.selected]

    def to_dict(self) -> dict:
        out = {
            "doc_id": self.doc_id,
            "indices": self.indices,
            "scores": [s for _, s in self.selected],
            "text": self.text,
            "token_count": self.token_count,
        }
        if self.empty_pool:
            out["empty_pool"] = True
        return out


def _ranked(scores: Sequence[ScoredSentence]) -> list[ScoredSentence]:
    return sorted(scores, key=lambda s: (-s.score, s.sentence_index))


def _build(doc: CleanDocument, chosen: Sequence[ScoredSentence], empty_pool: bool = False) -> Summary:
    chosen = sorted(chosen, key=lambda s: s.sentence_index)
    sentences = [doc.sentences[s.sentence_index] for s in chosen]
    return Summary(
        doc_id=doc.id,
        selected=tuple((s.sentence_index, s.score) for s in chosen),
        text=" ".join(s.raw for s in sentences),
        token_count=sum(len(s.tokens) for s in sentences),
        empty_pool=empty_pool,
    )


def _select(pool: Sequence[ScoredSentence], doc: CleanDocument, budget: SummaryBudget) -> list[ScoredSentence]:
    ranked = _ranked(pool)
    if budget.mode == "top_k":
        if budget.k > len(ranked):
            logger.info("k=%d exceeds %d candidate sentences in %s; taking all", budget.k, len(ranked), doc.id)
        return ranked[: budget.k]
    chosen, used = [], 0
    for s in ranked:
        n = len(doc.sentences[s.sentence_index].tokens)
        if used + n <= budget.max_tokens:
            chosen.append(s)
            used += n
    return chosen


def generate_summary(doc: CleanDocument, scores: Sequence[ScoredSentence], budget: SummaryBudget) -> Summary:
    """Select the highest-scoring sentences within ``budget``, in document order.

    Ties in score go to the lower sentence index. In token-budget mode
    sentences are admitted greedily by descending score, skipping any that
    would overflow the budget.
    """
    indices = sorted(s.sentence_index for s in scores)
    if indices != list(range(len(doc.sentences))):
        raise ScoreCoverageMismatch(
            f"{len(scores)} scores do not cover the {len(doc.sentences)} sentences of {doc.id!r}"
        )
    return _build(doc, _select(scores, doc, budget))


def summarize_document(
    doc: CleanDocument,
    cfg: ExtractionConfig,
    params: ModelParams | None,
    budget: SummaryBudget,
    idf: IdfTable,
    lexicon: Lexicon,
    cues: Lexicon | None = None,
    *,
    prefilter: bool = True,
) -> Summary:
    """Featurize, score, optionally drop sentences below the threshold, then select."""
    pipeline = FeaturePipeline(idf, lexicon) if cues is None else FeaturePipeline(idf, lexicon, cues)
    return summarize_with(doc, pipeline, cfg, params, budget, prefilter=prefilter)


def summarize_with(
    doc: CleanDocument,
    pipeline: FeaturePipeline,
    cfg: ExtractionConfig,
    params: ModelParams | None,
    budget: SummaryBudget,
    *,
    prefilter: bool = True,
) -> Summary:
    scores = score_features(pipeline.document_features(doc), cfg, params)
    return select_sentences(doc, scores, budget, cfg.threshold if prefilter else None)


def select_sentences(
    doc: CleanDocument,
    scores: Sequence[ScoredSentence],
    budget: SummaryBudget,
    threshold: float | None = None,
) -> Summary:
    """``generate_summary`` restricted to sentences scoring at least ``threshold``.

    An empty pool yields an empty summary flagged ``empty_pool``.
    """
    if threshold is None:
        return generate_summary(doc, scores, budget)
    pool = [s for s in scores if s.score >= threshold]
    if not pool:
        return _build(doc, [], empty_pool=True)
    return _build(doc, _select(pool, doc, budget))
