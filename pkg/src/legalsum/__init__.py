"""Extractive legal-document summarization: relevance scoring, key-segment
extraction, budgeted summaries and an evaluation harness."""

from .corpus import (
    CleanDocument,
    DatasetRecord,
    RawDocument,
    Sentence,
    build_document,
    clean,
    load_dataset,
    segment_sentences,
    tokenize,
)
from .evaluation import (
    detection_report,
    efficiency_gain,
    percent_change,
    rouge_l,
    rouge_n,
)
from .features import (
    FEATURE_NAMES,
    FeaturePipeline,
    FeatureVector,
    IdfTable,
    Lexicon,
    build_idf,
    default_cues,
    default_lexicon,
    detect_citations,
    extract_features,
)
from .scoring import (
    ExtractionConfig,
    ModelParams,
    ScoredSentence,
    extract_key_segments,
    score_hybrid,
    score_rule_based,
    score_supervised,
)
from .summarizer import Summary, SummaryBudget, generate_summary, summarize_document
from .training import TrainConfig, TrainReport, train

__version__ = "0.1.0"

__all__ = [
    "CleanDocument",
    "DatasetRecord",
    "ExtractionConfig",
    "FEATURE_NAMES",
    "FeaturePipeline",
    "FeatureVector",
    "IdfTable",
    "Lexicon",
    "ModelParams",
    "RawDocument",
    "ScoredSentence",
    "Sentence",
    "Summary",
    "SummaryBudget",
    "TrainConfig",
    "TrainReport",
    "build_document",
    "build_idf",
    "clean",
    "default_cues",
    "default_lexicon",
    "detect_citations",
    "detection_report",
    "efficiency_gain",
    "extract_features",
    "extract_key_segments",
    "generate_summary",
    "load_dataset",
    "percent_change",
    "rouge_l",
    "rouge_n",
    "score_hybrid",
    "score_rule_based",
    "score_supervised",
    "segment_sentences",
    "summarize_document",
    "tokenize",
    "train",
]
