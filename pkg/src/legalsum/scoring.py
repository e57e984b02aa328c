"""Sentence relevance scorers and threshold extraction of key segments."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import CleanDocument
from .errors import ConfigError, MissingModel, ModelFormatError, NonFiniteFeature
from .features import FEATURE_NAMES, FeaturePipeline, FeatureVector, IdfTable, Lexicon

SCORER_KINDS = ("rule", "supervised", "hybrid")
MODEL_FORMAT = "legalsum.model"
MODEL_VERSION = 1

# Fixed rule weights; they sum to 1 so the rule score stays in [0, 1].
RULE_WEIGHTS: dict[str, float] = {
    "tfidf_mean": 0.20,
    "tfidf_max": 0.10,
    "position": 0.15,  # applied to (1 - position): earlier sentences score higher
    "rel_length": 0.05,
    "lexicon_hits": 0.20,
    "citation_count": 0.20,
    "cue_phrase": 0.10,
    "numeric_density": 0.00,
}
LEXICON_CAP = 3
CITATION_CAP = 2


@dataclass(frozen=True)
class ModelParams:
    weights: tuple[float, ...]
    bias: float
    feature_names: tuple[str, ...] = FEATURE_NAMES
    trained_on: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "bias", float(self.bias))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if len(self.weights) != len(FEATURE_NAMES):
            raise ModelFormatError(f"expected {len(FEATURE_NAMES)} weights, got {len(self.weights)}")
        if self.feature_names != FEATURE_NAMES:
            raise ModelFormatError(f"feature order {list(self.feature_names)} does not match {list(FEATURE_NAMES)}")
        if not all(math.isfinite(w) for w in self.weights) or not math.isfinite(self.bias):
            raise ModelFormatError("model parameters must be finite")

    @classmethod
    def zeros(cls) -> "ModelParams":
        return cls((0.0,) * len(FEATURE_NAMES), 0.0)

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "feature_names": list(self.feature_names),
            "weights": list(self.weights),
            "bias": self.bias,
            "trained_on": self.trained_on,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        if data.get("format") != MODEL_FORMAT:
            raise ModelFormatError(f"not a {MODEL_FORMAT} file")
        if data.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model version {data.get('version')!r}")
        try:
            return cls(
                weights=tuple(data["weights"]),
                bias=data["bias"],
                feature_names=tuple(data["feature_names"]),
                trained_on=data.get("trained_on", ""),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError(f"malformed model file: {exc}") from None


def save_model(params: ModelParams, path: str | Path, **extra: object) -> None:
    """Write ``params`` as versioned JSON; ``extra`` adds top-level sections (e.g. ``idf``)."""
    payload = params.to_dict()
    payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ModelParams:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    return ModelParams.from_dict(data)


@dataclass(frozen=True)
class ExtractionConfig:
    threshold: float = 0.5
    scorer_kind: str = "rule"
    hybrid_alpha: float = 0.6

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must be in [0, 1], got {self.threshold}")
        if not 0.0 <= self.hybrid_alpha <= 1.0:
            raise ConfigError(f"hybrid_alpha must be in [0, 1], got {self.hybrid_alpha}")
        if self.scorer_kind not in SCORER_KINDS:
            raise ConfigError(f"scorer_kind must be one of {SCORER_KINDS}, got {self.scorer_kind!r}")


@dataclass(frozen=True)
class ScoredSentence:
    sentence_index: int
    score: float
    scorer_kind: str


@dataclass(frozen=True)
class KeySegments:
    indices: frozenset[int]
    scored: tuple[ScoredSentence, ...]


def _check_finite(fv: Sequence[float]) -> None:
    if not all(math.isfinite(v) for v in fv):
        raise NonFiniteFeature(f"non-finite feature in {tuple(fv)}")


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def score_rule_based(fv: FeatureVector, tfidf_scale: tuple[float, float] = (1.0, 1.0)) -> float:
    """Weighted sum of normalized features, clamped to [0, 1].

    ``tfidf_scale`` holds the document-level maxima of the two tf-idf
    dimensions; callers scoring a whole document should pass them (see
    ``document_tfidf_scale``).
    """
    _check_finite(fv)
    f = FeatureVector(*fv)
    mean_scale, max_scale = tfidf_scale
    w = RULE_WEIGHTS
    total = (
        w["tfidf_mean"] * _clamp01(f.tfidf_mean / mean_scale if mean_scale > 0 else 0.0)
        + w["tfidf_max"] * _clamp01(f.tfidf_max / max_scale if max_scale > 0 else 0.0)
        + w["position"] * (1.0 - _clamp01(f.position))
        + w["rel_length"] * _clamp01(f.rel_length)
        + w["lexicon_hits"] * min(f.lexicon_hits, LEXICON_CAP) / LEXICON_CAP
        + w["citation_count"] * min(f.citation_count, CITATION_CAP) / CITATION_CAP
        + w["cue_phrase"] * _clamp01(f.cue_phrase)
        + w["numeric_density"] * _clamp01(f.numeric_density)
    )
    return _clamp01(total)


def score_supervised(fv: FeatureVector, params: ModelParams) -> float:
    _check_finite(fv)
    z = math.fsum(w * x for w, x in zip(params.weights, fv)) + params.bias
    return sigmoid(z)


def score_hybrid(
    fv: FeatureVector,
    params: ModelParams,
    alpha: float,
    tfidf_scale: tuple[float, float] = (1.0, 1.0),
) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must be in [0, 1], got {alpha}")
    sup = score_supervised(fv, params)
    rule = score_rule_based(fv, tfidf_scale)
    # endpoints returned exactly, free of rounding in the blend
    if alpha == 1.0:
        return sup
    if alpha == 0.0:
        return rule
    mix = alpha * sup + (1.0 - alpha) * rule
    return min(max(mix, min(sup, rule)), max(sup, rule))


def document_tfidf_scale(features: Sequence[FeatureVector]) -> tuple[float, float]:
    return (
        max((f.tfidf_mean for f in features), default=0.0),
        max((f.tfidf_max for f in features), default=0.0),
    )


def score_features(
    features: Sequence[FeatureVector],
    cfg: ExtractionConfig,
    params: ModelParams | None = None,
) -> list[ScoredSentence]:
    """Score every sentence of one document from its precomputed feature vectors."""
    if cfg.scorer_kind != "rule" and params is None:
        raise MissingModel(f"scorer {cfg.scorer_kind!r} needs trained model parameters")
    scale = document_tfidf_scale(features)
    scored = []
    for i, fv in enumerate(features):
        if cfg.scorer_kind == "rule":
            s = score_rule_based(fv, scale)
        elif cfg.scorer_kind == "supervised":
            s = score_supervised(fv, params)
        else:
            s = score_hybrid(fv, params, cfg.hybrid_alpha, scale)
        scored.append(ScoredSentence(i, s, cfg.scorer_kind))
    return scored


def threshold_filter(scored: Sequence[ScoredSentence], threshold: float) -> frozenset[int]:
    return frozenset(s.sentence_index for s in scored if s.score >= threshold)


def extract_key_segments(
    doc: CleanDocument,
    cfg: ExtractionConfig,
    params: ModelParams | None,
    idf: IdfTable,
    lexicon: Lexicon,
    cues: Lexicon | None = None,
) -> KeySegments:
    """Return the sentences whose relevance score reaches ``cfg.threshold``, plus all scores."""
    if cfg.scorer_kind != "rule" and params is None:
        raise MissingModel(f"scorer {cfg.scorer_kind!r} needs trained model parameters")
    pipeline = FeaturePipeline(idf, lexicon) if cues is None else FeaturePipeline(idf, lexicon, cues)
    scored = score_features(pipeline.document_features(doc), cfg, params)
    return KeySegments(threshold_filter(scored, cfg.threshold), tuple(scored))
