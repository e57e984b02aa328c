"""Logistic-regression training of the supervised scorer.

Mini-batch gradient descent on mean binary cross-entropy with an L2 penalty,
validation split by document, and early stopping on validation loss.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .corpus import DatasetRecord, build_document
from .errors import ConfigError, EmptyBatch, SingleClassData, TooFewExamples
from .features import FEATURE_NAMES, FeaturePipeline
from .scoring import ModelParams

logger = logging.getLogger(__name__)

PROB_EPS = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    batch_size: int = 16
    max_epochs: int = 10
    patience: int = 3
    validation_fraction: float = 0.2
    seed: int = 0
    l2: float = 1e-4

    def __post_init__(self) -> None:
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be > 0")
        for name in ("batch_size", "max_epochs", "patience"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must be in (0, 1)")
        if self.l2 < 0:
            raise ConfigError("l2 must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")


@dataclass
class TrainReport:
    train_losses: list[float] = field(default_factory=list)  # index 0: before the first update
    val_losses: list[float] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    params_fingerprint: str = ""
    train_docs: list[str] = field(default_factory=list)
    val_docs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def format_table(self) -> str:
        lines = [f"{'epoch':>5}  {'train_loss':>12}  {'val_loss':>12}"]
        for epoch, (tl, vl) in enumerate(zip(self.train_losses, self.val_losses)):
            mark = "  *" if epoch == self.best_epoch else ""
            lines.append(f"{epoch:>5}  {tl:>12.6f}  {vl:>12.6f}{mark}")
        lines.append(f"best_epoch={self.best_epoch} stopped_epoch={self.stopped_epoch}")
        return "\n".join(lines)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _as_batch(features, labels) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(features, dtype=np.float64).reshape(-1, len(FEATURE_NAMES))
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if X.shape[0] == 0:
        raise EmptyBatch("batch has no examples")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
    return X, y


# Clamping the logit to +-LOGIT_CAP is the same as clamping the probability to
# [PROB_EPS, 1 - PROB_EPS], and the log-sum-exp form avoids cancellation in 1 - p.
LOGIT_CAP = math.log((1.0 - PROB_EPS) / PROB_EPS)


def _loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    z = np.clip(X @ w + b, -LOGIT_CAP, LOGIT_CAP)
    bce = np.logaddexp(0.0, z) - y * z
    return float(bce.mean() + 0.5 * l2 * (w @ w))


def _gradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> tuple[np.ndarray, float]:
    resid = _sigmoid(X @ w + b) - y
    return X.T @ resid / len(y) + l2 * w, float(resid.mean())


def loss(params: ModelParams, features, labels, l2: float = 0.0) -> float:
    """Mean binary cross-entropy of ``params`` on a batch plus ``l2/2 * ||w||^2``."""
    X, y = _as_batch(features, labels)
    return _loss(np.asarray(params.weights), params.bias, X, y, l2)


def gradient(params: ModelParams, features, labels, l2: float = 0.0) -> tuple[np.ndarray, float]:
    """Analytic gradient of ``loss`` with respect to (weights, bias)."""
    X, y = _as_batch(features, labels)
    return _gradient(np.asarray(params.weights), params.bias, X, y, l2)


def accuracy(params: ModelParams, features, labels, threshold: float = 0.5) -> float:
    X, y = _as_batch(features, labels)
    pred = _sigmoid(X @ np.asarray(params.weights) + params.bias) >= threshold
    return float(np.mean(pred == (y > 0.5)))


class EarlyStopping:
    """Tracks the best epoch and signals a stop after ``patience`` non-improving epochs."""

    def __init__(self, patience: int) -> None:
        self.patience = patience
        self.best = math.inf
        self.best_epoch = 0
        self.wait = 0

    def update(self, epoch: int, value: float) -> bool:
        if value < self.best:
            self.best = value
            self.best_epoch = epoch
            self.wait = 0
            return False
        self.wait += 1
        return self.wait >= self.patience


def params_fingerprint(params: ModelParams) -> str:
    blob = json.dumps([params.weights, params.bias], sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def dataset_fingerprint(records: Sequence[DatasetRecord]) -> str:
    h = hashlib.sha256()
    for r in records:
        labels = sorted(r.key_segment_labels) if r.key_segment_labels is not None else None
        h.update(json.dumps([r.id, r.document.text, labels]).encode())
    return h.hexdigest()[:16]


def labeled_examples(
    records: Sequence[DatasetRecord], pipeline: FeaturePipeline
) -> list[tuple[str, np.ndarray, np.ndarray]]:
    """Per-document (id, feature matrix, 0/1 labels) for records that carry labels."""
    out = []
    for r in records:
        if r.key_segment_labels is None:
            continue
        doc = build_document(r.document)
        X = pipeline.matrix(doc)
        y = np.zeros(len(doc.sentences))
        y[sorted(r.key_segment_labels)] = 1.0
        out.append((r.id, X, y))
    return out


def _split(doc_ids: list[str], cfg: TrainConfig, rng: np.random.Generator) -> tuple[list[int], list[int]]:
    n = len(doc_ids)
    order = [int(i) for i in rng.permutation(n)]
    n_val = min(max(1, round(cfg.validation_fraction * n)), n - 1) if n >= 2 else 0
    return sorted(order[n_val:]), sorted(order[:n_val])


def train(
    records: Sequence[DatasetRecord],
    pipeline: FeaturePipeline,
    cfg: TrainConfig = TrainConfig(),
) -> tuple[ModelParams, TrainReport]:
    """Fit the supervised scorer; returns the parameters of the best validation epoch.

    With a single labeled document no document-level split is possible and the
    training set doubles as the validation set.
    """
    examples = labeled_examples(records, pipeline)
    total = sum(len(y) for _, _, y in examples)
    if total < 2:
        raise TooFewExamples(f"need at least 2 labeled sentences, got {total}")

    rng = np.random.default_rng(cfg.seed)
    train_idx, val_idx = _split([e[0] for e in examples], cfg, rng)
    if not val_idx:
        logger.warning("only one labeled document; validating on the training set")
        val_idx = train_idx

    X = np.vstack([examples[i][1] for i in train_idx])
    y = np.concatenate([examples[i][2] for i in train_idx])
    Xv = np.vstack([examples[i][1] for i in val_idx])
    yv = np.concatenate([examples[i][2] for i in val_idx])
    if len(y) < 2:
        raise TooFewExamples("training split has fewer than 2 sentences")
    if y.min() == y.max():
        raise SingleClassData("training split contains a single class")

    w = np.zeros(X.shape[1])
    b = 0.0
    report = TrainReport(
        train_docs=[examples[i][0] for i in train_idx],
        val_docs=[examples[i][0] for i in val_idx],
    )
    report.train_losses.append(_loss(w, b, X, y, cfg.l2))
    report.val_losses.append(_loss(w, b, Xv, yv, cfg.l2))
    stopper = EarlyStopping(cfg.patience)
    stopper.update(0, report.val_losses[0])
    best_w, best_b = w.copy(), b

    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(y))
        for start in range(0, len(y), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            gw, gb = _gradient(w, b, X[batch], y[batch], cfg.l2)
            w = w - cfg.learning_rate * gw
            b = b - cfg.learning_rate * gb
        report.train_losses.append(_loss(w, b, X, y, cfg.l2))
        val = _loss(w, b, Xv, yv, cfg.l2)
        report.val_losses.append(val)
        logger.debug("epoch %d train=%.6f val=%.6f", epoch, report.train_losses[-1], val)
        stop = stopper.update(epoch, val)
        if stopper.best_epoch == epoch:
            best_w, best_b = w.copy(), b
        if stop:
            break

    params = ModelParams(tuple(best_w.tolist()), best_b, trained_on=dataset_fingerprint(records))
    report.stopped_epoch = epoch
    report.best_epoch = stopper.best_epoch
    report.params_fingerprint = params_fingerprint(params)
    return params, report
