"""Summary and detection metrics, efficiency figures, and the benchmark harness."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

from .corpus import CleanDocument, DatasetRecord, build_document, clean, tokenize
from .errors import (
    EmptyDocument,
    EmptyReference,
    IndexOutOfRange,
    LegalSumError,
    NoEvaluableRecords,
    NonPositiveManualTime,
    NoTokens,
    ZeroBaseline,
)
from .features import FeaturePipeline, build_idf
from .scoring import ExtractionConfig, ModelParams, score_features, threshold_filter
from .summarizer import SummaryBudget, select_sentences

logger = logging.getLogger(__name__)


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float


def harmonic_mean(p: float, r: float) -> float:
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def _prf(match: int, cand_total: int, ref_total: int) -> PRF:
    p = match / cand_total if cand_total else 0.0
    r = match / ref_total if ref_total else 0.0
    return PRF(p, r, harmonic_mean(p, r))


def _ngrams(tokens: Sequence[str], n: int) -> Counter[tuple[str, ...]]:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 1) -> PRF:
    """Clipped n-gram overlap between two token sequences."""
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    if not reference:
        raise EmptyReference("reference has no tokens")
    cand, ref = _ngrams(candidate, n), _ngrams(reference, n)
    match = sum(min(c, ref[g]) for g, c in cand.items() if g in ref)
    return _prf(match, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> PRF:
    if not reference:
        raise EmptyReference("reference has no tokens")
    return _prf(lcs_length(candidate, reference), len(candidate), len(reference))


@dataclass(frozen=True)
class RougeReport:
    rouge1: PRF
    rouge2: PRF
    rougeL: PRF

    def to_dict(self) -> dict:
        return {k: v._asdict() for k, v in (("rouge1", self.rouge1), ("rouge2", self.rouge2), ("rougeL", self.rougeL))}


def rouge_report(candidate: Sequence[str], reference: Sequence[str]) -> RougeReport:
    return RougeReport(rouge_n(candidate, reference, 1), rouge_n(candidate, reference, 2), rouge_l(candidate, reference))


def text_tokens(text: str) -> list[str]:
    """Tokens of free text as used for ROUGE; empty text yields no tokens."""
    try:
        return tokenize(clean(text))
    except (EmptyDocument, NoTokens):
        return []


@dataclass(frozen=True)
class DetectionReport:
    precision: float
    recall: float
    f1: float
    processing_time_s: float
    true_pos: int
    false_pos: int
    false_neg: int


def detection_report(
    predicted: Iterable[int],
    gold: Iterable[int],
    elapsed_s: float = 0.0,
    n_sentences: int | None = None,
) -> DetectionReport:
    pred, ref = frozenset(predicted), frozenset(gold)
    if n_sentences is not None:
        bad = sorted(i for i in pred | ref if not 0 <= i < n_sentences)
        if bad:
            raise IndexOutOfRange(f"indices {bad} outside 0..{n_sentences - 1}")
    tp = len(pred & ref)
    fp = len(pred - ref)
    fn = len(ref - pred)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return DetectionReport(p, r, harmonic_mean(p, r), max(0.0, elapsed_s), tp, fp, fn)


@dataclass(frozen=True)
class EfficiencyReport:
    t_manual: float
    t_automated: float
    gain_percent: float


def efficiency_gain(t_manual: float, t_automated: float) -> EfficiencyReport:
    """Percentage of manual review time saved by automation."""
    if not t_manual > 0:
        raise NonPositiveManualTime(f"manual time must be > 0, got {t_manual}")
    if t_automated < 0:
        raise ValueError(f"automated time must be >= 0, got {t_automated}")
    return EfficiencyReport(t_manual, t_automated, (t_manual - t_automated) / t_manual * 100.0)


def percent_change(before: float, after: float) -> float:
    if before == 0:
        raise ZeroBaseline("percent change from a zero baseline is undefined")
    return (after - before) / abs(before) * 100.0


# --- benchmark ---------------------------------------------------------------


@dataclass(frozen=True)
class Method:
    """One row of a benchmark.

    Either an extractive configuration (``extraction`` plus ``params`` for the
    supervised and hybrid scorers) or an external ``generate`` callable that
    maps a cleaned document to summary text.
    """

    name: str
    extraction: ExtractionConfig | None = None
    params: ModelParams | None = None
    generate: Callable[[CleanDocument], str] | None = field(default=None, compare=False)


@dataclass
class _DocResult:
    doc_id: str
    rouge: RougeReport | None
    detection: DetectionReport | None
    length: int
    seconds: float


@dataclass
class BenchmarkRow:
    method: str
    docs: int
    rouge_docs: int
    detection_docs: int
    rouge1: PRF | None
    rouge2: PRF | None
    rougeL: PRF | None
    detection: PRF | None
    mean_length: float
    seconds_per_doc: float

    def to_dict(self) -> dict:
        def prf(v: PRF | None):
            return None if v is None else v._asdict()

        return {
            "method": self.method,
            "docs": self.docs,
            "rouge_docs": self.rouge_docs,
            "detection_docs": self.detection_docs,
            "rouge1": prf(self.rouge1),
            "rouge2": prf(self.rouge2),
            "rougeL": prf(self.rougeL),
            "detection": prf(self.detection),
            "mean_length": self.mean_length,
            "seconds_per_doc": self.seconds_per_doc,
        }


_COLUMNS = (
    "method", "docs",
    "r1_p", "r1_r", "r1_f", "r2_p", "r2_r", "r2_f", "rl_p", "rl_r", "rl_f",
    "det_p", "det_r", "det_f", "avg_len", "sec_per_doc",
)


@dataclass
class BenchmarkTable:
    rows: list[BenchmarkRow]
    errors: dict[str, str] = field(default_factory=dict)

    def _flat(self, row: BenchmarkRow) -> list:
        vals: list = [row.method, row.docs]
        for prf in (row.rouge1, row.rouge2, row.rougeL, row.detection):
            vals.extend([None] * 3 if prf is None else list(prf))
        vals.extend([row.mean_length, row.seconds_per_doc])
        return vals

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows], "errors": dict(sorted(self.errors.items()))}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_COLUMNS)
        for row in self.rows:
            writer.writerow(["" if v is None else v for v in self._flat(row)])
        return buf.getvalue()

    def to_text(self) -> str:
        cells = [list(_COLUMNS)]
        for row in self.rows:
            flat = self._flat(row)
            out = [flat[0], str(flat[1])]
            out.extend("-" if v is None else f"{v:.3f}" for v in flat[2:])
            cells.append(out)
        widths = [max(len(r[i]) for r in cells) for i in range(len(_COLUMNS))]
        lines = []
        for r in cells:
            parts = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
            lines.append("  ".join(parts))
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json() + "\n"
        if fmt == "csv":
            return self.to_csv()
        return self.to_text()


def _mean_prf(items: Sequence[PRF]) -> PRF | None:
    if not items:
        return None
    p = sum(i.precision for i in items) / len(items)
    r = sum(i.recall for i in items) / len(items)
    return PRF(p, r, harmonic_mean(p, r))


def _evaluate_one(
    record: DatasetRecord,
    doc: CleanDocument,
    method: Method,
    pipeline: FeaturePipeline,
    budget: SummaryBudget,
) -> _DocResult:
    detection = None
    if method.generate is not None:
        start = time.perf_counter()
        text = method.generate(doc)
        elapsed = time.perf_counter() - start
        tokens = text_tokens(text)
    else:
        features = pipeline.document_features(doc)
        start = time.perf_counter()
        scores = score_features(features, method.extraction, method.params)
        summary = select_sentences(doc, scores, budget, method.extraction.threshold)
        elapsed = time.perf_counter() - start
        tokens = [t for i in summary.indices for t in doc.sentences[i].tokens]
        if record.key_segment_labels is not None:
            predicted = threshold_filter(scores, method.extraction.threshold)
            detection = detection_report(predicted, record.key_segment_labels, elapsed, len(doc.sentences))
    rouge = None
    if record.reference_summary is not None:
        reference = text_tokens(record.reference_summary)
        if reference:
            rouge = rouge_report(tokens, reference)
    return _DocResult(record.id, rouge, detection, len(tokens), elapsed)


def benchmark_run(
    records: Sequence[DatasetRecord],
    methods: Sequence[Method],
    budget: SummaryBudget = SummaryBudget(),
    pipeline: FeaturePipeline | None = None,
    *,
    jobs: int = 1,
) -> BenchmarkTable:
    """Evaluate each method over ``records`` and aggregate one row per method.

    Precision and recall are macro-averaged over documents; each row's F1 is
    the harmonic mean of its own averaged precision and recall. Documents are
    aggregated in id order, so everything except timing is deterministic.
    """
    errors: dict[str, str] = {}
    docs: list[tuple[DatasetRecord, CleanDocument]] = []
    for record in sorted(records, key=lambda r: r.id):
        if record.reference_summary is None and record.key_segment_labels is None:
            continue
        try:
            docs.append((record, build_document(record.document)))
        except LegalSumError as exc:
            errors[record.id] = f"{type(exc).__name__}: {exc}"
    if not docs:
        raise NoEvaluableRecords("no record carries a reference summary or labels")
    if pipeline is None:
        pipeline = FeaturePipeline(build_idf(d for _, d in docs))

    rows = []
    for method in methods:
        if method.generate is None and method.extraction is None:
            raise ValueError(f"method {method.name!r} has neither an extraction config nor a generator")

        def run(item: tuple[DatasetRecord, CleanDocument]) -> _DocResult | str:
            try:
                return _evaluate_one(item[0], item[1], method, pipeline, budget)
            except LegalSumError as exc:
                return f"{type(exc).__name__}: {exc}"

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(run, docs))
        else:
            results = [run(d) for d in docs]

        ok: list[_DocResult] = []
        for (record, _), res in zip(docs, results):
            if isinstance(res, str):
                errors[f"{method.name}/{record.id}"] = res
            else:
                ok.append(res)
        rouge = [r.rouge for r in ok if r.rouge is not None]
        det = [r.detection for r in ok if r.detection is not None]
        rows.append(
            BenchmarkRow(
                method=method.name,
                docs=len(ok),
                rouge_docs=len(rouge),
                detection_docs=len(det),
                rouge1=_mean_prf([r.rouge1 for r in rouge]),
                rouge2=_mean_prf([r.rouge2 for r in rouge]),
                rougeL=_mean_prf([r.rougeL for r in rouge]),
                detection=_mean_prf([PRF(d.precision, d.recall, d.f1) for d in det]),
                mean_length=sum(r.length for r in ok) / len(ok) if ok else 0.0,
                seconds_per_doc=round(sum(r.seconds for r in ok) / len(ok), 3) if ok else 0.0,
            )
        )
    return BenchmarkTable(rows, errors)
