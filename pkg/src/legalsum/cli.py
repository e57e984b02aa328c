"""``legalsum`` command-line interface.

Exit codes: 0 success, 1 fatal configuration or data error, 2 partial failure
(some documents failed; their errors are listed on stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence, TextIO

from . import __version__
from .baseline import BaselineClient
from .config import CliConfig, find_config, merge, read_config_file
from .corpus import CleanDocument, DatasetRecord, build_document, load_dataset
from .errors import LegalSumError, MissingModel, ModelFormatError
from .evaluation import Method, benchmark_run
from .features import FeaturePipeline, IdfTable, build_idf
from .scoring import ExtractionConfig, ModelParams, load_model, save_model, score_features, threshold_filter
from .summarizer import select_sentences
from .training import train

logger = logging.getLogger("legalsum")

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Usage errors (including unknown flags) exit with the fatal code 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_FATAL, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file (default: $LEGALSUM_CONFIG or ./legalsum.toml)")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr (-v info, -vv debug)")
    p.add_argument("--input-format", choices=("jsonl", "text-dir"), help="input format (default: inferred from path)")
    p.add_argument("--lexicon", help="legal term list, one lowercase term per line")
    p.add_argument("--cues", help="cue-phrase list, same format as --lexicon")
    p.add_argument("--output", "-o", help="write data to this file instead of stdout")


def _scoring_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", help="trained model JSON (needed for supervised and hybrid scorers)")
    p.add_argument("--scorer", choices=("rule", "supervised", "hybrid"))
    p.add_argument("--threshold", type=float, help="relevance threshold in [0, 1]")
    p.add_argument("--alpha", type=float, help="hybrid weight on the supervised score, in [0, 1]")
    p.add_argument("--jobs", type=int, help="document-level parallelism (default: CPU count)")


def _budget_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k", type=int, help="number of sentences per summary (default 3)")
    g.add_argument("--max-tokens", type=int, help="token budget per summary instead of --k")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="legalsum", description="Extractive legal-document summarization and evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="clean and segment documents, emit JSONL")
    p.add_argument("input")
    _common(p)

    p = sub.add_parser("train", help="train the supervised scorer on labeled JSONL")
    p.add_argument("dataset")
    p.add_argument("--model-out", required=True, help="where to write the model JSON")
    p.add_argument("--report-out", help="where to write the training report JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--epochs", type=int, dest="max_epochs")
    p.add_argument("--patience", type=int)
    p.add_argument("--validation-fraction", type=float)
    p.add_argument("--l2", type=float)
    _common(p)

    p = sub.add_parser("summarize", help="write one extractive summary per document")
    p.add_argument("input")
    _scoring_flags(p)
    _budget_flags(p)
    p.add_argument("--prefilter", action=argparse.BooleanOptionalAction, default=None,
                   help="select only among sentences scoring at least the threshold")
    p.add_argument("--format", choices=("json", "text"))
    _common(p)

    p = sub.add_parser("extract", help="emit key-segment indices (score >= threshold) per document")
    p.add_argument("input")
    _scoring_flags(p)
    _common(p)

    for name, help_ in (
        ("evaluate", "score one configuration (or precomputed candidates) against a dataset"),
        ("benchmark", "compare rule, supervised, hybrid and optional remote baseline"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("dataset")
        _scoring_flags(p)
        _budget_flags(p)
        p.add_argument("--format", choices=("table", "json", "csv"))
        if name == "evaluate":
            p.add_argument("--candidates", help="JSONL of {id, text} summaries to score instead of running a scorer")
        else:
            p.add_argument("--remote", action="store_true", help="add the chat-completions baseline row ([llm] config)")
        _common(p)
    return parser


# --- helpers -----------------------------------------------------------------


def _flag_layer(args: argparse.Namespace) -> dict[str, dict[str, Any]]:
    get = lambda name: getattr(args, name, None)  # noqa: E731
    layer = {
        "extraction": {"threshold": get("threshold"), "scorer": get("scorer"), "alpha": get("alpha")},
        "training": {
            "learning_rate": get("learning_rate"),
            "batch_size": get("batch_size"),
            "max_epochs": get("max_epochs"),
            "patience": get("patience"),
            "validation_fraction": get("validation_fraction"),
            "seed": get("seed"),
            "l2": get("l2"),
        },
        "summary": {"k": get("k"), "max_tokens": get("max_tokens"), "prefilter": get("prefilter")},
        "features": {"lexicon": get("lexicon"), "cues": get("cues")},
        "output": {"format": get("format"), "jobs": get("jobs")},
    }
    return layer


def load_cli_config(args: argparse.Namespace) -> CliConfig:
    path = find_config(args.config)
    file_layer = read_config_file(path) if path is not None else {}
    merged = merge(file_layer, _flag_layer(args))
    if getattr(args, "k", None) is not None:
        merged["summary"]["max_tokens"] = None
    cfg = CliConfig.from_layers(merged)
    return cfg


def _model_and_idf(path: str | None) -> tuple[ModelParams | None, IdfTable | None]:
    if not path:
        return None, None
    params = load_model(path)
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    idf = IdfTable.from_dict(data["idf"]) if isinstance(data.get("idf"), dict) else None
    return params, idf


def _build_docs(records: Sequence[DatasetRecord]) -> tuple[list[CleanDocument], dict[str, str]]:
    docs, errors = [], {}
    for record in records:
        try:
            docs.append(build_document(record.document))
        except LegalSumError as exc:
            errors[record.id] = f"{type(exc).__name__}: {exc}"
    return docs, errors


def _parallel(fn: Callable[[CleanDocument], Any], docs: Sequence[CleanDocument], jobs: int) -> list[Any]:
    def safe(doc: CleanDocument) -> Any:
        try:
            return fn(doc)
        except LegalSumError as exc:
            return exc

    if jobs > 1 and len(docs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(safe, docs))
    return [safe(d) for d in docs]


def _report_errors(errors: dict[str, str]) -> int:
    for doc_id, message in sorted(errors.items()):
        print(f"error: {doc_id}: {message}", file=sys.stderr)
    return EXIT_PARTIAL if errors else EXIT_OK


def _open_out(args: argparse.Namespace) -> TextIO:
    if args.output:
        return open(args.output, "w", encoding="utf-8", newline="\n")
    return sys.stdout


def _write(args: argparse.Namespace, text: str) -> None:
    out = _open_out(args)
    try:
        out.write(text)
        out.flush()
    finally:
        if out is not sys.stdout:
            out.close()


def _jsonl(objs: Iterable[dict]) -> str:
    return "".join(json.dumps(o, ensure_ascii=False, sort_keys=True) + "\n" for o in objs)


def _require_model(cfg: CliConfig, params: ModelParams | None) -> None:
    if cfg.extraction.scorer_kind != "rule" and params is None:
        raise MissingModel(f"--scorer {cfg.extraction.scorer_kind} requires --model")


# --- commands ----------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, cfg: CliConfig) -> int:
    records = load_dataset(args.input, args.input_format)
    docs, errors = _build_docs(records)
    out = [
        {"id": d.id, "token_count": d.token_count, "sentences": [s.raw for s in d.sentences]}
        for d in sorted(docs, key=lambda d: d.id)
    ]
    _write(args, _jsonl(out))
    return _report_errors(errors)


def cmd_train(args: argparse.Namespace, cfg: CliConfig) -> int:
    records = load_dataset(args.dataset, args.input_format)
    labeled = [r for r in records if r.key_segment_labels is not None]
    docs, errors = _build_docs(labeled)
    idf = build_idf(docs)
    pipeline = FeaturePipeline(idf, cfg.lexicon, cfg.cues)
    params, report = train([r for r in labeled if r.id not in errors], pipeline, cfg.training)
    save_model(
        params,
        args.model_out,
        idf=idf.to_dict(),
        lexicon={"name": cfg.lexicon.name, "version": cfg.lexicon.version},
        cues={"name": cfg.cues.name, "version": cfg.cues.version},
    )
    if args.report_out:
        Path(args.report_out).write_text(json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8")
    _write(args, report.format_table() + "\n")
    return _report_errors(errors)


def _prepare_scoring(args: argparse.Namespace, cfg: CliConfig, path: str):
    params, model_idf = _model_and_idf(args.model)
    _require_model(cfg, params)
    records = load_dataset(path, args.input_format)
    docs, errors = _build_docs(records)
    idf = model_idf
    if idf is None:
        if not docs:
            return params, None, docs, errors
        idf = build_idf(docs)
    return params, FeaturePipeline(idf, cfg.lexicon, cfg.cues), docs, errors


def cmd_summarize(args: argparse.Namespace, cfg: CliConfig) -> int:
    params, pipeline, docs, errors = _prepare_scoring(args, cfg, args.input)
    threshold = cfg.extraction.threshold if cfg.prefilter else None

    def run(doc: CleanDocument):
        scores = score_features(pipeline.document_features(doc), cfg.extraction, params)
        return select_sentences(doc, scores, cfg.budget, threshold)

    results = _parallel(run, docs, cfg.jobs)
    summaries = []
    for doc, res in zip(docs, results):
        if isinstance(res, Exception):
            errors[doc.id] = f"{type(res).__name__}: {res}"
        else:
            summaries.append(res)
    summaries.sort(key=lambda s: s.doc_id)
    if cfg.output_format == "text":
        text = "".join(f"## {s.doc_id}\n{s.text}\n\n" for s in summaries)
    else:
        text = _jsonl(s.to_dict() for s in summaries)
    _write(args, text)
    return _report_errors(errors)


def cmd_extract(args: argparse.Namespace, cfg: CliConfig) -> int:
    params, pipeline, docs, errors = _prepare_scoring(args, cfg, args.input)

    def run(doc: CleanDocument):
        scores = score_features(pipeline.document_features(doc), cfg.extraction, params)
        return {
            "doc_id": doc.id,
            "indices": sorted(threshold_filter(scores, cfg.extraction.threshold)),
            "scores": [s.score for s in scores],
            "scorer": cfg.extraction.scorer_kind,
            "threshold": cfg.extraction.threshold,
        }

    results = _parallel(run, docs, cfg.jobs)
    rows = []
    for doc, res in zip(docs, results):
        if isinstance(res, Exception):
            errors[doc.id] = f"{type(res).__name__}: {res}"
        else:
            rows.append(res)
    _write(args, _jsonl(sorted(rows, key=lambda r: r["doc_id"])))
    return _report_errors(errors)


def _load_candidates(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                out[str(obj["id"])] = str(obj["text"])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise LegalSumError(f"{path}: line {lineno}: invalid candidate ({exc})") from None
    return out


def cmd_evaluate(args: argparse.Namespace, cfg: CliConfig) -> int:
    records = load_dataset(args.dataset, args.input_format)
    if args.candidates:
        candidates = _load_candidates(args.candidates)

        def lookup(doc: CleanDocument) -> str:
            if doc.id not in candidates:
                raise LegalSumError(f"no candidate summary for {doc.id!r}")
            return candidates[doc.id]

        methods = [Method("candidates", generate=lookup)]
        params, model_idf = None, None
    else:
        params, model_idf = _model_and_idf(args.model)
        _require_model(cfg, params)
        methods = [Method(cfg.extraction.scorer_kind, cfg.extraction, params)]
    pipeline = FeaturePipeline(model_idf, cfg.lexicon, cfg.cues) if model_idf is not None else None
    if pipeline is None:
        docs, _ = _build_docs([r for r in records if r.reference_summary is not None or r.key_segment_labels is not None])
        pipeline = FeaturePipeline(build_idf(docs), cfg.lexicon, cfg.cues) if docs else None
    table = benchmark_run(records, methods, cfg.budget, pipeline, jobs=cfg.jobs)
    _write(args, table.render(args.format or "table"))
    return _report_errors(table.errors)


def cmd_benchmark(args: argparse.Namespace, cfg: CliConfig) -> int:
    records = load_dataset(args.dataset, args.input_format)
    params, model_idf = _model_and_idf(args.model)
    ex = cfg.extraction
    methods = [Method("rule", ExtractionConfig(ex.threshold, "rule", ex.hybrid_alpha))]
    if params is not None:
        methods.append(Method("supervised", ExtractionConfig(ex.threshold, "supervised", ex.hybrid_alpha), params))
        methods.append(Method("hybrid", ExtractionConfig(ex.threshold, "hybrid", ex.hybrid_alpha), params))
    client = None
    if args.remote:
        if cfg.llm is None:
            raise LegalSumError("--remote needs [llm] endpoint_url and model_name in the config")
        client = BaselineClient(cfg.llm)
        methods.append(Method(f"remote:{cfg.llm.model_name}", generate=lambda doc: client.summarize(doc).text))
    docs, _ = _build_docs([r for r in records if r.reference_summary is not None or r.key_segment_labels is not None])
    idf = model_idf if model_idf is not None else (build_idf(docs) if docs else None)
    pipeline = FeaturePipeline(idf, cfg.lexicon, cfg.cues) if idf is not None else None
    try:
        table = benchmark_run(records, methods, cfg.budget, pipeline, jobs=cfg.jobs)
    finally:
        if client is not None:
            client.close()
    _write(args, table.render(args.format or "table"))
    return _report_errors(table.errors)


COMMANDS = {
    "ingest": cmd_ingest,
    "train": cmd_train,
    "summarize": cmd_summarize,
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True)
    try:
        cfg = load_cli_config(args)
        return COMMANDS[args.command](args, cfg)
    except (LegalSumError, ModelFormatError, OSError) as exc:
        print(f"legalsum: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
