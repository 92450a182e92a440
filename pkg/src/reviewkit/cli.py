"""Command-line interface for ingestion, lookups, suggestion, evaluation,
fine-tune export, and serving."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import catalog as cat, evaluation, generation, similarity
from .config import ServiceConfig
from .errors import ReviewKitError
from .sentiment import default_lexicon
from .service import ServiceContext, serve


def _print(payload, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    else:
        print(payload if isinstance(payload, str) else json.dumps(payload, indent=2, default=str))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reviewkit", description=__doc__)
    parser.add_argument("--data-dir", type=Path, default=None, help="persistent store directory")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="ingest a JSON Lines review corpus")
    p.add_argument("path", type=Path)
    p.add_argument("--rebuild", action="store_true", help="rebuild mined catalog after ingest")
    p.add_argument("--threshold", type=int, default=None, help="review-coverage threshold")

    p = sub.add_parser("topics", help="look up topics for a product type")
    p.add_argument("product_type")
    p.add_argument("--fallback", action="store_true")
    p.add_argument("--backend", choices=("template", "http"), default="template")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("similar", help="rank similar product types")
    p.add_argument("product_type")
    p.add_argument("--method", choices=("levenshtein", "cosine", "llm"), default="cosine")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--backend", choices=("template", "http"), default="template")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("suggest", help="generate rated phrase suggestions")
    p.add_argument("product_type")
    p.add_argument("--product-name", default=None)
    p.add_argument("--rate", action="append", default=[], metavar="topic=stars")
    p.add_argument("--backend", choices=("template", "http"), default="template")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("coverage", help="review-coverage report")
    p.add_argument("--threshold", type=int, default=None)

    p = sub.add_parser("eval-bleu", help="score candidate/reference corpora")
    p.add_argument("--input", action="append", required=True, metavar="label=path")
    p.add_argument("--no-eligibility", action="store_true", help="disable the equal-length filter")
    p.add_argument("--smoothing", action="store_true")

    p = sub.add_parser("eval-topics", help="topic-suggestion accuracy report")
    p.add_argument("--gold", type=Path, required=True, help="JSONL {product_type, topics}")
    p.add_argument("--suggested", type=Path, required=True, help="JSONL {product_type, topics}")
    p.add_argument("--judged", type=Path, default=None, help="JSONL {product_type, topic, relevant}")
    p.add_argument("--label", default="")

    p = sub.add_parser("eval-similarity", help="similar-PT detection accuracy report")
    p.add_argument("--gold", type=Path, required=True)
    p.add_argument("--pred", action="append", required=True, metavar="label=path")
    p.add_argument("--k", type=int, default=10)

    p = sub.add_parser("export-finetune", help="export (instruction, context, response) records")
    p.add_argument("--reviews", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--port", type=int, default=None)

    return parser


def _make_context(args, backend: str = "template", seed: int = 0) -> ServiceContext:
    config = ServiceConfig.from_env()
    config.data_dir = args.data_dir
    config.backend = getattr(args, "backend", backend)
    config.seed = getattr(args, "seed", seed)
    config.__post_init__()
    return ServiceContext(config)


def _labeled_paths(specs: list[str]) -> list[tuple[str, Path]]:
    out = []
    for spec in specs:
        label, _, path = spec.partition("=")
        if not path:
            label, path = Path(spec).stem, spec
        out.append((label, Path(path)))
    return out


def cmd_ingest(args) -> int:
    store = cat.ReviewStore(data_dir=args.data_dir)
    with args.path.open(encoding="utf-8") as handle:
        summary = store.ingest_reviews(handle)
    if args.rebuild:
        store.rebuild_catalog(threshold=args.threshold)
    _print(summary.to_dict(), args.format)
    return 0


def cmd_topics(args) -> int:
    ctx = _make_context(args)
    result = ctx.topics_for(args.product_type, allow_fallback=args.fallback)
    payload = {
        "product_type": args.product_type,
        "provenance": result.provenance,
        "topics": [t.to_dict() for t in result.topics],
    }
    if args.format == "json":
        _print(payload, "json")
    else:
        print(f"{args.product_type} (provenance: {result.provenance})")
        for t in result.topics:
            print(f"  {t.label}  (support {t.support}, {t.source})")
    return 0


def cmd_similar(args) -> int:
    ctx = _make_context(args)
    ranked = ctx.similar(args.product_type, args.method, args.k)
    payload = [{"product_type": info.id, "score": round(score, 4)} for info, score in ranked]
    if args.format == "json":
        _print(payload, "json")
    else:
        for row in payload:
            print(f"{row['score']:.4f}  {row['product_type']}")
    return 0


def cmd_suggest(args) -> int:
    ratings = []
    for spec in args.rate:
        topic, _, stars = spec.rpartition("=")
        if not topic:
            print(f"bad --rate value: {spec!r} (expected topic=stars)", file=sys.stderr)
            return 2
        ratings.append(generation.TopicRating(topic=topic, stars=int(stars)))
    if not ratings:
        print("at least one --rate topic=stars is required", file=sys.stderr)
        return 2
    if args.backend == "http":
        config = ServiceConfig.from_env()
        backend = generation.HttpBackend(url=config.llm_url, api_key=config.api_key())
    else:
        backend = generation.TemplateBackend(seed=args.seed)
    suggestions = generation.suggest(
        product_type=args.product_type,
        product_name=args.product_name,
        ratings=ratings,
        backend=backend,
        lexicon=default_lexicon(),
    )
    if args.format == "json":
        _print([s.to_dict() for s in suggestions], "json")
    else:
        for s in suggestions:
            flags = f"  [{', '.join(sorted(f.value for f in s.flags))}]" if s.flags else ""
            print(f"{s.topic}: {s.text}{flags}")
            if s.sentiment:
                print(f"    sentiment {s.sentiment.compound:.2f} -> {s.sentiment.stars} stars")
    return 0


def cmd_coverage(args) -> int:
    store = cat.ReviewStore(data_dir=args.data_dir)
    report = store.coverage_report(threshold=args.threshold)
    if args.format == "json":
        _print(report.to_dict(), "json")
    else:
        print(report.render())
    return 0


def cmd_eval_bleu(args) -> int:
    columns = []
    for label, path in _labeled_paths(args.input):
        pairs = evaluation.load_bleu_records(path.read_text("utf-8").splitlines())
        report = evaluation.corpus_bleu(
            pairs, eligibility=not args.no_eligibility, smoothing=args.smoothing
        )
        columns.append((label, report))
    if args.format == "json":
        _print({label: report.to_dict() for label, report in columns}, "json")
    else:
        print(evaluation.render_bleu_table(columns))
        for label, report in columns:
            print(f"{label}: {report.eligible_count}/{report.total_count} pairs eligible")
    return 0


def _load_topic_map(path: Path) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for line in path.read_text("utf-8").splitlines():
        if line.strip():
            rec = json.loads(line)
            out[rec["product_type"]] = list(rec["topics"])
    return out


def cmd_eval_topics(args) -> int:
    gold = _load_topic_map(args.gold)
    suggested = _load_topic_map(args.suggested)
    judge = None
    if args.judged:
        verdicts: dict[tuple[str, str], bool] = {}
        for line in args.judged.read_text("utf-8").splitlines():
            if line.strip():
                rec = json.loads(line)
                verdicts[(rec["product_type"], rec["topic"].lower())] = bool(rec["relevant"])
        judge = lambda pt, topic: verdicts.get((pt, topic))
    report = evaluation.topic_accuracy(gold, suggested, judge=judge, label=args.label)
    if args.format == "json":
        _print(report.row(), "json")
    else:
        print(evaluation.render_topic_accuracy_table([report]))
    return 0


def cmd_eval_similarity(args) -> int:
    gold = similarity.load_gold_file(args.gold)
    reports = []
    for label, path in _labeled_paths(args.pred):
        predicted = similarity.load_prediction_file(path)
        reports.append(
            similarity.evaluate_similarity_methods(gold, predicted, k=args.k, method=label)
        )
    if args.format == "json":
        _print([r.row() for r in reports], "json")
    else:
        print(similarity.render_similarity_table(reports))
    return 0


def cmd_export_finetune(args) -> int:
    records = []
    for line in args.reviews.read_text("utf-8").splitlines():
        if line.strip():
            records.append(json.loads(line))
    summary = generation.write_finetune_records(records, args.out)
    payload = {
        "exported": summary.exported,
        "skipped": summary.skipped,
        "diagnostics": summary.diagnostics,
        "notes": summary.low_coverage_notes(),
    }
    if args.format == "json":
        _print(payload, "json")
    else:
        print(f"exported {summary.exported} records to {args.out} ({summary.skipped} skipped)")
        for note in payload["notes"]:
            print(f"note: {note}")
    return 0


def cmd_serve(args) -> int:
    config = ServiceConfig.from_env()
    if args.data_dir is not None:
        config.data_dir = args.data_dir
    if args.port is not None:
        config.port = args.port
    serve(config)
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "topics": cmd_topics,
    "similar": cmd_similar,
    "suggest": cmd_suggest,
    "coverage": cmd_coverage,
    "eval-bleu": cmd_eval_bleu,
    "eval-topics": cmd_eval_topics,
    "eval-similarity": cmd_eval_similarity,
    "export-finetune": cmd_export_finetune,
    "serve": cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _COMMANDS[args.command](args)
    except (ReviewKitError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
