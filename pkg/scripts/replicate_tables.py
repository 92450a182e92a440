#!/usr/bin/env python3
"""Render every report the engine produces, from the committed fixtures.

Covers: similar-product-type detection accuracy, the per-product-type topic
catalog, cumulative BLEU columns, topic-suggestion accuracy, review-coverage,
and the three case-study compose sessions run end to end on the offline
template backend. Run from the repo root:

    python3 scripts/replicate_tables.py
"""

from __future__ import annotations

import json
from pathlib import Path

from reviewkit.catalog import ReviewStore, topics_for
from reviewkit.evaluation import (
    case_study_rows,
    corpus_bleu,
    load_bleu_records,
    render_bleu_table,
    render_case_study_table,
    render_topic_accuracy_table,
    topic_accuracy,
)
from reviewkit.generation import TemplateBackend, TopicRating, suggest
from reviewkit.sentiment import default_lexicon
from reviewkit.session import SessionStore
from reviewkit.similarity import (
    evaluate_similarity_methods,
    load_gold_file,
    load_prediction_file,
    render_similarity_table,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"
SEED = 7


def banner(title: str) -> None:
    print()
    print(f"== {title} " + "=" * max(0, 60 - len(title)))
    print()


def similarity_table() -> None:
    banner("Similar product type detection accuracy")
    gold = load_gold_file(FIXTURES / "similarity" / "gold.jsonl")
    reports = []
    for method in ("levenshtein", "cosine", "llm"):
        predicted = load_prediction_file(FIXTURES / "similarity" / f"pred_{method}.jsonl")
        reports.append(evaluate_similarity_methods(gold, predicted, k=10, method=method))
    print(render_similarity_table(reports))
    print()
    print("note: 318/410 is exactly 77.561%; the one-decimal render shows 77.6%.")


def catalog_table() -> None:
    banner("Top-10 topics per product type (catalog snapshot)")
    store = ReviewStore(coverage_threshold=5)
    store.load_catalog_snapshot(FIXTURES / "catalog" / "catalog_snapshot.jsonl")
    for pt in ("Garbage Bags", "Perfumes", "Stuffed Toys & Animals"):
        result = topics_for(store, pt)
        labels = ", ".join(t.label for t in result.topics)
        print(f"{pt:24s} {labels}")


def bleu_table() -> None:
    banner("Average cumulative BLEU per method column")
    columns = []
    for label in ("strong", "medium", "weak"):
        lines = (FIXTURES / "bleu" / f"corpus_{label}.jsonl").read_text("utf-8").splitlines()
        columns.append((label, corpus_bleu(load_bleu_records(lines))))
    print(render_bleu_table(columns))
    strong = columns[0][1]
    print()
    print(
        f"eligibility: {strong.eligible_count}/{strong.total_count} pairs "
        f"({strong.eligible_count / strong.total_count:.0%}) share a reference token count"
    )


def topic_table() -> None:
    banner("Topic suggestion accuracy")

    def load_map(path):
        out = {}
        for line in path.read_text("utf-8").splitlines():
            rec = json.loads(line)
            out[rec["product_type"]] = rec["topics"]
        return out

    def load_judge(path):
        verdicts = {}
        for line in path.read_text("utf-8").splitlines():
            rec = json.loads(line)
            verdicts[(rec["product_type"], rec["topic"].lower())] = rec["relevant"]
        return lambda pt, t: verdicts.get((pt, t))

    rows = []
    for label, kind in (("Available", "available"), ("Not Available", "not_available")):
        rows.append(
            topic_accuracy(
                load_map(FIXTURES / "topics" / f"gold_{kind}.jsonl"),
                load_map(FIXTURES / "topics" / f"suggested_{kind}.jsonl"),
                judge=load_judge(FIXTURES / "topics" / f"judged_{kind}.jsonl"),
                label=label,
            )
        )
    print(render_topic_accuracy_table(rows))


def coverage_report() -> None:
    banner("Review coverage")
    store = ReviewStore(coverage_threshold=6)
    lines = (FIXTURES / "reviews" / "reviews_small.jsonl").read_text("utf-8").splitlines()
    store.ingest_reviews(lines)
    print(store.coverage_report().render())


def case_studies() -> None:
    banner("Case studies (template backend, seed 7)")
    lexicon = default_lexicon()
    backend = TemplateBackend(seed=SEED)
    store = ReviewStore(coverage_threshold=5)
    store.load_catalog_snapshot(FIXTURES / "catalog" / "catalog_snapshot.jsonl")

    def lookup(pt):
        result = topics_for(store, pt)
        return result.topics, result.provenance

    def suggester(session):
        return suggest(
            session.product_type_id,
            session.product_name,
            session.ratings,
            backend,
            lexicon,
        )

    sessions = SessionStore(topics_lookup=lookup, suggester=suggester, lexicon=lexicon)
    specs = [
        ("Perfumes", [("smell", 1), ("price", 2), ("warm", 2), ("long lasting", 1)],
         "The smell faded within the hour and the price felt excessive. Disappointing overall."),
        ("Stuffed Toys & Animals", [("size", 4), ("softness", 4), ("quality", 5), ("carry", 5)],
         "The size is perfect and the softness is wonderful. Excellent quality and easy to carry."),
        ("Ruffled Tops", [("size", 2), ("fit", 3), ("appearance", 3), ("color", 2)],
         "The fit is acceptable but the color looks faded. The size runs small."),
    ]
    finalized = []
    for pt, ratings, draft in specs:
        session = sessions.create_session(pt)
        sessions.rate_topics(session.id, [TopicRating(t, s) for t, s in ratings])
        sessions.suggest_phrases(session.id)
        sessions.update_draft(session.id, draft)
        sessions.finalize(session.id)
        finalized.append(session)
    print(render_case_study_table(case_study_rows(finalized)))


def main() -> None:
    similarity_table()
    catalog_table()
    bleu_table()
    topic_table()
    coverage_report()
    case_studies()


if __name__ == "__main__":
    main()
