#!/usr/bin/env python3
"""Seed a data directory with demo catalogs and reviews, ready to serve.

    python3 scripts/seed_demo_store.py [data_dir]   # default ./demo-data
    DATA_DIR=demo-data BACKEND=template SEED=7 reviewkit serve

With the directory in place the browser composer (frontend/) has catalog
topics for Perfumes, Camera Straps, Garbage Bags, Ruffled Tops and
Stuffed Toys & Animals, plus a small ingested review corpus.
"""

from __future__ import annotations

import sys
from pathlib import Path

from reviewkit.catalog import ReviewStore

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"


def main() -> None:
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("demo-data")
    store = ReviewStore(data_dir=target, coverage_threshold=5)
    for corpus in ("reviews_small.jsonl", "mining_corpus.jsonl"):
        lines = (FIXTURES / "reviews" / corpus).read_text("utf-8").splitlines()
        summary = store.ingest_reviews(lines)
        print(f"{corpus}: accepted {summary.accepted}, rejected {summary.rejected}")
    store.rebuild_catalog()
    store.load_catalog_snapshot(FIXTURES / "catalog" / "catalog_snapshot.jsonl")
    entries = sorted(store.catalog.entries)
    print(f"catalog entries: {', '.join(entries)}")
    print(f"store ready under {target}/")


if __name__ == "__main__":
    main()
