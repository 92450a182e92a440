from __future__ import annotations

from pathlib import Path

import pytest

from reviewkit.catalog import ReviewStore

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture
def small_store() -> ReviewStore:
    """In-memory store loaded with the 12-review fixture (7 + 5 per PT)."""
    store = ReviewStore(coverage_threshold=5)
    lines = (FIXTURES / "reviews" / "reviews_small.jsonl").read_text("utf-8").splitlines()
    store.ingest_reviews(lines)
    return store


@pytest.fixture
def mining_store() -> ReviewStore:
    store = ReviewStore(coverage_threshold=10)
    lines = (FIXTURES / "reviews" / "mining_corpus.jsonl").read_text("utf-8").splitlines()
    store.ingest_reviews(lines)
    return store


@pytest.fixture
def catalog_store() -> ReviewStore:
    """Store with the bundled-style catalog snapshot (Garbage Bags et al.)."""
    store = ReviewStore(coverage_threshold=5)
    store.load_catalog_snapshot(FIXTURES / "catalog" / "catalog_snapshot.jsonl")
    return store
