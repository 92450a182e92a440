"""Review ingestion, frequent-mention mining, and topic catalog serving.

The store keeps an append-only review log plus per-product-type counters.
Catalogs are immutable snapshots rebuilt from the full review multiset, so
re-ingesting the same corpus (duplicates rejected by id) leaves the catalog
bit-identical.
"""

from __future__ import annotations

import json
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .errors import CatalogMiss, NotFound
from .text import content_tokens, default_stopwords, split_sentences

DEFAULT_COVERAGE_THRESHOLD = 250
REVIEW_FIELDS = ("id", "product_type", "product_name", "text", "stars")


@dataclass(frozen=True)
class ProductType:
    id: str
    name: str
    department: str | None = None
    description: str | None = None


@dataclass(frozen=True)
class Review:
    id: str
    product_type_id: str
    text: str
    stars: int
    product_name: str | None = None


@dataclass(frozen=True)
class Topic:
    label: str
    synonyms: tuple[str, ...] = ()
    support: int = 0
    source: str = "mined"  # mined | description | similar_pt | llm

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("topic label must be nonempty")
        if self.support < 0:
            raise ValueError("topic support must be >= 0")
        if self.label in self.synonyms:
            object.__setattr__(self, "synonyms", tuple(s for s in self.synonyms if s != self.label))

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "synonyms": list(self.synonyms),
            "support": self.support,
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, rec: dict) -> "Topic":
        return cls(
            label=rec["label"],
            synonyms=tuple(rec.get("synonyms", ())),
            support=int(rec.get("support", 0)),
            source=rec.get("source", "mined"),
        )


def rank_topics(topics: Iterable[Topic]) -> list[Topic]:
    """Deterministic catalog order: support descending, label ascending."""
    deduped: dict[str, Topic] = {}
    for t in topics:
        deduped.setdefault(t.label, t)
    return sorted(deduped.values(), key=lambda t: (-t.support, t.label))


@dataclass(frozen=True)
class TopicCatalog:
    """Immutable ranked topic lists per product type."""

    entries: dict[str, tuple[Topic, ...]] = field(default_factory=dict)

    def get(self, product_type_id: str) -> tuple[Topic, ...]:
        return self.entries.get(product_type_id, ())

    def with_entry(self, product_type_id: str, topics: Iterable[Topic]) -> "TopicCatalog":
        new = dict(self.entries)
        new[product_type_id] = tuple(rank_topics(topics))
        return TopicCatalog(entries=new)

    def to_lines(self) -> str:
        docs = [
            json.dumps(
                {"product_type": pt, "topics": [t.to_dict() for t in topics]},
                sort_keys=True,
            )
            for pt, topics in sorted(self.entries.items())
        ]
        return "\n".join(docs) + ("\n" if docs else "")

    @classmethod
    def from_lines(cls, raw: str) -> "TopicCatalog":
        entries: dict[str, tuple[Topic, ...]] = {}
        for line in raw.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            topics = [Topic.from_dict(t) for t in rec["topics"]]
            entries[rec["product_type"]] = tuple(rank_topics(topics))
        return cls(entries=entries)


@dataclass
class IngestSummary:
    accepted: int = 0
    rejected: int = 0
    per_pt_counts: dict[str, int] = field(default_factory=dict)
    reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "per_pt_counts": dict(sorted(self.per_pt_counts.items())),
            "reasons": self.reasons,
        }


def _parse_review(record: str | dict) -> Review:
    if isinstance(record, str):
        try:
            record = json.loads(record)
        except json.JSONDecodeError as exc:
            raise ValueError(f"unparseable record: {exc}") from exc
    if not isinstance(record, dict):
        raise ValueError(f"record is not an object: {type(record).__name__}")
    unknown = set(record) - set(REVIEW_FIELDS)
    if unknown:
        raise ValueError(f"unknown fields: {sorted(unknown)}")
    rid = record.get("id")
    pt = record.get("product_type")
    stars = record.get("stars")
    text = record.get("text", "")
    if not rid or not isinstance(rid, str):
        raise ValueError("missing or invalid id")
    if not pt or not isinstance(pt, str):
        raise ValueError("missing or invalid product_type")
    if not isinstance(stars, int) or isinstance(stars, bool) or not 1 <= stars <= 5:
        raise ValueError(f"stars out of 1..5: {stars!r}")
    if not isinstance(text, str):
        raise ValueError("text must be a string")
    return Review(
        id=rid,
        product_type_id=pt,
        text=text,
        stars=stars,
        product_name=record.get("product_name") or None,
    )


class ReviewStore:
    """Append-only review store with a single serialized writer.

    Readers work off immutable snapshots (the catalog value is swapped
    atomically), so no torn reads are possible.
    """

    def __init__(
        self,
        data_dir: str | Path | None = None,
        coverage_threshold: int = DEFAULT_COVERAGE_THRESHOLD,
    ):
        self.coverage_threshold = coverage_threshold
        self._lock = threading.Lock()
        self._reviews: dict[str, Review] = {}
        self._per_pt: Counter[str] = Counter()
        self._product_types: dict[str, ProductType] = {}
        self.catalog = TopicCatalog()
        self.version = 0
        self._data_dir = Path(data_dir) if data_dir is not None else None
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            self._load()

    # -- persistence -------------------------------------------------------

    @property
    def _log_path(self) -> Path:
        return self._data_dir / "reviews.jsonl"

    @property
    def _catalog_path(self) -> Path:
        return self._data_dir / "catalog_snapshot.jsonl"

    def _load(self) -> None:
        if self._log_path.exists():
            for line in self._log_path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                review = _parse_review(line)
                if review.id not in self._reviews:
                    self._reviews[review.id] = review
                    self._per_pt[review.product_type_id] += 1
                    self.register_product_type(ProductType(id=review.product_type_id, name=review.product_type_id))
        if self._catalog_path.exists():
            self.catalog = TopicCatalog.from_lines(self._catalog_path.read_text("utf-8"))
            for pt in self.catalog.entries:
                self.register_product_type(ProductType(id=pt, name=pt))

    def save_catalog_snapshot(self) -> None:
        if self._data_dir is None:
            return
        tmp = self._catalog_path.with_suffix(".tmp")
        tmp.write_text(self.catalog.to_lines(), "utf-8")
        tmp.replace(self._catalog_path)

    # -- product types -----------------------------------------------------

    def register_product_type(self, pt: ProductType) -> None:
        self._product_types.setdefault(pt.id, pt)

    def register_product_types(self, pts: Iterable[ProductType]) -> None:
        for pt in pts:
            self.register_product_type(pt)

    def product_type(self, pt_id: str) -> ProductType:
        try:
            return self._product_types[pt_id]
        except KeyError:
            raise NotFound(f"unknown product type: {pt_id!r}") from None

    def product_types(self) -> list[ProductType]:
        return sorted(self._product_types.values(), key=lambda p: p.id)

    def review_count(self, pt_id: str) -> int:
        return self._per_pt.get(pt_id, 0)

    def reviews_for(self, pt_id: str) -> list[Review]:
        return sorted(
            (r for r in self._reviews.values() if r.product_type_id == pt_id),
            key=lambda r: r.id,
        )

    # -- ingestion ---------------------------------------------------------

    def ingest_reviews(self, source: Iterable[str | dict]) -> IngestSummary:
        """Append parseable reviews; duplicates (by id) and bad records rejected."""
        summary = IngestSummary()
        with self._lock:
            log_handle = None
            if self._data_dir is not None:
                log_handle = self._log_path.open("a", encoding="utf-8")
            try:
                for lineno, record in enumerate(source, start=1):
                    if isinstance(record, str) and not record.strip():
                        continue
                    try:
                        review = _parse_review(record)
                    except ValueError as exc:
                        summary.rejected += 1
                        summary.reasons.append(f"record {lineno}: {exc}")
                        continue
                    if review.id in self._reviews:
                        summary.rejected += 1
                        summary.reasons.append(f"record {lineno}: duplicate id {review.id!r}")
                        continue
                    self._reviews[review.id] = review
                    self._per_pt[review.product_type_id] += 1
                    self.register_product_type(ProductType(id=review.product_type_id, name=review.product_type_id))
                    summary.accepted += 1
                    summary.per_pt_counts[review.product_type_id] = (
                        summary.per_pt_counts.get(review.product_type_id, 0) + 1
                    )
                    if log_handle is not None:
                        log_handle.write(
                            json.dumps(
                                {
                                    "id": review.id,
                                    "product_type": review.product_type_id,
                                    "product_name": review.product_name,
                                    "text": review.text,
                                    "stars": review.stars,
                                },
                                sort_keys=True,
                            )
                            + "\n"
                        )
            finally:
                if log_handle is not None:
                    log_handle.close()
            if summary.accepted:
                self.version += 1
        return summary

    # -- mining ------------------------------------------------------------

    def extract_frequent_mentions(
        self,
        product_type_id: str,
        max_topics: int = 10,
        threshold: int | None = None,
    ) -> list[Topic]:
        """Top candidate terms of a product type's reviews by document frequency.

        Candidates are unigrams and bigrams of content tokens (stop words
        removed, lowercased, light plural folding). Requires the product type
        to meet the review-coverage threshold; ties break lexicographically.
        """
        threshold = self.coverage_threshold if threshold is None else threshold
        reviews = self.reviews_for(product_type_id)
        if len(reviews) < threshold:
            raise CatalogMiss(
                f"product type {product_type_id!r} has {len(reviews)} reviews "
                f"(needs {threshold}); use a fallback"
            )
        return mine_frequent_mentions(
            (r.text for r in reviews), max_topics=max_topics
        )

    def rebuild_catalog(self, max_topics: int = 10, threshold: int | None = None) -> TopicCatalog:
        """Recompute mined entries for every product type meeting the threshold."""
        threshold = self.coverage_threshold if threshold is None else threshold
        catalog = self.catalog
        for pt_id in sorted(self._per_pt):
            if self._per_pt[pt_id] >= threshold:
                topics = self.extract_frequent_mentions(pt_id, max_topics, threshold)
                catalog = catalog.with_entry(pt_id, topics)
        with self._lock:
            self.catalog = catalog
            self.version += 1
        self.save_catalog_snapshot()
        return catalog

    def load_catalog_snapshot(self, path: str | Path) -> TopicCatalog:
        """Merge a snapshot file (one document per product type) into the catalog."""
        loaded = TopicCatalog.from_lines(Path(path).read_text("utf-8"))
        catalog = self.catalog
        for pt_id, topics in loaded.entries.items():
            catalog = catalog.with_entry(pt_id, topics)
            self.register_product_type(ProductType(id=pt_id, name=pt_id))
        with self._lock:
            self.catalog = catalog
            self.version += 1
        self.save_catalog_snapshot()
        return catalog

    # -- reporting ---------------------------------------------------------

    def coverage_report(self, threshold: int | None = None) -> "CoverageReport":
        threshold = self.coverage_threshold if threshold is None else threshold
        counts = [self.review_count(pt.id) for pt in self.product_types()]
        histogram: dict[str, int] = {}
        for count in counts:
            histogram[_bucket(count)] = histogram.get(_bucket(count), 0) + 1
        above = sum(1 for c in counts if c > threshold)
        fraction = above / len(counts) if counts else 0.0
        return CoverageReport(
            pt_count=len(counts),
            reviews_histogram=dict(sorted(histogram.items(), key=lambda kv: _BUCKET_ORDER.index(kv[0]))),
            fraction_above_threshold=fraction,
            threshold=threshold,
        )


_BUCKET_ORDER = ["0", "1-9", "10-49", "50-99", "100-249", "250-999", "1000+"]


def _bucket(count: int) -> str:
    if count == 0:
        return "0"
    if count < 10:
        return "1-9"
    if count < 50:
        return "10-49"
    if count < 100:
        return "50-99"
    if count < 250:
        return "100-249"
    if count < 1000:
        return "250-999"
    return "1000+"


@dataclass(frozen=True)
class CoverageReport:
    pt_count: int
    reviews_histogram: dict[str, int]
    fraction_above_threshold: float
    threshold: int

    def render(self) -> str:
        lines = [
            f"Product types: {self.pt_count}",
            f"Above {self.threshold} reviews: {self.fraction_above_threshold * 100:.1f}% of product types",
            "Histogram:",
        ]
        lines.extend(f"  {bucket:>8}  {count}" for bucket, count in self.reviews_histogram.items())
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "pt_count": self.pt_count,
            "reviews_histogram": self.reviews_histogram,
            "fraction_above_threshold": self.fraction_above_threshold,
            "threshold": self.threshold,
        }


# --------------------------------------------------------------------------
# Mining and keyword extraction
# --------------------------------------------------------------------------

def _fold_plural(token: str, vocabulary: set[str]) -> str:
    if len(token) > 3 and token.endswith("s") and not token.endswith("ss") and token[:-1] in vocabulary:
        return token[:-1]
    return token


def mine_frequent_mentions(
    texts: Iterable[str],
    max_topics: int = 10,
    stopwords: frozenset[str] | None = None,
) -> list[Topic]:
    """Rank unigram/bigram candidates by document frequency over the texts."""
    stops = default_stopwords() if stopwords is None else stopwords
    token_lists = [content_tokens(t, stops) for t in texts]
    vocabulary = {t for tokens in token_lists for t in tokens}
    df: Counter[str] = Counter()
    for tokens in token_lists:
        folded = [_fold_plural(t, vocabulary) for t in tokens]
        terms = set(folded)
        terms.update(f"{a} {b}" for a, b in zip(folded, folded[1:]))
        df.update(terms)
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))
    return [Topic(label=term, support=count, source="mined") for term, count in ranked[:max_topics]]


def extract_topics_from_description(
    description_text: str,
    max_topics: int = 10,
    stopwords: frozenset[str] | None = None,
) -> list[Topic]:
    """Statistical keyword extraction over a product description.

    Candidate unigrams/bigrams are scored by
    frequency * 1 / (1 + first_position_fraction) * sentence_spread,
    favoring terms that are frequent, appear early, and recur across
    sentences. Returns at most max_topics, score descending then label.
    """
    stops = default_stopwords() if stopwords is None else stopwords
    if not description_text.strip():
        return []
    sentences = split_sentences(description_text)
    sentence_tokens = [content_tokens(s, stops) for s in sentences]
    flat: list[str] = [t for tokens in sentence_tokens for t in tokens]
    if not flat:
        return []
    total = len(flat)

    def candidates(tokens: list[str]) -> list[str]:
        return tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]

    freq: Counter[str] = Counter()
    spread: Counter[str] = Counter()
    for tokens in sentence_tokens:
        cands = candidates(tokens)
        freq.update(cands)
        spread.update(set(cands))
    first_pos: dict[str, int] = {}
    offset = 0
    for tokens in sentence_tokens:
        for i, tok in enumerate(tokens):
            first_pos.setdefault(tok, offset + i)
        for i, (a, b) in enumerate(zip(tokens, tokens[1:])):
            first_pos.setdefault(f"{a} {b}", offset + i)
        offset += len(tokens)

    scored = []
    for term, count in freq.items():
        first_fraction = first_pos[term] / total
        score = count * (1.0 / (1.0 + first_fraction)) * spread[term]
        scored.append((term, score))
    scored.sort(key=lambda kv: (-kv[1], kv[0]))
    return [
        Topic(label=term, support=freq[term], source="description")
        for term, _ in scored[:max_topics]
    ]


# --------------------------------------------------------------------------
# Topic lookup with fallbacks
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TopicLookupResult:
    topics: tuple[Topic, ...]
    provenance: str  # catalog | similar_pt | description | llm


FallbackChain = Sequence[tuple[str, Callable[[], Sequence[Topic]]]]


def topics_for(
    store: ReviewStore,
    product_type_id: str,
    allow_fallback: bool = False,
    fallbacks: FallbackChain = (),
    max_topics: int = 10,
) -> TopicLookupResult:
    """Serve catalog topics, or walk the fallback chain for cold-start types.

    With allow_fallback=False the only possible provenance is "catalog";
    an empty catalog entry raises CatalogMiss. Fallback providers run in the
    configured order; the first nonempty result wins.
    """
    store.product_type(product_type_id)  # NotFound if unknown
    entry = store.catalog.get(product_type_id)
    if entry:
        return TopicLookupResult(topics=entry[:max_topics], provenance="catalog")
    if not allow_fallback:
        raise CatalogMiss(f"no catalog topics for {product_type_id!r}")
    for provenance, provider in fallbacks:
        topics = tuple(provider())[:max_topics]
        if topics:
            return TopicLookupResult(topics=topics, provenance=provenance)
    raise CatalogMiss(f"no topics obtainable for {product_type_id!r} (fallbacks exhausted)")
