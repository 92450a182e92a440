"""Similar product-type resolution for cold-start topic suggestion.

Three interchangeable methods: normalized Levenshtein similarity over names,
cosine similarity over lexical TF-IDF embeddings (word unigrams plus character
trigrams), and a backend-driven variant that asks a text model to pick
neighbors. Also houses the accuracy report used to compare the methods.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .errors import BackendError
from .text import tokenize


# --------------------------------------------------------------------------
# Edit distance
# --------------------------------------------------------------------------

def levenshtein_distance(a: str, b: str) -> int:
    """Minimum single-character insertions/deletions/substitutions a -> b."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(b) < len(a):
        a, b = b, a
    previous = list(range(len(a) + 1))
    for j, cb in enumerate(b, start=1):
        current = [j]
        for i, ca in enumerate(a, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[i] + 1, current[i - 1] + 1, previous[i - 1] + cost))
        previous = current
    return previous[-1]


def levenshtein_similarity(a: str, b: str) -> float:
    """1 - distance / max(len): case-insensitive, 1.0 for two empty strings."""
    fa, fb = a.casefold(), b.casefold()
    longest = max(len(fa), len(fb))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein_distance(fa, fb) / longest


# --------------------------------------------------------------------------
# Product types and embeddings
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductTypeInfo:
    id: str
    name: str
    department: str | None = None
    description: str | None = None


def load_bundled_product_types() -> list[ProductTypeInfo]:
    raw = resources.files("reviewkit.data").joinpath("product_types.jsonl").read_text("utf-8")
    out = []
    for line in raw.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        out.append(
            ProductTypeInfo(
                id=rec.get("id", rec["name"]),
                name=rec["name"],
                department=rec.get("department"),
                description=rec.get("description"),
            )
        )
    return out


@dataclass(frozen=True)
class Embedding:
    """Sparse unit-norm feature vector; `valid` is False when no feature hit."""

    weights: dict[str, float]
    valid: bool

    def norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))


def cosine(a: Embedding, b: Embedding) -> float:
    if not a.valid or not b.valid:
        return 0.0
    small, large = (a.weights, b.weights) if len(a.weights) <= len(b.weights) else (b.weights, a.weights)
    return sum(w * large.get(f, 0.0) for f, w in small.items())


def _features(text: str) -> list[str]:
    """Word unigrams plus character trigrams of the normalized name."""
    tokens = tokenize(text)
    feats = [f"w:{t}" for t in tokens]
    joined = " ".join(tokens)
    if len(joined) < 3:
        if joined:
            feats.append(f"c:{joined}")
    else:
        feats.extend(f"c:{joined[i:i + 3]}" for i in range(len(joined) - 2))
    return feats


class TfidfEmbedder:
    """Local lexical embedding provider fitted over a product-type vocabulary.

    A deterministic stand-in for a semantic embedding service; providers with
    real semantics can be plugged in behind the same embed() contract. Being
    purely lexical, it shares the known weakness of surface methods: it ranks
    by shared words and character shapes, not meaning.
    """

    def __init__(self, corpus: Iterable[str]):
        docs = [set(_features(text)) for text in corpus]
        n_docs = len(docs)
        df: dict[str, int] = {}
        for feats in docs:
            for f in feats:
                df[f] = df.get(f, 0) + 1
        self.idf = {f: math.log((1 + n_docs) / (1 + n)) + 1.0 for f, n in df.items()}

    def embed(self, text: str) -> Embedding:
        weights: dict[str, float] = {}
        for f in _features(text):
            idf = self.idf.get(f)
            if idf is not None:
                weights[f] = weights.get(f, 0.0) + idf
        norm = math.sqrt(sum(w * w for w in weights.values()))
        if norm == 0.0:
            return Embedding(weights={}, valid=False)
        return Embedding(weights={f: w / norm for f, w in weights.items()}, valid=True)


def embed(text: str, provider: TfidfEmbedder) -> Embedding:
    return provider.embed(text)


# --------------------------------------------------------------------------
# Similar product types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SimilarityMethod:
    kind: str  # levenshtein | cosine | llm
    threshold: float = 0.5
    k: int = 10

    def __post_init__(self) -> None:
        if self.kind not in ("levenshtein", "cosine", "llm"):
            raise ValueError(f"unknown similarity method: {self.kind}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold out of [0,1]: {self.threshold}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1: {self.k}")


def similar_product_types(
    pt: ProductTypeInfo,
    method: SimilarityMethod,
    candidates: Sequence[ProductTypeInfo],
    embedder: TfidfEmbedder | None = None,
    backend=None,
) -> list[tuple[ProductTypeInfo, float]]:
    """Rank candidate product types by similarity to `pt`; at most `method.k`.

    levenshtein: name similarity >= threshold, all departments scanned.
    cosine: restricted to `pt`'s department when departments are present.
    llm: delegates to the backend; falls back to cosine on backend failure.
    Order is deterministic: score descending, then name ascending.
    """
    pool = [c for c in candidates if c.id != pt.id]
    if not pool:
        return []

    if method.kind == "levenshtein":
        scored = [(c, levenshtein_similarity(pt.name, c.name)) for c in pool]
        scored = [(c, s) for c, s in scored if s >= method.threshold]
    elif method.kind == "cosine":
        if pt.department is not None:
            pool = [c for c in pool if c.department == pt.department]
        if embedder is None:
            embedder = TfidfEmbedder([pt.name] + [c.name for c in pool])
        query = embedder.embed(pt.name)
        scored = [(c, cosine(query, embedder.embed(c.name))) for c in pool]
    else:  # llm
        try:
            names = llm_similar_product_types(pt, pool, backend, k=method.k)
        except BackendError:
            return similar_product_types(
                pt, SimilarityMethod("cosine", method.threshold, method.k), candidates, embedder
            )
        by_name = {c.name.casefold(): c for c in pool}
        picked = [by_name[n.casefold()] for n in names]
        return [(c, (method.k - i) / method.k) for i, c in enumerate(picked)]

    scored.sort(key=lambda pair: (-pair[1], pair[0].name))
    return scored[: method.k]


LLM_SIMILAR_PROMPT = (
    "These are product types from a retail catalog.\n"
    "Product type: {name}\n"
    "Candidates:\n{candidates}\n"
    "List the {k} candidate product types most similar to the product type, "
    "one per line, using the candidate names exactly."
)


def llm_similar_product_types(
    pt: ProductTypeInfo,
    candidates: Sequence[ProductTypeInfo],
    backend,
    k: int = 10,
) -> list[str]:
    """Ask a text backend for the k nearest candidates; closed-world parse.

    Labels that are not candidate names are dropped; duplicates are removed;
    the result is capped at k. Backend transport failures raise BackendError.
    """
    if backend is None:
        raise BackendError("no backend configured for llm similarity")
    pool = [c for c in candidates if c.id != pt.id]
    prompt = LLM_SIMILAR_PROMPT.format(
        name=pt.name,
        candidates="\n".join(f"- {c.name}" for c in pool),
        k=k,
    )
    response = backend.complete_text(prompt)
    known = {c.name.casefold(): c.name for c in pool}
    seen: set[str] = set()
    out: list[str] = []
    for line in response.splitlines():
        label = line.strip().lstrip("-*•0123456789. ").strip()
        match = known.get(label.casefold())
        if match is None or match in seen:
            continue
        seen.add(match)
        out.append(match)
        if len(out) >= k:
            break
    return out


# --------------------------------------------------------------------------
# Accuracy report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SimilarityReport:
    total_detected: int
    correct: int
    missing: int
    accuracy: Fraction
    undefined: bool = False
    method: str = ""

    @property
    def accuracy_percent(self) -> float:
        return float(self.accuracy) * 100.0

    def row(self) -> dict:
        return {
            "method": self.method,
            "tpts": self.total_detected,
            "cpts": self.correct,
            "mpts": self.missing,
            "accuracy_percent": round(self.accuracy_percent, 1),
            "undefined": self.undefined,
        }


def evaluate_similarity_methods(
    gold: dict[str, set[str]],
    predicted: dict[str, list[str]],
    k: int = 10,
    method: str = "",
) -> SimilarityReport:
    """Score predictions against gold neighbor sets.

    total = sum of prediction list sizes; correct = sum of per-key overlap;
    missing = unfilled prediction slots (k - |predicted|) plus gold neighbors
    never produced. Accuracy is exact rational correct/total; formatting to a
    one-decimal percent happens only at render time.
    """
    if set(gold) != set(predicted):
        raise ValueError("gold and predicted must cover the same product types")
    total = 0
    correct = 0
    missing = 0
    for key in gold:
        preds = predicted[key]
        pred_set = set(preds)
        total += len(preds)
        correct += len(pred_set & gold[key])
        missing += max(0, k - len(preds)) + len(gold[key] - pred_set)
    if total == 0:
        return SimilarityReport(0, 0, missing, Fraction(0), undefined=True, method=method)
    return SimilarityReport(total, correct, missing, Fraction(correct, total), method=method)


def load_gold_file(path: str | Path) -> dict[str, set[str]]:
    """Gold-standard records: one {"product_type", "similar": [...]} per line."""
    out: dict[str, set[str]] = {}
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        out[rec["product_type"]] = set(rec["similar"])
    return out


def load_prediction_file(path: str | Path) -> dict[str, list[str]]:
    out: dict[str, list[str]] = {}
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        out[rec["product_type"]] = list(rec["similar"])
    return out


def render_similarity_table(reports: Sequence[SimilarityReport]) -> str:
    """Aligned text table: Method | TPTs | CPTs | MPTs | Accuracy%."""
    headers = ("Method", "TPTs", "CPTs", "MPTs", "A(%)")
    rows = [
        (
            r.method or "-",
            str(r.total_detected),
            str(r.correct),
            str(r.missing),
            "undefined" if r.undefined else f"{r.accuracy_percent:.1f}%",
        )
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(headers)]
    def fmt(cells):
        return "  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)).rstrip()
    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in rows)
    return "\n".join(lines)
