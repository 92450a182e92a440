"""Output-quality evaluation: BLEU with the replication preprocessing and
eligibility rule, topic-suggestion accuracy, and case-study tables."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .sentiment import SentimentLexicon, score_text
from .text import content_tokens


def preprocess(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Lowercase, split on non-alphanumerics (digits kept), drop stop words."""
    return content_tokens(text, stopwords)


# --------------------------------------------------------------------------
# BLEU
# --------------------------------------------------------------------------

def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(
    candidate: Sequence[str], references: Sequence[Sequence[str]], n: int
) -> Fraction | None:
    """Clipped n-gram precision; None when the candidate has no n-grams."""
    counts = _ngram_counts(candidate, n)
    total = sum(counts.values())
    if total == 0:
        return None
    clipped = 0
    for ngram, count in counts.items():
        max_ref = max(_ngram_counts(ref, n)[ngram] for ref in references)
        clipped += min(count, max_ref)
    return Fraction(clipped, total)


def brevity_penalty(candidate_len: int, reference_lens: Sequence[int]) -> float:
    """exp(1 - r/c) when the candidate is shorter than the closest reference."""
    r = min(reference_lens, key=lambda rl: (abs(rl - candidate_len), rl))
    if candidate_len >= r:
        return 1.0
    return math.exp(1.0 - r / candidate_len)


def bleu(
    candidate: Sequence[str],
    references: Sequence[Sequence[str]],
    max_n: int = 4,
    smoothing: bool = False,
) -> dict[int, float]:
    """Cumulative BLEU-1..max_n for one tokenized candidate.

    Cumulative BLEU-n is the brevity penalty times the geometric mean of the
    clipped precisions p_1..p_n. Without smoothing any zero precision zeroes
    that cumulative score; with smoothing, zero counts get an epsilon. Orders
    where the candidate has no n-grams at all (candidate shorter than n) are
    skipped rather than treated as zero, so a candidate identical to its
    reference scores 1.0 at every order.
    """
    if not candidate:
        raise ValueError("candidate must be nonempty")
    if not references or not any(references):
        raise ValueError("at least one nonempty reference is required")
    eps = 1e-9
    bp = brevity_penalty(len(candidate), [len(r) for r in references])
    precisions: list[float | None] = []
    for n in range(1, max_n + 1):
        p = modified_precision(candidate, references, n)
        if p is None:
            precisions.append(None)
        elif p == 0:
            precisions.append(eps / (len(candidate) - n + 1) if smoothing else 0.0)
        else:
            precisions.append(float(p))
    scores: dict[int, float] = {}
    for n in range(1, max_n + 1):
        usable = [p for p in precisions[:n] if p is not None]
        if not usable:
            scores[n] = 0.0
            continue
        if any(p == 0.0 for p in usable):
            scores[n] = 0.0
            continue
        mean_log = sum(math.log(p) for p in usable) / len(usable)
        scores[n] = bp * math.exp(mean_log)
    return scores


@dataclass(frozen=True)
class BleuReport:
    cumulative: dict[int, float]
    eligible_count: int
    total_count: int

    def to_dict(self) -> dict:
        return {
            "cumulative": {str(n): s for n, s in sorted(self.cumulative.items())},
            "eligible_count": self.eligible_count,
            "total_count": self.total_count,
        }


@dataclass(frozen=True)
class ScoredPair:
    id: str
    candidate: list[str]
    references: list[list[str]]


def load_bleu_records(
    lines: Iterable[str], stopwords: frozenset[str] | None = None
) -> list[ScoredPair]:
    """Records {"id","candidate","references":[...]} with preprocessing applied."""
    pairs = []
    for line in lines:
        if not line.strip():
            continue
        rec = json.loads(line)
        pairs.append(
            ScoredPair(
                id=str(rec.get("id", len(pairs))),
                candidate=preprocess(rec["candidate"], stopwords),
                references=[preprocess(r, stopwords) for r in rec["references"]],
            )
        )
    return pairs


def eligibility_filter(
    pairs: Sequence[ScoredPair], enabled: bool = True
) -> tuple[list[ScoredPair], float]:
    """Keep pairs whose candidate matches some reference's token count.

    The equal-length rule is a replication quirk; standard BLEU handles length
    mismatch with the brevity penalty instead, so `enabled=False` passes
    everything through. Rate is eligible/total (0 on empty input).
    """
    if not pairs:
        return [], 0.0
    if not enabled:
        return list(pairs), 1.0
    eligible = [
        p for p in pairs if any(len(r) == len(p.candidate) for r in p.references)
    ]
    return eligible, len(eligible) / len(pairs)


def corpus_bleu(
    pairs: Sequence[ScoredPair],
    max_n: int = 4,
    eligibility: bool = True,
    smoothing: bool = False,
) -> BleuReport:
    """Average per-pair cumulative scores over the (optionally filtered) corpus."""
    eligible, _ = eligibility_filter(pairs, enabled=eligibility)
    sums = {n: 0.0 for n in range(1, max_n + 1)}
    scored = 0
    for pair in eligible:
        if not pair.candidate or not any(pair.references):
            continue
        scores = bleu(pair.candidate, pair.references, max_n=max_n, smoothing=smoothing)
        scored += 1
        for n, s in scores.items():
            sums[n] += s
    cumulative = {n: (sums[n] / scored if scored else 0.0) for n in sums}
    return BleuReport(cumulative=cumulative, eligible_count=len(eligible), total_count=len(pairs))


def render_bleu_table(columns: Sequence[tuple[str, BleuReport]], max_n: int = 4) -> str:
    """Rows "Cumulative n-gram", one column per labeled method report."""
    headers = ["n-gram"] + [label for label, _ in columns]
    rows = []
    for n in range(1, max_n + 1):
        row = [f"Cumulative {n}-gram"]
        row.extend(f"{report.cumulative.get(n, 0.0):.3f}" for _, report in columns)
        rows.append(row)
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))]
    def fmt(cells: Sequence[str]) -> str:
        return "  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)).rstrip()
    out = [fmt(headers), fmt(["-" * w for w in widths])]
    out.extend(fmt(r) for r in rows)
    return "\n".join(out)


# --------------------------------------------------------------------------
# Topic-suggestion accuracy
# --------------------------------------------------------------------------

RelevanceJudge = Callable[[str, str], bool | None]


@dataclass(frozen=True)
class TopicAccuracyReport:
    total: int
    relevant: int
    irrelevant: int
    unjudged: int
    accuracy: Fraction
    undefined: bool = False
    label: str = ""

    @property
    def accuracy_percent(self) -> float:
        return float(self.accuracy) * 100.0

    def row(self) -> dict:
        return {
            "label": self.label,
            "total": self.total,
            "relevant": self.relevant,
            "irrelevant": self.irrelevant,
            "unjudged": self.unjudged,
            "accuracy_percent": round(self.accuracy_percent, 1),
            "undefined": self.undefined,
        }


def topic_accuracy(
    gold: dict[str, Iterable[str]],
    suggested: dict[str, Sequence[str]],
    judge: RelevanceJudge | None = None,
    label: str = "",
) -> TopicAccuracyReport:
    """Score suggested topics per product type.

    Types with a gold topic list count set overlap as relevant; suggestions
    outside gold (and all suggestions for types without gold) go to the judge,
    which returns True (relevant), False (irrelevant), or None (unjudged).
    Accuracy is relevant/total with exact rational arithmetic.
    """
    if set(gold) != set(suggested):
        raise ValueError("gold and suggested must cover the same product types")
    total = relevant = irrelevant = unjudged = 0
    for pt, topics in suggested.items():
        gold_set = {g.lower() for g in gold.get(pt) or ()}
        for topic in topics:
            total += 1
            t = topic.lower()
            if gold_set:
                if t in gold_set:
                    relevant += 1
                    continue
                verdict = judge(pt, t) if judge else None
                if verdict is False:
                    irrelevant += 1
                else:
                    unjudged += 1
            else:
                verdict = judge(pt, t) if judge else None
                if verdict is True:
                    relevant += 1
                elif verdict is False:
                    irrelevant += 1
                else:
                    unjudged += 1
    if total == 0:
        return TopicAccuracyReport(0, 0, 0, 0, Fraction(0), undefined=True, label=label)
    return TopicAccuracyReport(total, relevant, irrelevant, unjudged, Fraction(relevant, total), label=label)


def render_topic_accuracy_table(reports: Sequence[TopicAccuracyReport]) -> str:
    headers = ("Topics", "Total", "Relevant", "Irrelevant", "Unjudged", "Accuracy")
    rows = [
        (
            r.label or "-",
            str(r.total),
            str(r.relevant),
            str(r.irrelevant),
            str(r.unjudged),
            "undefined" if r.undefined else f"{r.accuracy_percent:.1f}%",
        )
        for r in reports
    ]
    widths = [max(len(h), *(len(row[i]) for row in rows)) if rows else len(h) for i, h in enumerate(headers)]
    def fmt(cells):
        return "  ".join(c.ljust(widths[i]) for i, c in enumerate(cells)).rstrip()
    lines = [fmt(headers), fmt(tuple("-" * w for w in widths))]
    lines.extend(fmt(row) for row in rows)
    if len(reports) > 1 and not any(r.undefined for r in reports):
        mean = sum(r.accuracy_percent for r in reports) / len(reports)
        lines.append(f"Mean accuracy: {mean:.1f}%")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Case-study report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CaseStudyRow:
    product_type: str
    ratings: list[tuple[str, int]]
    suggestions: list[tuple[str, str]]
    sentiment_score: float
    bleu_score: float | None
    final_rating: int

    def to_dict(self) -> dict:
        return {
            "product_type": self.product_type,
            "ratings": [{"topic": t, "stars": s} for t, s in self.ratings],
            "suggestions": [{"topic": t, "text": x} for t, x in self.suggestions],
            "sentiment_score": round(self.sentiment_score, 2),
            "bleu_score": None if self.bleu_score is None else round(self.bleu_score, 2),
            "final_rating": self.final_rating,
        }


def case_study_rows(
    sessions: Sequence,
    references: dict[str, Sequence[str]] | None = None,
    lexicon: SentimentLexicon | None = None,
) -> list[CaseStudyRow]:
    """One row per finalized session: ratings, suggestions, tone, BLEU, rating.

    The sentiment column scores the concatenated suggestion texts; the BLEU
    column is only filled when held-out reference phrases are supplied for the
    session's product type.
    """
    rows = []
    for session in sessions:
        if session.final is None:
            raise ValueError(f"session {session.id} is not finalized")
        texts = [s.text for s in session.suggestions if s.text]
        joined = " ".join(texts)
        sentiment = score_text(joined, lexicon).compound
        bleu_score = None
        refs = (references or {}).get(session.product_type_id)
        if refs and texts:
            ref_tokens = [preprocess(r) for r in refs]
            per_phrase = [
                bleu(preprocess(t), ref_tokens, max_n=1)[1] for t in texts if preprocess(t)
            ]
            bleu_score = sum(per_phrase) / len(per_phrase) if per_phrase else None
        rows.append(
            CaseStudyRow(
                product_type=session.product_type_id,
                ratings=[(r.topic, r.stars) for r in session.ratings],
                suggestions=[(s.topic, s.text) for s in session.suggestions],
                sentiment_score=sentiment,
                bleu_score=bleu_score,
                final_rating=session.final.suggested_stars,
            )
        )
    return rows


def render_case_study_table(rows: Sequence[CaseStudyRow]) -> str:
    header = f"{'Product Type':<16} {'Topics & Ratings':<26} {'Sent.':>6} {'BLEU':>6} {'Final':>6}"
    lines = [header, "-" * len(header)]
    for row in rows:
        ratings = "; ".join(f"{t}: {s} stars" for t, s in row.ratings)
        bleu_cell = "" if row.bleu_score is None else f"{row.bleu_score:.2f}"
        lines.append(
            f"{row.product_type:<16} {ratings:<26} {row.sentiment_score:>6.2f} {bleu_cell:>6} {row.final_rating:>6}"
        )
        for topic, text in row.suggestions:
            lines.append(f"    {topic}: {text}")
    return "\n".join(lines)
