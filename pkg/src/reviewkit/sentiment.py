"""Lexicon-based sentiment scoring, star translation, and rating aggregation.

Compound scores live on [0, 1] with 0.5 neutral. A raw polarity balance
(P - N) / (P + N) is shifted from [-1, 1] onto [0, 1] so downstream star
translation works directly on the compound value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .text import tokenize


def round_half_up(value: float | int | Fraction) -> int:
    """Round to the nearest integer with .5 always rounding up."""
    if isinstance(value, Fraction):
        dec = Decimal(value.numerator) / Decimal(value.denominator)
    else:
        dec = Decimal(str(value))
    return int(dec.quantize(Decimal("1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class SentimentLexicon:
    """Token polarities plus negation tokens that flip a hit's sign."""

    entries: dict[str, float]
    negators: frozenset[str]
    window: int = 3

    def __post_init__(self) -> None:
        for token, polarity in self.entries.items():
            if not -1.0 <= polarity <= 1.0:
                raise ValueError(f"polarity out of [-1,1] for {token!r}: {polarity}")
        overlap = self.negators & set(self.entries)
        if overlap:
            raise ValueError(f"negators must not carry polarities: {sorted(overlap)}")


def load_lexicon(path: str | Path | None = None, window: int = 3) -> SentimentLexicon:
    """Load a "token<TAB>polarity" lexicon file; bundled default when no path.

    '#' lines are comments; tokens after a "[negators]" line are negation words.
    """
    if path is None:
        raw = resources.files("reviewkit.data").joinpath("lexicon.txt").read_text("utf-8")
    else:
        raw = Path(path).read_text("utf-8")
    entries: dict[str, float] = {}
    negators: set[str] = set()
    in_negators = False
    for line in raw.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line == "[negators]":
            in_negators = True
            continue
        if in_negators:
            negators.add(line.lower())
            continue
        token, _, value = line.partition("\t")
        entries[token.strip().lower()] = float(value)
    # Contractions tokenize as ("don", "t", ...): the bare "t" acts as the negator.
    negators.add("t")
    return SentimentLexicon(entries=entries, negators=frozenset(negators), window=window)


_DEFAULT_LEXICON: SentimentLexicon | None = None


def default_lexicon() -> SentimentLexicon:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = load_lexicon()
    return _DEFAULT_LEXICON


@dataclass(frozen=True)
class SentimentReport:
    compound: float
    positive_hits: int = 0
    negative_hits: int = 0
    stars: int = field(default=0)

    def to_dict(self) -> dict:
        return {
            "compound": self.compound,
            "positive_hits": self.positive_hits,
            "negative_hits": self.negative_hits,
            "stars": self.stars,
        }


def score_text(text: str, lexicon: SentimentLexicon | None = None) -> SentimentReport:
    """Score a text's tone: 0 most negative, 0.5 neutral, 1 most positive.

    Each lexicon hit contributes its polarity, sign-flipped when a negator
    occurs within `lexicon.window` tokens before it. Empty or hit-free text is
    neutral (compound 0.5).
    """
    lex = lexicon or default_lexicon()
    tokens = tokenize(text)
    positive = 0.0
    negative = 0.0
    pos_hits = 0
    neg_hits = 0
    for i, token in enumerate(tokens):
        polarity = lex.entries.get(token)
        if polarity is None:
            continue
        lo = max(0, i - lex.window)
        if any(tokens[j] in lex.negators for j in range(lo, i)):
            polarity = -polarity
        if polarity > 0:
            positive += polarity
            pos_hits += 1
        elif polarity < 0:
            negative += -polarity
            neg_hits += 1
    total = positive + negative
    raw = (positive - negative) / total if total else 0.0
    compound = (raw + 1.0) / 2.0
    return SentimentReport(
        compound=compound,
        positive_hits=pos_hits,
        negative_hits=neg_hits,
        stars=stars_from_score(compound),
    )


def stars_from_score(compound: float) -> int:
    """Translate a [0, 1] compound score to 1..5 stars (half-up, clamped)."""
    if not 0.0 <= compound <= 1.0:
        raise ValueError(f"compound score out of [0,1]: {compound}")
    return min(5, max(1, round_half_up(Fraction(Decimal(str(compound))) * 5)))


def average_rounded_rating(ratings: list[int]) -> int:
    """Half-up rounded arithmetic mean of 1..5 star ratings."""
    if not ratings:
        raise ValueError("ratings list is empty")
    for r in ratings:
        if not isinstance(r, int) or not 1 <= r <= 5:
            raise ValueError(f"rating out of 1..5: {r!r}")
    return round_half_up(Fraction(sum(ratings), len(ratings)))


@dataclass(frozen=True)
class OverallRating:
    suggested_stars: int
    topic_stars: int | None
    text_stars: int | None


def overall_rating(
    topic_ratings: list[int] | None,
    final_text_report: SentimentReport | None,
    blend: float = 0.5,
) -> OverallRating:
    """Blend the topic-rating average with the written text's star score.

    suggested = round_half_up(blend * mean(topic_ratings)
                              + (1 - blend) * stars(final_text)).
    Both components are surfaced; with only one available, that one wins.
    """
    if not 0.0 <= blend <= 1.0:
        raise ValueError(f"blend out of [0,1]: {blend}")
    have_topics = bool(topic_ratings)
    have_text = final_text_report is not None
    if not have_topics and not have_text:
        raise ValueError("need topic ratings or a text sentiment report")

    topic_stars = average_rounded_rating(topic_ratings) if have_topics else None
    text_stars = stars_from_score(final_text_report.compound) if have_text else None

    if not have_text:
        return OverallRating(topic_stars, topic_stars, None)
    if not have_topics:
        return OverallRating(text_stars, None, text_stars)

    alpha = Fraction(Decimal(str(blend)))
    topic_mean = Fraction(sum(topic_ratings), len(topic_ratings))
    blended = alpha * topic_mean + (1 - alpha) * text_stars
    return OverallRating(round_half_up(blended), topic_stars, text_stars)
