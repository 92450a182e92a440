"""Shared text utilities: tokenization, stop words, sentence splitting."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Terminal punctuation that ends a sentence unless guarded by an abbreviation.
_SENTENCE_END_RE = re.compile(r"([.!?]+)(\s+|$)")

# Words whose trailing period does not end a sentence.
ABBREVIATIONS = frozenset(
    {
        "mr", "mrs", "ms", "dr", "st", "vs", "etc", "e.g", "i.e", "no",
        "approx", "inc", "oz", "lbs", "ft", "in", "sq", "fig", "dept",
    }
)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters (digits kept)."""
    return _TOKEN_RE.findall(text.lower())


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    raw = resources.files("reviewkit.data").joinpath("stopwords.txt").read_text("utf-8")
    words = {line.strip() for line in raw.splitlines()}
    return frozenset(w for w in words if w and not w.startswith("#"))


def content_tokens(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Tokens with stop words removed; order preserved."""
    stops = default_stopwords() if stopwords is None else stopwords
    return [t for t in tokenize(text) if t not in stops]


def split_sentences(text: str) -> list[str]:
    """Split on ., ! or ? followed by whitespace, guarding common abbreviations."""
    text = text.strip()
    if not text:
        return []
    sentences: list[str] = []
    start = 0
    for match in _SENTENCE_END_RE.finditer(text):
        end = match.end(1)
        prefix = text[start : match.start(1)]
        last_word = prefix.rsplit(None, 1)[-1].lower() if prefix.split() else ""
        last_word = last_word.rstrip(".")
        if "." in match.group(1) and last_word in ABBREVIATIONS:
            continue
        piece = text[start:end].strip()
        if piece:
            sentences.append(piece)
        start = match.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences
