"""Prompt construction, pluggable phrase generation, response cleaning, and
fine-tuning record export.

The prompt is four parts: a fixed opening establishing the reviewer persona,
the ask, the input data block (product type, optional product name, and the
topic/star pairs), and a closing that bans rating mentions while allowing
synonyms. Any text-in/text-out backend can fulfill the generation contract;
the bundled template backend is a deterministic offline stand-in.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
import time
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import BackendError, EmptyResponse, FormatError
from .sentiment import SentimentLexicon, SentimentReport, score_text
from .text import tokenize

log = logging.getLogger(__name__)

OPENING_PROMPT = (
    "Act like a customer who purchased the product of given product type. "
    "After using the product, you want to provide review on the website. "
    "Now you have information on product type, product related topics along "
    "with rating for each topic."
)
ASK_PROMPT = "Suggest topics and respective phrase (minimum 20 words) for selected and rated topic."
CLOSING_PROMPT = (
    "Do not mention any rating in the review text. "
    "Also, you can use synonyms for tags when generating the phrase."
)


@dataclass(frozen=True)
class TopicRating:
    topic: str
    stars: int

    def __post_init__(self) -> None:
        if not self.topic:
            raise ValueError("topic must be nonempty")
        if not isinstance(self.stars, int) or not 1 <= self.stars <= 5:
            raise ValueError(f"stars out of 1..5: {self.stars!r}")


def format_input_data(
    product_type: str,
    product_name: str | None,
    ratings: Sequence[TopicRating],
) -> str:
    """Serialize the input-data block; shared with fine-tune record export."""
    head = f"Product Type: {product_type}"
    if product_name:
        head += f", Product Name: {product_name}"
    pairs = ", ".join(f"{r.topic}: {r.stars} stars" for r in ratings)
    return f"{head}\nTopics and Ratings are: {pairs}"


@dataclass(frozen=True)
class PromptBundle:
    opening: str
    ask: str
    input_data: str
    closing: str
    product_type: str = ""
    product_name: str | None = None
    ratings: tuple[TopicRating, ...] = ()

    def render(self) -> str:
        return (
            f"Opening Prompt: {self.opening}\n"
            f"Ask: {self.ask}\n"
            f"Input data: {self.input_data}\n"
            f"Closing Prompt: {self.closing}\n"
        )


def build_prompt(
    product_type: str,
    product_name: str | None,
    ratings: Sequence[TopicRating],
) -> PromptBundle:
    if not ratings:
        raise ValueError("at least one topic rating is required")
    return PromptBundle(
        opening=OPENING_PROMPT,
        ask=ASK_PROMPT,
        input_data=format_input_data(product_type, product_name, ratings),
        closing=CLOSING_PROMPT,
        product_type=product_type,
        product_name=product_name,
        ratings=tuple(ratings),
    )


# --------------------------------------------------------------------------
# Backends
# --------------------------------------------------------------------------

class PhraseTemplates:
    """Tiered templates keyed negative/neutral/positive with {topic} slots."""

    def __init__(self, tiers: dict[str, list[str]]):
        for tier in ("negative", "neutral", "positive"):
            if not tiers.get(tier):
                raise ValueError(f"template tier {tier!r} is empty")
        self.tiers = tiers

    @classmethod
    def load(cls, path: str | Path | None = None) -> "PhraseTemplates":
        if path is None:
            raw = resources.files("reviewkit.data").joinpath("templates.txt").read_text("utf-8")
        else:
            raw = Path(path).read_text("utf-8")
        tiers: dict[str, list[str]] = {}
        current: list[str] | None = None
        for line in raw.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = tiers.setdefault(line[1:-1], [])
                continue
            if current is None:
                raise ValueError("template line before any [tier] header")
            current.append(line)
        return cls(tiers)


def tier_for_stars(stars: int) -> str:
    if stars <= 2:
        return "negative"
    if stars == 3:
        return "neutral"
    return "positive"


def _stable_index(seed: int, *parts: str, size: int) -> int:
    digest = hashlib.sha256("|".join([str(seed), *parts]).encode("utf-8")).hexdigest()
    return int(digest, 16) % size


def template_generate(
    product_type: str,
    ratings: Sequence[TopicRating],
    seed: int = 0,
    templates: PhraseTemplates | None = None,
    synonyms: dict[str, Sequence[str]] | None = None,
) -> str:
    """Deterministic offline phrase generation: one "Topic: phrase" line per rating.

    The template for a topic is picked by a stable hash of (seed, product type,
    topic, stars), so identical inputs always produce identical output.
    """
    tmpl = templates or PhraseTemplates.load()
    lines = []
    for rating in ratings:
        tier = tmpl.tiers[tier_for_stars(rating.stars)]
        choice = tier[_stable_index(seed, product_type, rating.topic.lower(), str(rating.stars), size=len(tier))]
        options = [rating.topic.lower()]
        if synonyms:
            options.extend(s.lower() for s in synonyms.get(rating.topic.lower(), ()))
        term = options[_stable_index(seed, "term", product_type, rating.topic.lower(), size=len(options))]
        lines.append(f"{rating.topic}: {choice.format(topic=term)}")
    return "\n".join(lines)


_CANDIDATE_LINE_RE = re.compile(r"^Candidates:", re.MULTILINE)
_TOPIC_ASK_RE = re.compile(r"topics", re.IGNORECASE)

GENERIC_TOPICS = (
    "quality", "price", "value", "ease of use", "durability",
    "appearance", "size", "material", "packaging", "delivery",
)


class TemplateBackend:
    """Offline deterministic backend fulfilling the text-in/text-out contract.

    Phrase prompts are answered from the tiered template table; candidate-list
    prompts echo the leading candidates; bare topic asks return a generic
    retail topic list. Output is a pure function of (prompt, seed).
    """

    kind = "template"

    def __init__(self, seed: int = 0, templates: PhraseTemplates | None = None):
        self.seed = seed
        self.templates = templates or PhraseTemplates.load()

    def complete_text(self, prompt: str) -> str:
        parsed = _parse_prompt_input(prompt)
        if parsed is not None:
            product_type, ratings = parsed
            return template_generate(product_type, ratings, self.seed, self.templates)
        if _CANDIDATE_LINE_RE.search(prompt):
            names = [
                line.strip()[2:].strip()
                for line in prompt.splitlines()
                if line.strip().startswith("- ")
            ]
            k = _requested_k(prompt)
            return "\n".join(names[:k])
        if _TOPIC_ASK_RE.search(prompt):
            return "\n".join(GENERIC_TOPICS)
        return ""


def _requested_k(prompt: str, default: int = 10) -> int:
    match = re.search(r"\b(\d+)\b", prompt.rsplit("Candidates:", 1)[-1])
    return int(match.group(1)) if match else default


_INPUT_PT_RE = re.compile(r"^Input data: Product Type: (?P<pt>[^,\n]+)(?:, Product Name: .*)?$", re.MULTILINE)
_RATINGS_LINE_RE = re.compile(r"^Topics and Ratings are: (?P<pairs>.+)$", re.MULTILINE)
_PAIR_RE = re.compile(r"^(?P<topic>.+?):\s*(?P<stars>[1-5]) stars$")


def _parse_prompt_input(prompt: str) -> tuple[str, list[TopicRating]] | None:
    pt_match = _INPUT_PT_RE.search(prompt)
    ratings_match = _RATINGS_LINE_RE.search(prompt)
    if not pt_match or not ratings_match:
        return None
    ratings = []
    for chunk in ratings_match.group("pairs").split(", "):
        pair = _PAIR_RE.match(chunk.strip())
        if pair:
            ratings.append(TopicRating(topic=pair.group("topic"), stars=int(pair.group("stars"))))
    if not ratings:
        return None
    return pt_match.group("pt").strip(), ratings


class HttpBackend:
    """HTTP text backend: POST {"prompt": ...} and read {"text": ...} back.

    The bearer credential is read from the environment, never from config
    files. Other provider schemas can be adapted by overriding request_body /
    extract_text.
    """

    kind = "http_llm"

    def __init__(
        self,
        url: str,
        api_key: str | None = None,
        timeout: float = 30.0,
    ):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def request_body(self, prompt: str) -> dict:
        return {"prompt": prompt}

    def extract_text(self, payload: dict) -> str:
        return payload.get("text", "")

    def complete_text(self, prompt: str) -> str:
        import httpx

        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = httpx.post(
                self.url, json=self.request_body(prompt), headers=headers, timeout=self.timeout
            )
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendError(f"backend request failed: {exc}") from exc
        try:
            payload = response.json()
        except ValueError as exc:
            raise BackendError(f"backend returned non-JSON body: {exc}") from exc
        return self.extract_text(payload)


def generate_phrases(bundle: PromptBundle, backend, retries: int = 2) -> str:
    """Run the backend on a rendered prompt with transport retries.

    Latency is logged per attempt. Exhausted retries surface the last
    BackendError; a blank response raises EmptyResponse.
    """
    prompt = bundle.render()
    last_error: BackendError | None = None
    for attempt in range(1 + retries):
        started = time.perf_counter()
        try:
            raw = backend.complete_text(prompt)
        except BackendError as exc:
            last_error = exc
            log.warning("backend attempt %d failed: %s", attempt + 1, exc)
            continue
        log.debug("backend responded in %.3fs", time.perf_counter() - started)
        if not raw or not raw.strip():
            raise EmptyResponse("backend returned an empty response")
        return raw
    raise BackendError(f"backend failed after {retries} retries: {last_error}")


# --------------------------------------------------------------------------
# Parsing and validation
# --------------------------------------------------------------------------

_RESPONSE_LINE_RE = re.compile(r"^(?P<topic>[^:]{1,60}?)\s*:\s*(?P<text>\S.*)$")


def parse_response(raw: str) -> list[tuple[str, str]]:
    """Extract (topic, phrase) pairs from "<Topic>: <text>" lines.

    Bold markers and bullets are stripped; topics are lowercased; lines that
    do not match the pattern are skipped with a diagnostic. Zero pairs is a
    FormatError so the caller can regenerate.
    """
    pairs: list[tuple[str, str]] = []
    for line in raw.splitlines():
        cleaned = line.strip().lstrip("-*•").strip()
        cleaned = cleaned.replace("**", "").replace("__", "")
        if not cleaned:
            continue
        match = _RESPONSE_LINE_RE.match(cleaned)
        if not match:
            log.debug("skipping unparseable response line: %r", line)
            continue
        pairs.append((match.group("topic").strip().lower(), match.group("text").strip()))
    if not pairs:
        raise FormatError("response contained no 'Topic: phrase' lines")
    return pairs


class PhraseFlag(str, Enum):
    RATING_MENTION = "RATING_MENTION"
    TOO_SHORT = "TOO_SHORT"
    TOO_LONG = "TOO_LONG"
    OFF_TOPIC_TERM = "OFF_TOPIC_TERM"
    UNKNOWN_TOPIC = "UNKNOWN_TOPIC"
    MISSING = "MISSING"


# Warn-only by default; rejects (triggering regeneration) only in strict mode.
WARN_FLAGS = {PhraseFlag.TOO_SHORT, PhraseFlag.TOO_LONG}
REJECT_FLAGS = {PhraseFlag.RATING_MENTION, PhraseFlag.OFF_TOPIC_TERM, PhraseFlag.UNKNOWN_TOPIC}


@dataclass(frozen=True)
class ValidationLimits:
    min_words: int = 20
    max_words: int = 25
    max_tokens: int = 150
    strict: bool = False

    def reject_flags(self) -> set[PhraseFlag]:
        return REJECT_FLAGS | WARN_FLAGS if self.strict else set(REJECT_FLAGS)


_RATING_PATTERNS = (
    re.compile(r"\d\s*(?:\.\d+)?\s*stars?\b", re.IGNORECASE),
    re.compile(r"\bstars?\s*[:\-]?\s*\d", re.IGNORECASE),
    re.compile(r"\b\d\s*/\s*5\b"),
    re.compile(r"\brated?\s+\d\b", re.IGNORECASE),
)


def mentions_rating(text: str) -> bool:
    return any(p.search(text) for p in _RATING_PATTERNS)


def strip_rating_mentions(text: str) -> str:
    """Excise rating phrasings; idempotent rewrite, separate from validation."""
    out = text
    for pattern in _RATING_PATTERNS:
        out = pattern.sub("", out)
    return re.sub(r"\s{2,}", " ", out).strip()


@dataclass(frozen=True)
class PhraseSuggestion:
    topic: str
    text: str
    word_count: int
    flags: frozenset[PhraseFlag] = frozenset()
    sentiment: SentimentReport | None = None

    def to_dict(self) -> dict:
        return {
            "topic": self.topic,
            "text": self.text,
            "word_count": self.word_count,
            "flags": sorted(f.value for f in self.flags),
            "sentiment": self.sentiment.to_dict() if self.sentiment else None,
        }


def validate_phrase(
    pair: tuple[str, str],
    requested_topics: Iterable[str],
    topic_vocabulary: Iterable[str] = (),
    limits: ValidationLimits | None = None,
    attribute_terms: Iterable[str] | None = None,
) -> PhraseSuggestion:
    """Flag a parsed (topic, text) pair; validation never rewrites the text.

    OFF_TOPIC_TERM is the hallucination heuristic: the text uses a cross-catalog
    attribute term that is not part of this product type's own topic, synonym,
    or product vocabulary.
    """
    limits = limits or ValidationLimits()
    topic, text = pair
    requested = {t.lower() for t in requested_topics}
    vocabulary = {v.lower() for v in topic_vocabulary}
    vocab_tokens = {tok for v in vocabulary for tok in tokenize(v)}
    attributes = default_attribute_terms() if attribute_terms is None else {a.lower() for a in attribute_terms}

    flags: set[PhraseFlag] = set()
    word_count = len(text.split())
    if mentions_rating(text):
        flags.add(PhraseFlag.RATING_MENTION)
    if word_count < limits.min_words:
        flags.add(PhraseFlag.TOO_SHORT)
    if word_count > limits.max_words or word_count > limits.max_tokens:
        flags.add(PhraseFlag.TOO_LONG)
    if topic.lower() not in requested:
        flags.add(PhraseFlag.UNKNOWN_TOPIC)
    foreign = [t for t in tokenize(text) if t in attributes and t not in vocab_tokens]
    if foreign:
        flags.add(PhraseFlag.OFF_TOPIC_TERM)
    return PhraseSuggestion(
        topic=topic.lower(), text=text, word_count=word_count, flags=frozenset(flags)
    )


_ATTRIBUTE_TERMS: set[str] | None = None


def default_attribute_terms() -> set[str]:
    global _ATTRIBUTE_TERMS
    if _ATTRIBUTE_TERMS is None:
        raw = resources.files("reviewkit.data").joinpath("attribute_terms.txt").read_text("utf-8")
        _ATTRIBUTE_TERMS = {
            line.strip().lower()
            for line in raw.splitlines()
            if line.strip() and not line.startswith("#")
        }
    return _ATTRIBUTE_TERMS


# --------------------------------------------------------------------------
# Suggestion pipeline
# --------------------------------------------------------------------------

def suggest(
    product_type: str,
    product_name: str | None,
    ratings: Sequence[TopicRating],
    backend,
    lexicon: SentimentLexicon | None = None,
    limits: ValidationLimits | None = None,
    topic_vocabulary: Iterable[str] = (),
    attribute_terms: Iterable[str] | None = None,
    fallback_backend=None,
) -> list[PhraseSuggestion]:
    """Full pipeline: prompt -> generate -> parse -> validate -> sentiment.

    Every requested topic appears exactly once in the output; topics the
    backend skipped come back as empty suggestions flagged MISSING. Phrases
    carrying reject-class flags are regenerated once and then surfaced with
    their flags intact. Pairs for topics that were never requested are dropped.
    """
    limits = limits or ValidationLimits()
    deduped: dict[str, TopicRating] = {}
    for rating in ratings:
        key = rating.topic.lower()
        if key in deduped:
            log.debug("duplicate topic %r in ratings; last value wins", rating.topic)
        deduped[key] = rating
    ordered = list(deduped.values())
    if not ordered:
        raise ValueError("at least one topic rating is required")

    bundle = build_prompt(product_type, product_name, ordered)
    vocabulary = set(topic_vocabulary) | {r.topic for r in ordered} | {product_type}
    if product_name:
        vocabulary.add(product_name)

    def run(active_backend) -> list[tuple[str, str]]:
        raw = generate_phrases(bundle, active_backend)
        return parse_response(raw)

    try:
        pairs = _pairs_with_retry(run, backend)
    except BackendError:
        if fallback_backend is None:
            raise
        log.warning("primary backend failed; using fallback backend")
        pairs = _pairs_with_retry(run, fallback_backend)

    requested = [r.topic.lower() for r in ordered]
    validated: dict[str, PhraseSuggestion] = {}
    for pair in pairs:
        suggestion = validate_phrase(pair, requested, vocabulary, limits, attribute_terms)
        if PhraseFlag.UNKNOWN_TOPIC in suggestion.flags:
            log.debug("dropping phrase for unrequested topic %r", suggestion.topic)
            continue
        validated.setdefault(suggestion.topic, suggestion)

    rejects = {
        topic: s for topic, s in validated.items() if s.flags & limits.reject_flags()
    }
    if rejects:
        try:
            retry_pairs = run(backend)
        except (BackendError, FormatError, EmptyResponse):
            retry_pairs = []
        for pair in retry_pairs:
            topic = pair[0]
            if topic not in rejects:
                continue
            replacement = validate_phrase(pair, requested, vocabulary, limits, attribute_terms)
            if len(replacement.flags & limits.reject_flags()) < len(
                validated[topic].flags & limits.reject_flags()
            ):
                validated[topic] = replacement

    lex = lexicon
    out: list[PhraseSuggestion] = []
    for rating in ordered:
        key = rating.topic.lower()
        found = validated.get(key)
        if found is None:
            report = score_text("", lex)
            out.append(
                PhraseSuggestion(
                    topic=key,
                    text="",
                    word_count=0,
                    flags=frozenset({PhraseFlag.MISSING}),
                    sentiment=report,
                )
            )
            continue
        report = score_text(found.text, lex)
        out.append(
            PhraseSuggestion(
                topic=found.topic,
                text=found.text,
                word_count=found.word_count,
                flags=found.flags,
                sentiment=report,
            )
        )
    return out


def _pairs_with_retry(run, backend) -> list[tuple[str, str]]:
    try:
        return run(backend)
    except FormatError:
        log.warning("unparseable response; regenerating once")
        return run(backend)


# --------------------------------------------------------------------------
# Fine-tune record export
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FineTuneRecord:
    instruction: str
    context: str
    response: str

    def to_dict(self) -> dict:
        return {"instruction": self.instruction, "context": self.context, "response": self.response}


FINETUNE_INSTRUCTION = f"{OPENING_PROMPT}\n{ASK_PROMPT}\n{CLOSING_PROMPT}"
RECOMMENDED_REVIEWS_PER_PT = 200


@dataclass
class ExportSummary:
    exported: int = 0
    skipped: int = 0
    per_pt_counts: dict[str, int] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def low_coverage_notes(self, recommended: int = RECOMMENDED_REVIEWS_PER_PT) -> list[str]:
        return [
            f"product type {pt!r} has {count} records; {recommended}+ per product type recommended"
            for pt, count in sorted(self.per_pt_counts.items())
            if count < recommended
        ]


def export_finetune_records(
    reviews: Iterable[dict],
    summary: ExportSummary | None = None,
) -> Iterator[FineTuneRecord]:
    """Convert rated reviews to (instruction, context, response) records.

    Each input needs product_type, a nonempty ratings map, and text; the
    context reuses the prompt input-data serializer so records round-trip
    through build_prompt. Records missing a field are skipped with a
    diagnostic.
    """
    for i, rec in enumerate(reviews, start=1):
        product_type = rec.get("product_type")
        text = rec.get("text")
        ratings_map = rec.get("ratings")
        if not product_type or not text or not ratings_map:
            msg = f"record {i}: missing product_type, text, or ratings; skipped"
            log.warning(msg)
            if summary is not None:
                summary.skipped += 1
                summary.diagnostics.append(msg)
            continue
        try:
            ratings = [TopicRating(topic=t, stars=int(s)) for t, s in ratings_map.items()]
        except (ValueError, TypeError) as exc:
            msg = f"record {i}: bad ratings ({exc}); skipped"
            log.warning(msg)
            if summary is not None:
                summary.skipped += 1
                summary.diagnostics.append(msg)
            continue
        context = format_input_data(product_type, rec.get("product_name"), ratings)
        title = rec.get("title")
        response = f"{title}\n\n{text}" if title else text
        if summary is not None:
            summary.exported += 1
            summary.per_pt_counts[product_type] = summary.per_pt_counts.get(product_type, 0) + 1
        yield FineTuneRecord(instruction=FINETUNE_INSTRUCTION, context=context, response=response)


def write_finetune_records(reviews: Iterable[dict], out_path: str | Path) -> ExportSummary:
    summary = ExportSummary()
    with Path(out_path).open("w", encoding="utf-8") as handle:
        for record in export_finetune_records(reviews, summary):
            handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")
    return summary
