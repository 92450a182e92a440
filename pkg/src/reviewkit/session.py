"""Interactive review-composition sessions.

A session walks CREATED -> TOPICS_PRESENTED -> RATED -> PHRASES_SUGGESTED ->
DRAFTING -> FINALIZED. Re-rating is the one allowed way back (it re-enters
RATED and invalidates cached suggestions); finalized sessions are immutable.
Every mutation is journaled as an append-only event so a store can replay a
session after restart.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

from .catalog import Topic
from .errors import CatalogMiss, NotFound, SessionStateError
from .generation import PhraseFlag, PhraseSuggestion, TopicRating
from .sentiment import (
    SentimentLexicon,
    SentimentReport,
    average_rounded_rating,
    overall_rating,
    score_text,
)
from .text import split_sentences, tokenize


class SessionState(str, Enum):
    CREATED = "CREATED"
    TOPICS_PRESENTED = "TOPICS_PRESENTED"
    RATED = "RATED"
    PHRASES_SUGGESTED = "PHRASES_SUGGESTED"
    DRAFTING = "DRAFTING"
    FINALIZED = "FINALIZED"


_ORDER = [
    SessionState.CREATED,
    SessionState.TOPICS_PRESENTED,
    SessionState.RATED,
    SessionState.PHRASES_SUGGESTED,
    SessionState.DRAFTING,
    SessionState.FINALIZED,
]


def state_rank(state: SessionState) -> int:
    return _ORDER.index(state)


# Legal state transitions: the forward chain, plus re-entry into RATED from any
# post-rating state (re-rating regenerates suggestions), plus self-loops for
# repeated rating/suggestion/draft updates.
LEGAL_TRANSITIONS: frozenset[tuple[SessionState, SessionState]] = frozenset(
    [
        (SessionState.CREATED, SessionState.TOPICS_PRESENTED),
        (SessionState.TOPICS_PRESENTED, SessionState.RATED),
        (SessionState.RATED, SessionState.RATED),
        (SessionState.RATED, SessionState.PHRASES_SUGGESTED),
        (SessionState.PHRASES_SUGGESTED, SessionState.RATED),
        (SessionState.PHRASES_SUGGESTED, SessionState.PHRASES_SUGGESTED),
        (SessionState.PHRASES_SUGGESTED, SessionState.DRAFTING),
        (SessionState.DRAFTING, SessionState.RATED),
        (SessionState.DRAFTING, SessionState.DRAFTING),
        (SessionState.DRAFTING, SessionState.FINALIZED),
    ]
)


@dataclass(frozen=True)
class FinalReview:
    text: str
    sentence_tags: tuple[tuple[int, tuple[str, ...]], ...]
    sentiment: SentimentReport
    suggested_stars: int
    topic_average_stars: int

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "sentence_tags": [[i, list(labels)] for i, labels in self.sentence_tags],
            "sentiment": self.sentiment.to_dict(),
            "suggested_stars": self.suggested_stars,
            "topic_average_stars": self.topic_average_stars,
        }


@dataclass
class Coverage:
    covered: list[str] = field(default_factory=list)
    unaddressed: list[str] = field(default_factory=list)
    tags: list[tuple[int, list[str]]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "covered": self.covered,
            "unaddressed": self.unaddressed,
            "tags": [[i, labels] for i, labels in self.tags],
        }


@dataclass
class ReviewSession:
    id: str
    product_type_id: str
    product_name: str | None = None
    state: SessionState = SessionState.CREATED
    presented_topics: list[Topic] = field(default_factory=list)
    provenance: str = ""
    ratings: list[TopicRating] = field(default_factory=list)
    suggestions: list[PhraseSuggestion] = field(default_factory=list)
    draft: str = ""
    coverage: Coverage = field(default_factory=Coverage)
    final: FinalReview | None = None
    notes: list[str] = field(default_factory=list)
    seq: int = 0

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "product_type": self.product_type_id,
            "product_name": self.product_name,
            "state": self.state.value,
            "presented_topics": [t.to_dict() for t in self.presented_topics],
            "provenance": self.provenance,
            "ratings": [{"topic": r.topic, "stars": r.stars} for r in self.ratings],
            "suggestions": [s.to_dict() for s in self.suggestions],
            "draft": self.draft,
            "coverage": self.coverage.to_dict(),
            "final": self.final.to_dict() if self.final else None,
            "notes": self.notes,
            "seq": self.seq,
        }


def _match_positions(term: str, tokens: list[str]) -> bool:
    """Whole-word match of a (possibly multi-word) term within a token list.

    The term's final word also matches its bare plural (trailing 's'), so the
    topic "strap" tags "straps" but "battery" never tags "batteries".
    """
    words = tokenize(term)
    if not words or len(tokens) < len(words):
        return False
    last = words[-1]
    for start in range(len(tokens) - len(words) + 1):
        if tokens[start : start + len(words) - 1] == words[:-1]:
            tail = tokens[start + len(words) - 1]
            if tail == last or tail == last + "s":
                return True
    return False


def detect_topics(draft: str, topics: Sequence[Topic]) -> list[tuple[int, list[str]]]:
    """Tag sentences with the topics (label or synonym) they mention."""
    results: list[tuple[int, list[str]]] = []
    for index, sentence in enumerate(split_sentences(draft.strip())):
        tokens = tokenize(sentence)
        matched = [
            topic.label
            for topic in topics
            if _match_positions(topic.label, tokens)
            or any(_match_positions(s, tokens) for s in topic.synonyms)
        ]
        if matched:
            results.append((index, matched))
    return results


TopicsLookup = Callable[[str], tuple[Sequence[Topic], str]]
Suggester = Callable[["ReviewSession"], list[PhraseSuggestion]]


class SessionStore:
    """Owns session lifecycle, per-session serialization, and the journal."""

    def __init__(
        self,
        data_dir: str | Path | None = None,
        topics_lookup: TopicsLookup | None = None,
        suggester: Suggester | None = None,
        lexicon: SentimentLexicon | None = None,
        blend_alpha: float = 0.5,
        max_topics: int = 10,
    ):
        self.topics_lookup = topics_lookup
        self.suggester = suggester
        self.lexicon = lexicon
        self.blend_alpha = blend_alpha
        self.max_topics = max_topics
        self.sessions: dict[str, ReviewSession] = {}
        self._idempotency: dict[str, str] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._master = threading.Lock()
        self._data_dir = Path(data_dir) if data_dir is not None else None
        if self._data_dir is not None:
            self._data_dir.mkdir(parents=True, exist_ok=True)
            self._replay()

    # -- journal -----------------------------------------------------------

    @property
    def _journal_path(self) -> Path:
        return self._data_dir / "sessions.jsonl"

    def _journal(self, session: ReviewSession, event: str, payload: dict) -> None:
        session.seq += 1
        if self._data_dir is None:
            return
        record = {
            "session_id": session.id,
            "seq": session.seq,
            "event": event,
            "payload": payload,
            "ts": time.time(),
        }
        with self._journal_path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")

    def _replay(self) -> None:
        if not self._journal_path.exists():
            return
        for line in self._journal_path.read_text("utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            self._apply(record)

    def _apply(self, record: dict) -> None:
        sid = record["session_id"]
        event = record["event"]
        payload = record["payload"]
        if event == "created":
            session = ReviewSession(
                id=sid,
                product_type_id=payload["product_type"],
                product_name=payload.get("product_name"),
                state=SessionState.TOPICS_PRESENTED,
                presented_topics=[Topic.from_dict(t) for t in payload["topics"]],
                provenance=payload.get("provenance", ""),
                notes=payload.get("notes", []),
            )
            self.sessions[sid] = session
            key = payload.get("idempotency_key")
            if key:
                self._idempotency[key] = sid
        else:
            session = self.sessions[sid]
            if event == "rated":
                session.ratings = [TopicRating(**r) for r in payload["ratings"]]
                session.suggestions = []
                session.state = SessionState.RATED
            elif event == "suggested":
                session.suggestions = [_suggestion_from_dict(s) for s in payload["suggestions"]]
                if state_rank(session.state) < state_rank(SessionState.PHRASES_SUGGESTED):
                    session.state = SessionState.PHRASES_SUGGESTED
            elif event == "draft_updated":
                session.draft = payload["text"]
                session.coverage = self._coverage(session)
                session.state = SessionState.DRAFTING
            elif event == "finalized":
                session.final = _final_from_dict(payload["final"])
                session.state = SessionState.FINALIZED
        session.seq = record["seq"]

    # -- helpers -----------------------------------------------------------

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._master:
            return self._locks.setdefault(session_id, threading.Lock())

    def get(self, session_id: str) -> ReviewSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise NotFound(f"unknown session: {session_id!r}") from None

    def _transition(self, session: ReviewSession, new_state: SessionState) -> None:
        if session.state == SessionState.FINALIZED:
            raise SessionStateError("session is finalized and immutable")
        if (session.state, new_state) not in LEGAL_TRANSITIONS:
            raise SessionStateError(f"illegal transition {session.state.value} -> {new_state.value}")
        session.state = new_state

    def _coverage(self, session: ReviewSession) -> Coverage:
        tags = detect_topics(session.draft, session.presented_topics)
        mentioned = {label for _, labels in tags for label in labels}
        rated = [r.topic for r in session.ratings]
        covered = [t for t in rated if t in mentioned]
        unaddressed = [t for t in rated if t not in mentioned]
        return Coverage(covered=covered, unaddressed=unaddressed, tags=[(i, list(l)) for i, l in tags])

    # -- operations --------------------------------------------------------

    def create_session(
        self,
        product_type_id: str,
        product_name: str | None = None,
        idempotency_key: str | None = None,
    ) -> ReviewSession:
        """Open a session with the product type's topics already presented."""
        with self._master:
            if idempotency_key and idempotency_key in self._idempotency:
                return self.sessions[self._idempotency[idempotency_key]]
        topics: list[Topic] = []
        provenance = ""
        notes: list[str] = []
        if self.topics_lookup is None:
            notes.append("no topic source configured")
        else:
            try:
                found, provenance = self.topics_lookup(product_type_id)
                topics = list(found)[: self.max_topics]
            except CatalogMiss as exc:
                notes.append(f"no topics obtainable: {exc}")
        session = ReviewSession(
            id=uuid.uuid4().hex,
            product_type_id=product_type_id,
            product_name=product_name,
            presented_topics=topics,
            provenance=provenance,
            notes=notes,
        )
        self._transition(session, SessionState.TOPICS_PRESENTED)
        with self._master:
            # re-check under the lock: a concurrent create may have won the key
            if idempotency_key and idempotency_key in self._idempotency:
                return self.sessions[self._idempotency[idempotency_key]]
            self.sessions[session.id] = session
            if idempotency_key:
                self._idempotency[idempotency_key] = session.id
        self._journal(
            session,
            "created",
            {
                "product_type": product_type_id,
                "product_name": product_name,
                "topics": [t.to_dict() for t in topics],
                "provenance": provenance,
                "notes": notes,
                "idempotency_key": idempotency_key,
            },
        )
        return session

    def rate_topics(self, session_id: str, ratings: Sequence[TopicRating]) -> ReviewSession:
        """Store ratings (subset of presented topics) and invalidate suggestions."""
        session = self.get(session_id)
        with self._lock_for(session_id):
            presented = {t.label.lower() for t in session.presented_topics}
            deduped: dict[str, TopicRating] = {}
            for rating in ratings:
                if rating.topic.lower() not in presented:
                    raise ValueError(f"topic was not presented: {rating.topic!r}")
                if rating.topic.lower() in deduped:
                    session.notes.append(f"topic {rating.topic!r} rated twice; last value wins")
                deduped[rating.topic.lower()] = rating
            if not deduped:
                raise ValueError("at least one rating is required")
            self._transition(session, SessionState.RATED)
            session.ratings = list(deduped.values())
            session.suggestions = []
            self._journal(
                session,
                "rated",
                {"ratings": [{"topic": r.topic, "stars": r.stars} for r in session.ratings]},
            )
        return session

    def suggest_phrases(self, session_id: str) -> ReviewSession:
        """Generate and cache one suggestion per rated topic."""
        session = self.get(session_id)
        with self._lock_for(session_id):
            if session.state == SessionState.FINALIZED:
                raise SessionStateError("session is finalized and immutable")
            if state_rank(session.state) < state_rank(SessionState.RATED) or not session.ratings:
                raise SessionStateError("rate at least one topic before requesting phrases")
            if self.suggester is None:
                raise SessionStateError("no suggestion backend configured")
            suggestions = self.suggester(session)  # BackendError propagates, state unchanged
            if state_rank(session.state) < state_rank(SessionState.PHRASES_SUGGESTED):
                self._transition(session, SessionState.PHRASES_SUGGESTED)
            session.suggestions = suggestions
            self._journal(
                session, "suggested", {"suggestions": [s.to_dict() for s in suggestions]}
            )
        return session

    def update_draft(self, session_id: str, text: str) -> ReviewSession:
        """Replace the draft and recompute live topic coverage."""
        session = self.get(session_id)
        with self._lock_for(session_id):
            if state_rank(session.state) < state_rank(SessionState.PHRASES_SUGGESTED):
                raise SessionStateError("request suggestions before drafting")
            self._transition(session, SessionState.DRAFTING)
            session.draft = text
            session.coverage = self._coverage(session)
            self._journal(session, "draft_updated", {"text": text})
        return session

    def finalize(self, session_id: str) -> FinalReview:
        """Tag, score, and rate the draft; the session becomes immutable."""
        session = self.get(session_id)
        with self._lock_for(session_id):
            if not session.draft.strip():
                raise ValueError("cannot finalize an empty draft")
            self._transition(session, SessionState.FINALIZED)
            tags = detect_topics(session.draft, session.presented_topics)
            sentiment = score_text(session.draft, self.lexicon)
            stars = [r.stars for r in session.ratings]
            overall = overall_rating(stars or None, sentiment, self.blend_alpha)
            final = FinalReview(
                text=session.draft,
                sentence_tags=tuple((i, tuple(labels)) for i, labels in tags),
                sentiment=sentiment,
                suggested_stars=overall.suggested_stars,
                topic_average_stars=average_rounded_rating(stars) if stars else overall.suggested_stars,
            )
            session.final = final
            self._journal(session, "finalized", {"final": final.to_dict()})
        return final


def _suggestion_from_dict(rec: dict) -> PhraseSuggestion:
    sentiment = rec.get("sentiment")
    return PhraseSuggestion(
        topic=rec["topic"],
        text=rec["text"],
        word_count=rec["word_count"],
        flags=frozenset(PhraseFlag(f) for f in rec.get("flags", [])),
        sentiment=SentimentReport(**sentiment) if sentiment else None,
    )


def _final_from_dict(rec: dict) -> FinalReview:
    return FinalReview(
        text=rec["text"],
        sentence_tags=tuple((i, tuple(labels)) for i, labels in rec["sentence_tags"]),
        sentiment=SentimentReport(**rec["sentiment"]),
        suggested_stars=rec["suggested_stars"],
        topic_average_stars=rec["topic_average_stars"],
    )
