from __future__ import annotations

import random

import pytest

from reviewkit.catalog import Topic
from reviewkit.errors import BackendError, NotFound, SessionStateError
from reviewkit.generation import (
    TemplateBackend,
    TopicRating,
    suggest,
)
from reviewkit.sentiment import default_lexicon
from reviewkit.session import (
    LEGAL_TRANSITIONS,
    ReviewSession,
    SessionState,
    SessionStore,
    detect_topics,
)

LEXICON = default_lexicon()

PERFUME_TOPICS = [Topic(t) for t in ("smell", "price", "warm", "long lasting", "quality")]
TOY_TOPICS = [Topic(t) for t in ("size", "softness", "quality", "carry", "color")]


def template_suggester(seed: int = 7):
    def run(session: ReviewSession):
        return suggest(
            session.product_type_id,
            session.product_name,
            session.ratings,
            TemplateBackend(seed=seed),
            LEXICON,
        )

    return run


def make_store(topics=PERFUME_TOPICS, data_dir=None, seed: int = 7) -> SessionStore:
    return SessionStore(
        data_dir=data_dir,
        topics_lookup=lambda pt: (topics, "catalog"),
        suggester=template_suggester(seed),
        lexicon=LEXICON,
    )


class TestDetectTopics:
    def test_reference_example(self):
        topics = [Topic("suction"), Topic("battery life", synonyms=("battery",))]
        draft = "The suction is great. Battery died fast."
        assert detect_topics(draft, topics) == [(0, ["suction"]), (1, ["battery life"])]

    def test_empty_draft(self):
        assert detect_topics("", [Topic("suction")]) == []

    def test_whole_word_rule_with_plural_fold(self):
        topics = [Topic("strap"), Topic("battery")]
        # "straps" matches via the trailing-s fold; "batteries" does not
        assert detect_topics("Nice straps.", topics) == [(0, ["strap"])]
        assert detect_topics("The batteries died.", topics) == []

    def test_inflected_synonym_matches(self):
        topics = [Topic("battery life", synonyms=("batteries",))]
        assert detect_topics("The batteries died.", topics) == [(0, ["battery life"])]

    def test_multiple_topics_per_sentence(self):
        topics = [Topic("smell"), Topic("price")]
        result = detect_topics("The smell justifies the price!", topics)
        assert result == [(0, ["smell", "price"])]

    def test_case_insensitive(self):
        assert detect_topics("SMELL is fine.", [Topic("smell")]) == [(0, ["smell"])]

    def test_whitespace_insensitive(self):
        topics = [Topic("smell")]
        assert detect_topics("  The smell is off.  ", topics) == detect_topics(
            "The smell is off.", topics
        )

    def test_abbreviation_guard(self):
        topics = [Topic("price")]
        result = detect_topics("The price vs. others is fine. Still cheap.", topics)
        assert result == [(0, ["price"])]


class TestSessionFlow:
    def test_create_presents_topics(self):
        store = make_store()
        session = store.create_session("Perfumes")
        assert session.state == SessionState.TOPICS_PRESENTED
        assert [t.label for t in session.presented_topics][:2] == ["smell", "price"]
        assert session.provenance == "catalog"

    def test_create_caps_topics_at_ten(self):
        many = [Topic(f"t{i:02d}") for i in range(15)]
        store = make_store(topics=many)
        session = store.create_session("X")
        assert len(session.presented_topics) == 10

    def test_idempotent_create(self):
        store = make_store()
        a = store.create_session("Perfumes", idempotency_key="k1")
        b = store.create_session("Perfumes", idempotency_key="k1")
        assert a.id == b.id
        c = store.create_session("Perfumes", idempotency_key="k2")
        assert c.id != a.id

    def test_create_with_no_topics_keeps_diagnostic(self):
        def miss(pt):
            from reviewkit.errors import CatalogMiss

            raise CatalogMiss("nothing for " + pt)

        store = SessionStore(topics_lookup=miss, suggester=None, lexicon=LEXICON)
        session = store.create_session("Cold PT")
        assert session.presented_topics == []
        assert session.notes

    def test_partial_rating_allowed(self):
        store = make_store()
        session = store.create_session("Perfumes")
        store.rate_topics(session.id, [TopicRating("smell", 1), TopicRating("price", 2)])
        assert session.state == SessionState.RATED
        assert len(session.ratings) == 2

    def test_unknown_topic_named_in_error(self):
        store = make_store()
        session = store.create_session("Perfumes")
        with pytest.raises(ValueError, match="bouquet"):
            store.rate_topics(session.id, [TopicRating("bouquet", 3)])

    def test_out_of_range_stars_rejected_at_construction(self):
        with pytest.raises(ValueError):
            TopicRating("smell", 0)

    def test_double_rating_last_wins(self):
        store = make_store()
        session = store.create_session("Perfumes")
        store.rate_topics(session.id, [TopicRating("smell", 1), TopicRating("smell", 5)])
        assert session.ratings == [TopicRating("smell", 5)]
        assert any("twice" in n for n in session.notes)

    def test_suggest_requires_rating(self):
        store = make_store()
        session = store.create_session("Perfumes")
        with pytest.raises(SessionStateError):
            store.suggest_phrases(session.id)

    def test_perfumes_fixture_negative_lean(self):
        store = make_store()
        session = store.create_session("Perfumes")
        store.rate_topics(
            session.id,
            [
                TopicRating("smell", 1),
                TopicRating("price", 2),
                TopicRating("warm", 2),
                TopicRating("long lasting", 1),
            ],
        )
        store.suggest_phrases(session.id)
        assert session.state == SessionState.PHRASES_SUGGESTED
        compounds = [s.sentiment.compound for s in session.suggestions]
        assert len(compounds) == 4
        assert sum(compounds) / len(compounds) < 0.5

    def test_toys_fixture_positive_lean(self):
        store = make_store(topics=TOY_TOPICS)
        session = store.create_session("Stuffed Toys & Animals")
        store.rate_topics(
            session.id,
            [
                TopicRating("size", 4),
                TopicRating("softness", 4),
                TopicRating("quality", 5),
                TopicRating("carry", 5),
            ],
        )
        store.suggest_phrases(session.id)
        compounds = [s.sentiment.compound for s in session.suggestions]
        assert sum(compounds) / len(compounds) > 0.5

    def test_rerating_regenerates_suggestions(self):
        store = make_store()
        session = store.create_session("Perfumes")
        store.rate_topics(session.id, [TopicRating("smell", 1)])
        store.suggest_phrases(session.id)
        first = list(session.suggestions)
        store.rate_topics(session.id, [TopicRating("smell", 5)])
        assert session.suggestions == []  # invalidated
        store.suggest_phrases(session.id)
        assert session.suggestions != first
        assert session.suggestions[0].sentiment.compound > first[0].sentiment.compound

    def test_suggest_failure_leaves_state(self):
        class Exploding:
            def complete_text(self, prompt):
                raise BackendError("down")

        def failing_suggester(session):
            return suggest(
                session.product_type_id, None, session.ratings, Exploding(), LEXICON
            )

        store = SessionStore(
            topics_lookup=lambda pt: (PERFUME_TOPICS, "catalog"),
            suggester=failing_suggester,
            lexicon=LEXICON,
        )
        session = store.create_session("Perfumes")
        store.rate_topics(session.id, [TopicRating("smell", 1)])
        with pytest.raises(BackendError):
            store.suggest_phrases(session.id)
        assert session.state == SessionState.RATED
        assert session.suggestions == []


class TestDraftAndCoverage:
    def _session_with_ratings(self, store):
        session = store.create_session("Perfumes")
        store.rate_topics(
            session.id,
            [
                TopicRating("smell", 1),
                TopicRating("price", 2),
                TopicRating("warm", 2),
                TopicRating("long lasting", 1),
            ],
        )
        store.suggest_phrases(session.id)
        return session

    def test_draft_requires_suggestions(self):
        store = make_store()
        session = store.create_session("Perfumes")
        with pytest.raises(SessionStateError):
            store.update_draft(session.id, "hello")

    def test_coverage_partition(self):
        store = make_store()
        session = self._session_with_ratings(store)
        store.update_draft(session.id, "The smell is too faint. The price felt excessive.")
        assert session.state == SessionState.DRAFTING
        assert session.coverage.covered == ["smell", "price"]
        assert session.coverage.unaddressed == ["warm", "long lasting"]
        rated = {r.topic for r in session.ratings}
        assert set(session.coverage.covered) | set(session.coverage.unaddressed) == rated
        assert set(session.coverage.covered) & set(session.coverage.unaddressed) == set()

    def test_inserting_suggestion_covers_topic(self):
        store = make_store()
        session = self._session_with_ratings(store)
        smell_phrase = next(s.text for s in session.suggestions if s.topic == "smell")
        store.update_draft(session.id, smell_phrase)
        assert "smell" in session.coverage.covered

    def test_clearing_draft_unaddresses_everything(self):
        store = make_store()
        session = self._session_with_ratings(store)
        store.update_draft(session.id, "The smell is nice.")
        store.update_draft(session.id, "")
        assert session.coverage.covered == []
        assert len(session.coverage.unaddressed) == 4

    def test_draft_update_does_not_touch_suggestions(self):
        store = make_store()
        session = self._session_with_ratings(store)
        before = list(session.suggestions)
        store.update_draft(session.id, "Some text.")
        assert session.suggestions == before


class TestFinalize:
    def _drafted(self, store, draft: str):
        session = store.create_session("Perfumes")
        store.rate_topics(
            session.id, [TopicRating("smell", 1), TopicRating("price", 2)]
        )
        store.suggest_phrases(session.id)
        store.update_draft(session.id, draft)
        return session

    def test_negative_draft_low_stars(self):
        store = make_store()
        draft = (
            "The smell was awful and disappointing. "
            "The price felt excessive and it is a terrible and useless buy."
        )
        session = self._drafted(store, draft)
        final = store.finalize(session.id)
        assert final.suggested_stars <= 2
        assert session.state == SessionState.FINALIZED

    def test_topic_average_reference(self):
        store = make_store()
        session = store.create_session("Perfumes")
        store.rate_topics(
            session.id,
            [
                TopicRating("smell", 2),
                TopicRating("price", 1),
                TopicRating("warm", 4),
                TopicRating("long lasting", 2),
            ],
        )
        store.suggest_phrases(session.id)
        store.update_draft(session.id, "The smell faded.")
        final = store.finalize(session.id)
        assert final.topic_average_stars == 2

    def test_double_finalize_rejected(self):
        store = make_store()
        session = self._drafted(store, "The smell is fine.")
        store.finalize(session.id)
        with pytest.raises(SessionStateError):
            store.finalize(session.id)

    def test_empty_draft_rejected(self):
        store = make_store()
        session = store.create_session("Perfumes")
        store.rate_topics(session.id, [TopicRating("smell", 1)])
        store.suggest_phrases(session.id)
        with pytest.raises((ValueError, SessionStateError)):
            store.finalize(session.id)

    def test_finalized_session_immutable(self):
        store = make_store()
        session = self._drafted(store, "The smell is fine.")
        store.finalize(session.id)
        with pytest.raises(SessionStateError):
            store.rate_topics(session.id, [TopicRating("smell", 3)])
        with pytest.raises(SessionStateError):
            store.update_draft(session.id, "more")
        with pytest.raises(SessionStateError):
            store.suggest_phrases(session.id)

    def test_sentence_tags_from_presented_topics(self):
        store = make_store()
        session = self._drafted(store, "The smell faded fast. Price was fair though.")
        final = store.finalize(session.id)
        assert final.sentence_tags == ((0, ("smell",)), (1, ("price",)))


class TestJournalReplay:
    def test_mid_draft_state_restores(self, tmp_path):
        store = make_store(data_dir=tmp_path)
        session = store.create_session("Perfumes", product_name="Bloom")
        store.rate_topics(session.id, [TopicRating("smell", 1), TopicRating("price", 2)])
        store.suggest_phrases(session.id)
        store.update_draft(session.id, "The smell is faint.")

        reopened = make_store(data_dir=tmp_path)
        restored = reopened.get(session.id)
        assert restored.state == SessionState.DRAFTING
        assert restored.draft == "The smell is faint."
        assert restored.ratings == session.ratings
        assert [s.text for s in restored.suggestions] == [s.text for s in session.suggestions]
        assert restored.coverage.covered == session.coverage.covered
        assert restored.seq == session.seq

    def test_finalized_state_restores_immutable(self, tmp_path):
        store = make_store(data_dir=tmp_path)
        session = store.create_session("Perfumes")
        store.rate_topics(session.id, [TopicRating("smell", 1)])
        store.suggest_phrases(session.id)
        store.update_draft(session.id, "The smell is faint.")
        final = store.finalize(session.id)

        reopened = make_store(data_dir=tmp_path)
        restored = reopened.get(session.id)
        assert restored.state == SessionState.FINALIZED
        assert restored.final.suggested_stars == final.suggested_stars
        with pytest.raises(SessionStateError):
            reopened.update_draft(session.id, "nope")

    def test_idempotency_key_survives_replay(self, tmp_path):
        store = make_store(data_dir=tmp_path)
        session = store.create_session("Perfumes", idempotency_key="key-1")
        reopened = make_store(data_dir=tmp_path)
        assert reopened.create_session("Perfumes", idempotency_key="key-1").id == session.id

    def test_unknown_session_not_found(self):
        with pytest.raises(NotFound):
            make_store().get("missing")


class TestRandomWalkProperty:
    """Drive the state machine with random legal/illegal actions."""

    def test_random_walk_never_corrupts(self):
        rng = random.Random(20240811)
        store = make_store()
        session = store.create_session("Perfumes")
        steps = 2000
        ratings_pool = [
            TopicRating("smell", rng.randint(1, 5)) for _ in range(4)
        ]
        for _ in range(steps):
            before = session.state
            action = rng.choice(("rate", "suggest", "draft", "finalize"))
            try:
                if action == "rate":
                    store.rate_topics(session.id, [rng.choice(ratings_pool)])
                elif action == "suggest":
                    store.suggest_phrases(session.id)
                elif action == "draft":
                    store.update_draft(session.id, rng.choice(["The smell is odd.", ""]))
                else:
                    store.finalize(session.id)
            except (SessionStateError, ValueError):
                assert session.state == before, "failed action must not change state"
                continue
            after = session.state
            assert (before, after) in LEGAL_TRANSITIONS, f"{before} -> {after} via {action}"
            rated = {r.topic for r in session.ratings}
            covered = set(session.coverage.covered)
            unaddressed = set(session.coverage.unaddressed)
            if session.state == SessionState.DRAFTING:
                assert covered | unaddressed == rated
                assert covered & unaddressed == set()
            if session.state == SessionState.FINALIZED:
                break
        # once finalized nothing moves
        if session.state == SessionState.FINALIZED:
            for action in ("rate", "suggest", "draft", "finalize"):
                with pytest.raises((SessionStateError, ValueError)):
                    if action == "rate":
                        store.rate_topics(session.id, [TopicRating("smell", 3)])
                    elif action == "suggest":
                        store.suggest_phrases(session.id)
                    elif action == "draft":
                        store.update_draft(session.id, "x")
                    else:
                        store.finalize(session.id)
