from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from reviewkit.errors import BackendError, EmptyResponse, FormatError
from reviewkit.generation import (
    PhraseFlag,
    PhraseTemplates,
    TemplateBackend,
    TopicRating,
    ValidationLimits,
    build_prompt,
    export_finetune_records,
    format_input_data,
    generate_phrases,
    mentions_rating,
    parse_response,
    strip_rating_mentions,
    suggest,
    template_generate,
    tier_for_stars,
    validate_phrase,
    write_finetune_records,
)
from reviewkit.sentiment import default_lexicon

CAMERA_RATINGS = [
    TopicRating("Feel", 2),
    TopicRating("features", 1),
    TopicRating("strap", 4),
    TopicRating("price", 2),
]


class TestBuildPrompt:
    def test_worked_input_data(self):
        bundle = build_prompt("Camera Straps", None, CAMERA_RATINGS)
        assert bundle.input_data == (
            "Product Type: Camera Straps\n"
            "Topics and Ratings are: Feel: 2 stars, features: 1 stars, strap: 4 stars, price: 2 stars"
        )

    def test_single_rating_no_trailing_separator(self):
        bundle = build_prompt("Perfumes", None, [TopicRating("smell", 1)])
        assert bundle.input_data.endswith("Topics and Ratings are: smell: 1 stars")

    def test_product_name_included(self):
        bundle = build_prompt("Perfumes", "Bloom Mist", [TopicRating("smell", 1)])
        assert "Product Type: Perfumes, Product Name: Bloom Mist\n" in bundle.input_data

    def test_golden_file(self, golden_dir):
        bundle = build_prompt("Camera Straps", None, CAMERA_RATINGS)
        expected = (golden_dir / "camera_straps_prompt.txt").read_text("utf-8")
        assert bundle.render() == expected

    def test_all_parts_nonempty(self):
        bundle = build_prompt("X", None, [TopicRating("y", 3)])
        assert bundle.opening and bundle.ask and bundle.input_data and bundle.closing

    def test_empty_ratings_rejected(self):
        with pytest.raises(ValueError):
            build_prompt("X", None, [])


class TestParseResponse:
    def test_reference_line(self):
        pairs = parse_response("Strap: The camera strap is comfortable and well-made.")
        assert pairs == [("strap", "The camera strap is comfortable and well-made.")]

    def test_empty_is_format_error(self):
        with pytest.raises(FormatError):
            parse_response("")

    def test_line_without_colon_skipped(self):
        raw = "no separator here\nPrice: Too costly overall."
        assert parse_response(raw) == [("price", "Too costly overall.")]

    def test_bold_and_bullets_stripped(self):
        raw = "- **Feel**: Cheap to the touch."
        assert parse_response(raw) == [("feel", "Cheap to the touch.")]


class TestValidatePhrase:
    def test_rating_mention_pattern(self):
        s = validate_phrase(("feel", "It deserves 4 stars easily"), ["feel"])
        assert PhraseFlag.RATING_MENTION in s.flags

    @pytest.mark.parametrize(
        "text", ["I would give it 3/5", "rated 2 by me", "a 5 star experience"]
    )
    def test_other_rating_patterns(self, text):
        assert mentions_rating(text)

    def test_waterproof_hallucination_flagged(self):
        vocabulary = ["feel", "features", "strap", "price", "Camera Straps"]
        s = validate_phrase(
            ("strap", "It is not waterproof and the material is not durable."),
            ["feel", "features", "strap", "price"],
            topic_vocabulary=vocabulary,
        )
        assert PhraseFlag.OFF_TOPIC_TERM in s.flags

    def test_attribute_term_in_vocabulary_ok(self):
        s = validate_phrase(
            ("battery", "The battery holds charge all week long without any complaint at all here."),
            ["battery"],
            topic_vocabulary=["battery"],
        )
        assert PhraseFlag.OFF_TOPIC_TERM not in s.flags

    def test_clean_phrase_no_flags(self):
        text = (
            "The strap held my camera securely through a rainy hiking trip "
            "and the padding kept my neck entirely comfortable all day"
        )
        assert len(text.split()) == 21
        s = validate_phrase(("strap", text), ["strap"], topic_vocabulary=["strap", "camera straps"])
        assert s.flags == frozenset()
        assert s.word_count == 21

    def test_word_limits_warn_flags(self):
        limits = ValidationLimits(min_words=20, max_words=25)
        short = validate_phrase(("a", "too short"), ["a"], limits=limits)
        assert PhraseFlag.TOO_SHORT in short.flags
        long_text = " ".join(["word"] * 30)
        long = validate_phrase(("a", long_text), ["a"], limits=limits)
        assert PhraseFlag.TOO_LONG in long.flags

    def test_unknown_topic_flag(self):
        s = validate_phrase(("zoom", "Crisp close ups."), ["feel"])
        assert PhraseFlag.UNKNOWN_TOPIC in s.flags

    def test_validation_never_mutates_text(self):
        text = "It deserves 4 stars easily"
        s = validate_phrase(("feel", text), ["feel"])
        assert s.text == text

    def test_strict_mode_promotes_word_flags(self):
        limits = ValidationLimits(strict=True)
        assert PhraseFlag.TOO_SHORT in limits.reject_flags()
        assert PhraseFlag.TOO_SHORT not in ValidationLimits().reject_flags()


class TestStripRatingMentions:
    def test_excision(self):
        assert "4 stars" not in strip_rating_mentions("It deserves 4 stars easily")

    def test_idempotent(self):
        once = strip_rating_mentions("It deserves 4 stars easily, rated 5 by me")
        assert strip_rating_mentions(once) == once


class TestTemplateGenerate:
    def test_deterministic(self):
        a = template_generate("Camera Straps", CAMERA_RATINGS, seed=7)
        b = template_generate("Camera Straps", CAMERA_RATINGS, seed=7)
        assert a == b

    def test_three_stars_draw_from_neutral_tier(self):
        templates = PhraseTemplates.load()
        raw = template_generate("Pajamas", [TopicRating("comfort", 3)], seed=3)
        _, text = parse_response(raw)[0]
        neutral = [t.format(topic="comfort") for t in templates.tiers["neutral"]]
        assert text in neutral

    def test_tier_mapping(self):
        assert tier_for_stars(1) == tier_for_stars(2) == "negative"
        assert tier_for_stars(3) == "neutral"
        assert tier_for_stars(4) == tier_for_stars(5) == "positive"

    def test_seed_changes_keep_topic_set(self):
        topics = {r.topic.lower() for r in CAMERA_RATINGS}
        for seed in range(5):
            raw = template_generate("Camera Straps", CAMERA_RATINGS, seed=seed)
            parsed = {t for t, _ in parse_response(raw)}
            assert parsed == topics

    def test_round_trip_recovers_topic_multiset(self):
        raw = template_generate("Perfumes", [TopicRating("smell", 1), TopicRating("price", 2)], seed=1)
        parsed = [t for t, _ in parse_response(raw)]
        assert parsed == ["smell", "price"]

    def test_synonym_substitution_possible(self):
        raws = {
            template_generate(
                "Camera Straps",
                [TopicRating("strap", 4)],
                seed=seed,
                synonyms={"strap": ["band"]},
            )
            for seed in range(12)
        }
        assert any("band" in raw for raw in raws)


class StaticBackend:
    def __init__(self, response: str):
        self.response = response
        self.calls = 0

    def complete_text(self, prompt: str) -> str:
        self.calls += 1
        return self.response


class FlakyBackend:
    def __init__(self, failures: int, response: str = "x: ok"):
        self.failures = failures
        self.response = response
        self.calls = 0

    def complete_text(self, prompt: str) -> str:
        self.calls += 1
        if self.calls <= self.failures:
            raise BackendError("transport down")
        return self.response


class TestGeneratePhrases:
    def _bundle(self):
        return build_prompt("Camera Straps", None, CAMERA_RATINGS)

    def test_template_backend_byte_identical(self):
        backend = TemplateBackend(seed=11)
        first = generate_phrases(self._bundle(), backend)
        second = generate_phrases(self._bundle(), backend)
        assert first == second

    def test_backend_error_after_retries(self):
        backend = FlakyBackend(failures=99)
        with pytest.raises(BackendError):
            generate_phrases(self._bundle(), backend, retries=2)
        assert backend.calls == 3  # initial try + 2 retries

    def test_recovers_within_retry_budget(self):
        backend = FlakyBackend(failures=2)
        assert generate_phrases(self._bundle(), backend, retries=2) == "x: ok"

    def test_empty_response_raises(self):
        with pytest.raises(EmptyResponse):
            generate_phrases(self._bundle(), StaticBackend("   "))

    def test_mock_response_passed_through(self):
        raw = "Feel: Exactly as provided."
        assert generate_phrases(self._bundle(), StaticBackend(raw)) == raw


class TestSuggest:
    def test_template_pipeline_camera_straps(self):
        lexicon = default_lexicon()
        suggestions = suggest(
            "Camera Straps", None, CAMERA_RATINGS, TemplateBackend(seed=7), lexicon
        )
        assert [s.topic for s in suggestions] == ["feel", "features", "strap", "price"]
        by_topic = {s.topic: s for s in suggestions}
        # 1-2 star topics read negative, the 4-star topic positive
        assert by_topic["feel"].sentiment.compound < 0.5
        assert by_topic["features"].sentiment.compound < 0.5
        assert by_topic["price"].sentiment.compound < 0.5
        assert by_topic["strap"].sentiment.compound > 0.5
        assert all(s.sentiment is not None for s in suggestions)

    def test_output_length_matches_requested(self):
        ratings = [TopicRating(t, 3) for t in ("a", "b", "c")]
        suggestions = suggest("PT", None, ratings, TemplateBackend(seed=0), None)
        assert len(suggestions) == 3

    @given(
        st.lists(
            st.tuples(st.sampled_from(["fit", "wash", "glow", "grip", "trim"]), st.integers(1, 5)),
            min_size=1,
            max_size=5,
            unique_by=lambda pair: pair[0],
        ),
        st.integers(0, 3),
    )
    def test_output_length_property(self, pairs, seed):
        ratings = [TopicRating(t, s) for t, s in pairs]
        suggestions = suggest("PT", None, ratings, TemplateBackend(seed=seed), None)
        assert len(suggestions) == len(ratings)
        assert [s.topic for s in suggestions] == [r.topic.lower() for r in ratings]
        assert all(s.sentiment is not None for s in suggestions)

    def test_missing_topic_placeholder(self):
        backend = StaticBackend("feel: Fine product overall, well worth considering for anyone shopping today.")
        ratings = [TopicRating("feel", 3), TopicRating("price", 2)]
        suggestions = suggest("PT", None, ratings, backend, None)
        assert [s.topic for s in suggestions] == ["feel", "price"]
        assert PhraseFlag.MISSING in suggestions[1].flags
        assert suggestions[1].text == ""
        assert suggestions[1].sentiment is not None

    def test_unrequested_topic_dropped(self):
        backend = StaticBackend(
            "feel: Nice to hold for hours.\nzoom: Crisp close ups in the dark."
        )
        suggestions = suggest("PT", None, [TopicRating("feel", 3)], backend, None)
        assert [s.topic for s in suggestions] == ["feel"]

    def test_sentiment_direction_across_tiers(self):
        lexicon = default_lexicon()
        low = suggest(
            "Perfumes",
            None,
            [TopicRating(t, 1) for t in ("smell", "price", "warm", "long lasting")],
            TemplateBackend(seed=7),
            lexicon,
        )
        high = suggest(
            "Stuffed Toys & Animals",
            None,
            [TopicRating(t, 5) for t in ("size", "softness", "quality", "carry")],
            TemplateBackend(seed=7),
            lexicon,
        )
        mean = lambda xs: sum(xs) / len(xs)
        assert mean([s.sentiment.compound for s in high]) > mean(
            [s.sentiment.compound for s in low]
        )

    def test_backend_failure_uses_fallback(self):
        suggestions = suggest(
            "PT",
            None,
            [TopicRating("feel", 3)],
            FlakyBackend(failures=99),
            None,
            fallback_backend=TemplateBackend(seed=1),
        )
        assert len(suggestions) == 1
        assert suggestions[0].text

    def test_backend_failure_without_fallback_raises(self):
        with pytest.raises(BackendError):
            suggest("PT", None, [TopicRating("feel", 3)], FlakyBackend(failures=99), None)

    def test_reject_flag_regenerated_once_then_surfaced(self):
        backend = StaticBackend(
            "feel: It deserves 4 stars easily because the finish is wonderful overall in person."
        )
        suggestions = suggest("PT", None, [TopicRating("feel", 3)], backend, None)
        # the deterministic backend repeats itself; flag surfaced intact
        assert backend.calls == 2
        assert PhraseFlag.RATING_MENTION in suggestions[0].flags
        assert suggestions[0].text

    def test_regeneration_can_replace_flagged_phrase(self):
        class ImprovingBackend:
            def __init__(self):
                self.calls = 0

            def complete_text(self, prompt: str) -> str:
                self.calls += 1
                if self.calls == 1:
                    return "feel: It deserves 4 stars easily"
                return "feel: The finish feels wonderful and sturdy through daily use around the studio space."

        suggestions = suggest("PT", None, [TopicRating("feel", 3)], ImprovingBackend(), None)
        assert PhraseFlag.RATING_MENTION not in suggestions[0].flags
        assert "wonderful" in suggestions[0].text

    def test_duplicate_rating_last_wins(self):
        suggestions = suggest(
            "PT",
            None,
            [TopicRating("feel", 1), TopicRating("feel", 5)],
            TemplateBackend(seed=2),
            default_lexicon(),
        )
        assert len(suggestions) == 1
        assert suggestions[0].sentiment.compound > 0.5


class TestFineTuneExport:
    def test_context_round_trips_through_prompt_serializer(self):
        record = {
            "product_type": "Camera Straps",
            "product_name": "ClipPro",
            "title": "Solid",
            "text": "Holds firm.",
            "ratings": {"feel": 4},
        }
        out = list(export_finetune_records([record]))
        assert len(out) == 1
        assert out[0].context == format_input_data(
            "Camera Straps", "ClipPro", [TopicRating("feel", 4)]
        )
        assert out[0].response == "Solid\n\nHolds firm."
        assert out[0].instruction

    def test_twelve_records(self, fixtures_dir, tmp_path):
        lines = (fixtures_dir / "finetune" / "rated_reviews.jsonl").read_text().splitlines()
        records = [json.loads(l) for l in lines]
        out_path = tmp_path / "out.jsonl"
        summary = write_finetune_records(records, out_path)
        assert summary.exported == 12
        assert len(out_path.read_text().splitlines()) == 12

    def test_low_coverage_guidance(self, fixtures_dir, tmp_path):
        lines = (fixtures_dir / "finetune" / "rated_reviews.jsonl").read_text().splitlines()
        records = [json.loads(l) for l in lines]
        summary = write_finetune_records(records, tmp_path / "out.jsonl")
        notes = summary.low_coverage_notes()
        assert notes, "small corpora should produce per-PT volume guidance"
        assert "200" in notes[0]

    def test_missing_field_skipped_with_diagnostic(self, tmp_path):
        records = [
            {"product_type": "A", "text": "ok", "ratings": {"x": 3}},
            {"product_type": "B", "ratings": {"x": 3}},  # no text
        ]
        summary = write_finetune_records(records, tmp_path / "out.jsonl")
        assert summary.exported == 1
        assert summary.skipped == 1
        assert summary.diagnostics
