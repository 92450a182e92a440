#!/usr/bin/env python3
"""Regenerate the committed test fixtures.

The accuracy fixtures are synthetic by construction: prediction files are
built so their aggregate counts land exactly on the reference figures the
evaluation reports replicate (410-slot similarity tables; 5,000-topic
suggestion tables). Run from the repo root:

    python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"


def write_jsonl(path: Path, records: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records), "utf-8")


def spread(total: int, buckets: int) -> list[int]:
    """Distribute `total` over `buckets` integers differing by at most one."""
    base, rem = divmod(total, buckets)
    return [base + 1 if i < rem else base for i in range(buckets)]


def similarity_fixtures() -> None:
    n_pts, k = 41, 10
    pts = [f"pt-{i:02d}" for i in range(1, n_pts + 1)]
    gold = {pt: [f"g-{pt}-{j}" for j in range(k)] for pt in pts}
    write_jsonl(
        FIXTURES / "similarity" / "gold.jsonl",
        [{"product_type": pt, "similar": gold[pt]} for pt in pts],
    )
    for method, correct_total in (("levenshtein", 186), ("cosine", 318), ("llm", 342)):
        per_pt = spread(correct_total, n_pts)
        records = []
        for pt, correct in zip(pts, per_pt):
            preds = gold[pt][:correct] + [f"d-{pt}-{j}" for j in range(k - correct)]
            records.append({"product_type": pt, "similar": preds})
        write_jsonl(FIXTURES / "similarity" / f"pred_{method}.jsonl", records)


def topic_accuracy_fixtures() -> None:
    n_pts, k = 500, 10

    # "Available" group: every product type has a gold top-10 list.
    pts = [f"apt-{i:03d}" for i in range(1, n_pts + 1)]
    gold = {pt: [f"t-{pt}-{j}" for j in range(k)] for pt in pts}
    relevant_per_pt = spread(4172, n_pts)
    suggested = {}
    judged = []
    marked_irrelevant = 0
    for pt, relevant in zip(pts, relevant_per_pt):
        extras = [f"x-{pt}-{j}" for j in range(k - relevant)]
        suggested[pt] = gold[pt][:relevant] + extras
        if extras and marked_irrelevant < 128:
            judged.append({"product_type": pt, "topic": extras[0], "relevant": False})
            marked_irrelevant += 1
    write_jsonl(
        FIXTURES / "topics" / "gold_available.jsonl",
        [{"product_type": pt, "topics": gold[pt]} for pt in pts],
    )
    write_jsonl(
        FIXTURES / "topics" / "suggested_available.jsonl",
        [{"product_type": pt, "topics": suggested[pt]} for pt in pts],
    )
    write_jsonl(FIXTURES / "topics" / "judged_available.jsonl", judged)

    # "Not available" group: no gold; relevance judged against description topics.
    pts = [f"npt-{i:03d}" for i in range(1, n_pts + 1)]
    relevant_per_pt = spread(3760, n_pts)
    suggested = {}
    judged = []
    marked_irrelevant = 0
    for pt, relevant in zip(pts, relevant_per_pt):
        topics = [f"t-{pt}-{j}" for j in range(k)]
        suggested[pt] = topics
        for topic in topics[:relevant]:
            judged.append({"product_type": pt, "topic": topic, "relevant": True})
        for topic in topics[relevant:]:
            if marked_irrelevant < 476:
                judged.append({"product_type": pt, "topic": topic, "relevant": False})
                marked_irrelevant += 1
    write_jsonl(
        FIXTURES / "topics" / "gold_not_available.jsonl",
        [{"product_type": pt, "topics": []} for pt in pts],
    )
    write_jsonl(
        FIXTURES / "topics" / "suggested_not_available.jsonl",
        [{"product_type": pt, "topics": suggested[pt]} for pt in pts],
    )
    write_jsonl(FIXTURES / "topics" / "judged_not_available.jsonl", judged)


def review_fixtures() -> None:
    # 12 reviews over 2 product types: 7 + 5.
    records = []
    texts_a = [
        "Powerful suction and easy to empty.",
        "The suction is strong on carpet.",
        "Light and the battery lasts a while.",
        "Suction power dropped after a month.",
        "Easy to store and quiet enough.",
        "Great for pet hair, solid suction.",
        "The filter clogs but suction is fine.",
    ]
    texts_b = [
        "Sturdy bags that never leak.",
        "Strong and the tie closes well.",
        "The smell is neutral and they stretch.",
        "A bit thin but the price is right.",
        "Durable enough for kitchen use.",
    ]
    for i, text in enumerate(texts_a, start=1):
        records.append(
            {
                "id": f"rv-a-{i:02d}",
                "product_type": "Stick Vacuums",
                "product_name": "TurboLite Cordless" if i == 1 else None,
                "text": text,
                "stars": (i % 5) + 1,
            }
        )
    for i, text in enumerate(texts_b, start=1):
        records.append(
            {
                "id": f"rv-b-{i:02d}",
                "product_type": "Garbage Bags",
                "product_name": None,
                "text": text,
                "stars": ((i + 2) % 5) + 1,
            }
        )
    write_jsonl(FIXTURES / "reviews" / "reviews_small.jsonl", records)

    # Mining corpus: "battery" in 6 of 10 docs, "screen" in 4 of 10.
    mining_texts = [
        "The battery lasts long and the screen is bright",
        "Great battery and sharp screen",
        "battery life is great",
        "the battery drains fast",
        "solid battery performance",
        "battery could be better",
        "the screen scratches easily",
        "lovely screen quality",
        "the price is fair",
        "the price seems fair",
    ]
    records = [
        {
            "id": f"rv-m-{i:02d}",
            "product_type": "Tablet Computers",
            "product_name": None,
            "text": text,
            "stars": 4,
        }
        for i, text in enumerate(mining_texts, start=1)
    ]
    write_jsonl(FIXTURES / "reviews" / "mining_corpus.jsonl", records)


def catalog_fixtures() -> None:
    labels = [
        "sturdiness", "durability", "strength", "smell", "leak",
        "price", "size", "ease of use", "material", "tie",
    ]
    synonyms = {
        "sturdiness": ["sturdy"],
        "durability": ["durable"],
        "smell": ["odor"],
        "ease of use": ["easy to use"],
    }
    topics = [
        {
            "label": label,
            "synonyms": synonyms.get(label, []),
            "support": 320 - 10 * i,
            "source": "mined",
        }
        for i, label in enumerate(labels)
    ]
    camera_topics = [
        {"label": label, "synonyms": syns, "support": 200 - 10 * i, "source": "mined"}
        for i, (label, syns) in enumerate(
            [
                ("feel", []),
                ("features", []),
                ("strap", ["straps"]),
                ("price", ["cost"]),
                ("comfort", ["comfortable"]),
                ("material", []),
            ]
        )
    ]
    perfume_topics = [
        {"label": label, "synonyms": [], "support": 150 - 10 * i, "source": "mined"}
        for i, label in enumerate(
            ["smell", "price", "quality", "sweet", "long lasting", "over powering", "warm"]
        )
    ]
    toy_topics = [
        {"label": label, "synonyms": [], "support": 150 - 5 * i, "source": "mined"}
        for i, label in enumerate(
            ["baby", "price", "size", "softness", "quality", "carry", "as a gift",
             "lights", "learning", "color", "soft", "entertainment", "appearance"]
        )
    ]
    top_topics = [
        {"label": label, "synonyms": [], "support": 150 - 10 * i, "source": "mined"}
        for i, label in enumerate(
            ["fit", "material", "color", "comfort", "appearance", "flattering",
             "wash", "stretch", "size"]
        )
    ]
    records = [
        {"product_type": "Garbage Bags", "topics": topics},
        {"product_type": "Camera Straps", "topics": camera_topics},
        {"product_type": "Perfumes", "topics": perfume_topics},
        {"product_type": "Stuffed Toys & Animals", "topics": toy_topics},
        {"product_type": "Ruffled Tops", "topics": top_topics},
    ]
    write_jsonl(FIXTURES / "catalog" / "catalog_snapshot.jsonl", records)


def bleu_fixtures() -> None:
    # 7 pairs per method, 4 with a token-count-matched reference (rate 4/7).
    # References are shared; candidates vary in closeness per method column.
    cases = [
        {
            "id": "p1",
            "references": ["The strap is comfortable and well made"],
            "strong": "The strap is comfortable and nicely made",
            "medium": "The strap seems comfortable and quite sturdy",
            "weak": "A belt that felt acceptable and rather plain",
        },
        {
            "id": "p2",
            "references": ["The scent fades quickly after application"],
            "strong": "The scent fades fast after application",
            "medium": "The scent disappears almost immediately after spraying",
            "weak": "The bottle looks pretty on the shelf",
        },
        {
            "id": "p3",
            "references": ["Suction power exceeded my expectations completely"],
            "strong": "Suction power exceeded my expectations totally",
            "medium": "Suction strength surpassed my hopes entirely today",
            "weak": "Cleaning was generally acceptable in most rooms",
        },
        {
            "id": "p4",
            "references": ["The price felt excessive for the quality"],
            "strong": "The price felt excessive for this quality",
            "medium": "The cost seemed high for the quality",
            "weak": "Shipping arrived two days later than promised",
        },
        # Length-mismatched pairs: ineligible under the equal-length rule.
        {
            "id": "p5",
            "references": ["The dimensions are just right for little hands"],
            "strong": "The dimensions are right for hands",
            "medium": "Dimensions felt fine",
            "weak": "Too big",
        },
        {
            "id": "p6",
            "references": ["The material is gentle and pleasant to touch"],
            "strong": "The material is gentle and pleasant",
            "medium": "Material felt gentle overall",
            "weak": "It is a shirt",
        },
        {
            "id": "p7",
            "references": ["Lightweight and convenient for travel"],
            "strong": "Lightweight and convenient for my travel bag",
            "medium": "Quite light and handy on trips overall",
            "weak": "The box was damaged on arrival sadly",
        },
    ]
    for column in ("strong", "medium", "weak"):
        records = [
            {"id": c["id"], "candidate": c[column], "references": c["references"]}
            for c in cases
        ]
        write_jsonl(FIXTURES / "bleu" / f"corpus_{column}.jsonl", records)


def finetune_fixtures() -> None:
    records = []
    for i in range(1, 13):
        records.append(
            {
                "product_type": "Camera Straps" if i <= 7 else "Perfumes",
                "product_name": "ClipPro Strap" if i <= 7 else "Bloom Mist",
                "title": f"Review {i}",
                "text": "Comfortable to wear all day and the clasp feels secure.",
                "ratings": {"feel": 4, "price": 3},
            }
        )
    write_jsonl(FIXTURES / "finetune" / "rated_reviews.jsonl", records)


def main() -> None:
    similarity_fixtures()
    topic_accuracy_fixtures()
    review_fixtures()
    catalog_fixtures()
    bleu_fixtures()
    finetune_fixtures()
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()
