#!/usr/bin/env python3
"""Regenerates data/fixtures deterministically.

The fixture corpus plants keyphrases from a closed vocabulary: keyphrase
tokens appear only inside gold spans and fillers only outside, so a healthy
tagger can overfit it quickly. The fixation records give keyphrase tokens
long reading times and fillers short ones, which also makes them a usable
attention-supervision signal. Three filler words are held out of the
fixation corpus so lexicon expansion has real work to do.
"""

import json
import random
from pathlib import Path

KEYWORDS = [
    "budget", "reform", "climate", "energy", "tax",
    "vote", "deal", "policy", "debate", "summit",
]
FILLERS = [
    "the", "a", "about", "today", "now", "people", "talk", "big",
    "new", "with", "on", "for", "we", "they", "watch", "live",
]
# Absent from the fixation records; expansion must cover these.
OUT_OF_OSEC = {"they", "watch", "live"}

OUT = Path(__file__).resolve().parent.parent / "data" / "fixtures"


def make_posts(rng):
    posts = []
    for _ in range(50):
        pre = rng.choices(FILLERS, k=rng.randint(1, 3))
        span = rng.sample(KEYWORDS, k=rng.randint(1, 3))
        post = rng.choices(FILLERS, k=rng.randint(1, 3))
        tokens = pre + span + post
        start = len(pre)
        posts.append({"tokens": tokens, "gold_spans": [[start, start + len(span)]]})
    return posts


def write_posts(rng):
    with open(OUT / "posts50.jsonl", "w") as f:
        for post in make_posts(rng):
            f.write(json.dumps(post, separators=(",", ":")) + "\n")


def write_osec(rng):
    rows = []
    context = 0
    for word in KEYWORDS:
        base = rng.uniform(360.0, 470.0)
        for _ in range(3):
            context += 1
            rows.append((word, round(base + rng.uniform(-15.0, 15.0), 1), f"s{context}"))
    for word in FILLERS:
        if word in OUT_OF_OSEC:
            continue
        base = rng.uniform(70.0, 150.0)
        for _ in range(3):
            context += 1
            rows.append((word, round(base + rng.uniform(-10.0, 10.0), 1), f"s{context}"))
    # One skipped occurrence: zero reading time stays in the mean.
    rows.append(("the", "-", "s9999"))
    rng.shuffle(rows)
    with open(OUT / "osec_sample.tsv", "w") as f:
        f.write("word\ttrt_ms\tcontext_id\n")
        for word, trt, ctx in rows:
            f.write(f"{word}\t{trt}\t{ctx}\n")


def write_freq(rng):
    with open(OUT / "bnc_sample.tsv", "w") as f:
        for word in FILLERS:
            f.write(f"{word}\t{rng.randint(120000, 900000)}\n")
        for word in KEYWORDS:
            f.write(f"{word}\t{rng.randint(2000, 9000)}\n")


def write_embeddings(rng):
    # Two clusters in 16 dimensions: keyphrase words live in the first half,
    # fillers in the second, so cosine neighbors stay within a group.
    with open(OUT / "embeddings_sample.txt", "w") as f:
        for group, words in enumerate((KEYWORDS, FILLERS)):
            for word in words:
                vec = []
                for d in range(16):
                    strong = (d // 8) == group
                    scale = 1.0 if strong else 0.08
                    vec.append(scale * (0.6 + 0.4 * rng.random()))
                f.write(word + " " + " ".join(f"{v:.6f}" for v in vec) + "\n")


def write_tweets():
    lines = [
        "Senate will vote on the #BudgetDeal tonight",
        "Watch the #ClimateSummit coverage with us now",
        "no hashtag in this one at all",
        "Big #TaxReform debate with experts today",
        "#LeadingTag cannot sit first in the tweet",
        "trailing tags get dropped too #TrailingTag",
        "two tags #AlphaOne and #BetaTwo disqualify a tweet",
        '{"text": "People want the #EnergyPolicy vote now"}',
        "They watch the #NASA launch live",
        "the #budgetdeal2024 tag keeps its lowercase prefix",
        "new talk about a #GreenEnergySummit for the fall",
        "we are live at the #policy debate",
    ]
    with open(OUT / "tweets.txt", "w") as f:
        f.write("\n".join(lines) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write_posts(random.Random(7))
    write_osec(random.Random(11))
    write_freq(random.Random(13))
    write_embeddings(random.Random(17))
    write_tweets()
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
