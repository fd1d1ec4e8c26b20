"""Synthetic-data builders shared across the test suite.

Everything is seeded and deterministic. Contexts are whitespace-delimited
word sequences, so with a whole-word vocab every word is exactly one token
and planted answers align with token boundaries.
"""

from __future__ import annotations

import random

from splax.data import GoldAnswer, QaExample

WORD_POOL = [
    "alder", "basalt", "cobalt", "delta", "ember", "fjord", "garnet", "harbor",
    "ivory", "juniper", "krill", "lagoon", "marble", "nectar", "onyx", "pumice",
    "quartz", "reed", "saffron", "tundra", "umber", "vellum", "walnut", "yarrow",
    "zephyr", "anchor", "breeze", "cinder", "drift", "eddy",
]

ANSWER_POOL = [
    "1905", "copper kettle", "seventeen", "blue heron", "granite ridge",
    "silver maple", "42", "northern lights", "old lighthouse", "river otter",
]


def make_context(rng: random.Random, n_words: int) -> list[str]:
    return [rng.choice(WORD_POOL) for _ in range(n_words)]


def plant_answer(words: list[str], answer: str, pos: int) -> tuple[str, int]:
    """Insert answer words at word index pos; returns (context, char_start)."""
    answer_words = answer.split()
    merged = words[:pos] + answer_words + words[pos:]
    char_start = sum(len(w) + 1 for w in merged[:pos])
    context = " ".join(merged)
    assert context[char_start : char_start + len(answer)] == answer
    return context, char_start


def make_synthetic_examples(
    n: int,
    seed: int = 0,
    *,
    n_words_range: tuple[int, int] = (40, 600),
    max_plant_margin: int = 0,
) -> list[QaExample]:
    """n questions with planted, word-aligned answers at random positions.

    ``max_plant_margin`` > 0 keeps the plant position at least that many
    words from the end, when callers need room after the answer.
    """
    rng = random.Random(seed)
    examples = []
    for i in range(n):
        words = make_context(rng, rng.randint(*n_words_range))
        answer = rng.choice(ANSWER_POOL)
        hi = max(0, len(words) - max_plant_margin)
        pos = rng.randint(0, hi)
        context, char_start = plant_answer(words, answer, pos)
        examples.append(
            QaExample(
                qid=f"syn{i:04d}",
                question=f"which phrase was planted near position {pos}",
                context=context,
                answers=(GoldAnswer(text=answer, char_start=char_start),),
            )
        )
    return examples
