#!/usr/bin/env python3
"""Generate the committed test fixtures under tests/data/.

Run from the repository root. The metrics differential fixture freezes the
output of the standard SQuAD v1.1 scorer (tests/reference_squad_scorer.py)
on a randomized 200-case set, so the shipped metrics implementation can be
checked against it without re-running the reference at test time.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

import reference_squad_scorer as ref  # noqa: E402

DATA = ROOT / "tests" / "data"

WORDS = [
    "tower", "river", "bridge", "castle", "harbor", "market", "temple",
    "garden", "valley", "summit", "copper", "silver", "1889", "1903", "42",
    "blue", "northern", "ancient", "the", "a", "an", "old", "great",
]


def make_mini_squad_v11() -> dict:
    def qa(qid, question, context, answer_texts):
        answers = []
        for text in answer_texts:
            start = context.index(text)
            answers.append({"text": text, "answer_start": start})
        return {"id": qid, "question": question, "answers": answers}

    ctx1 = (
        "The Eiffel Tower was completed in 1889. It stands 330 metres tall "
        "and is located in Paris, France."
    )
    ctx2 = (
        "Marie Curie won the Nobel Prize in Physics in 1903 and the Nobel "
        "Prize in Chemistry in 1911."
    )
    ctx3 = (
        "Mount Kilimanjaro is the highest mountain in Africa, rising about "
        "4900 metres from its base."
    )
    return {
        "version": "1.1",
        "data": [
            {
                "title": "Landmarks",
                "paragraphs": [
                    {
                        "context": ctx1,
                        "qas": [
                            qa("q1", "When was the Eiffel Tower completed?", ctx1, ["1889"]),
                            qa("q2", "Where is the Eiffel Tower located?", ctx1,
                               ["Paris, France", "Paris"]),
                        ],
                    },
                    {
                        "context": ctx2,
                        "qas": [
                            qa("q3", "In what year did Marie Curie win the Nobel Prize in Physics?",
                               ctx2, ["1903"]),
                            qa("q4", "In what field was Marie Curie's second Nobel Prize?",
                               ctx2, ["Chemistry"]),
                        ],
                    },
                ],
            },
            {
                "title": "Mountains",
                "paragraphs": [
                    {
                        "context": ctx3,
                        "qas": [
                            qa("q5", "What is the highest mountain in Africa?", ctx3,
                               ["Mount Kilimanjaro", "Kilimanjaro"]),
                            qa("q6", "About how far does Kilimanjaro rise from its base?", ctx3,
                               ["about 4900 metres", "4900 metres"]),
                        ],
                    }
                ],
            },
        ],
    }


def make_mini_squad_v20() -> dict:
    ctx = (
        "The Eiffel Tower was completed in 1889. It stands 330 metres tall "
        "and is located in Paris, France."
    )
    return {
        "version": "v2.0",
        "data": [
            {
                "title": "Landmarks",
                "paragraphs": [
                    {
                        "context": ctx,
                        "qas": [
                            {
                                "id": "p1",
                                "question": "When was the Eiffel Tower completed?",
                                "answers": [{"text": "1889", "answer_start": ctx.index("1889")}],
                                "is_impossible": False,
                            },
                            {
                                "id": "p2",
                                "question": "When was the Eiffel Tower demolished?",
                                "answers": [],
                                "plausible_answers": [
                                    {"text": "1889", "answer_start": ctx.index("1889")}
                                ],
                                "is_impossible": True,
                            },
                        ],
                    }
                ],
            }
        ],
    }


def random_phrase(rng, lo=1, hi=6):
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(lo, hi)))


def make_metrics_differential(n_cases=200, seed=7) -> dict:
    rng = random.Random(seed)
    qas = []
    predictions = {}
    per_case = []
    cases = []
    for i in range(n_cases):
        qid = f"case{i:03d}"
        n_golds = rng.randint(1, 3)
        golds = [random_phrase(rng) for _ in range(n_golds)]
        roll = rng.random()
        if roll < 0.25:
            pred = rng.choice(golds)  # exact copy
        elif roll < 0.5:
            # perturbation of one gold: drop/add/replace a word
            words = rng.choice(golds).split()
            op = rng.random()
            if op < 0.33 and len(words) > 1:
                words.pop(rng.randrange(len(words)))
            elif op < 0.66:
                words.insert(rng.randrange(len(words) + 1), rng.choice(WORDS))
            else:
                words[rng.randrange(len(words))] = rng.choice(WORDS)
            pred = " ".join(words)
        elif roll < 0.6:
            pred = rng.choice(golds).upper() + "!"  # normalization fodder
        else:
            pred = random_phrase(rng)
        # the reference scorer and the shipped one deliberately differ on
        # empty-after-normalization strings; keep those out of the fixture
        if not ref.normalize_answer(pred):
            pred = "granite"
        golds = [g if ref.normalize_answer(g) else "granite ridge" for g in golds]
        predictions[qid] = pred
        em = int(ref.metric_max_over_ground_truths(ref.exact_match_score, pred, golds))
        f1 = float(ref.metric_max_over_ground_truths(ref.f1_score, pred, golds))
        per_case.append([em, f1])
        cases.append({"qid": qid, "pred": pred, "golds": golds})
        qas.append(
            {
                "id": qid,
                "question": f"differential case {i}",
                "answers": [{"text": g, "answer_start": 0} for g in golds],
            }
        )
    dataset = [{"title": "diff", "paragraphs": [{"context": "", "qas": qas}]}]
    expected = ref.evaluate(dataset, predictions)
    return {"cases": cases, "per_case": per_case, "expected": expected}


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    (DATA / "squad_mini_v11.json").write_text(
        json.dumps(make_mini_squad_v11(), indent=1), encoding="utf-8"
    )
    (DATA / "squad_mini_v20.json").write_text(
        json.dumps(make_mini_squad_v20(), indent=1), encoding="utf-8"
    )
    diff = make_metrics_differential()
    (DATA / "metrics_differential.json").write_text(json.dumps(diff, indent=1), encoding="utf-8")
    print("expected aggregate:", diff["expected"])
    print(f"wrote fixtures to {DATA}")


if __name__ == "__main__":
    main()
