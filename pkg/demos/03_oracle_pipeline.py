#!/usr/bin/env python3
"""Walkthrough: the full pipeline against the perfect-scorer backend.

The oracle backend peaks exactly at each labeled answer position, so any
loss of answers would have to come from the pipeline itself - tokenization,
windowing, labeling, decoding, or aggregation. Exact Match 100 here is the
end-to-end correctness check.
"""

import random

from splax import BackendDescriptor, ChunkConfig, GoldAnswer, QaExample, evaluate, predict
from splax.pipeline import derive_vocab

WORDS = "alder basalt cobalt delta ember fjord garnet harbor ivory juniper".split()
ANSWERS = ["1905", "copper kettle", "blue heron", "42"]

rng = random.Random(0)
examples = []
for i in range(50):
    words = [rng.choice(WORDS) for _ in range(rng.randint(80, 500))]
    answer = rng.choice(ANSWERS)
    pos = rng.randint(0, len(words))
    merged = words[:pos] + answer.split() + words[pos:]
    context = " ".join(merged)
    char_start = sum(len(w) + 1 for w in merged[:pos])
    examples.append(
        QaExample(
            qid=f"q{i:03d}",
            question=f"what was planted near word {pos}",
            context=context,
            answers=(GoldAnswer(text=answer, char_start=char_start),),
        )
    )

vocab = derive_vocab(examples)
cfg = ChunkConfig(segment_length=128, overlap=64, model_max_len=192, max_question_tokens=32)
print(f"{len(examples)} synthetic questions, contexts up to ~500 tokens")
print(f"windows of {cfg.segment_length} context tokens, overlap {cfg.overlap}")

preds, stats = predict(examples, vocab, cfg, BackendDescriptor(kind="oracle"))
report = evaluate(examples, preds)

print(f"features built: {stats.n_features} (max {stats.max_chunks} windows per question)")
print(f"exact match: {report.exact_match}")
print(f"f1:          {report.f1}")
print()
print("sample predictions:")
for qid in list(preds)[:5]:
    print(f"  {qid}: {preds[qid]!r}")
