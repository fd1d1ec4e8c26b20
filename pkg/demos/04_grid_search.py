#!/usr/bin/env python3
"""Walkthrough: sweeping window length and overlap, no neural model needed.

The lexical backend scores spans by question-word overlap, which is weak but
deterministic, so the sweep machinery (per-pair pipeline runs, CSV
checkpointing, SVG heatmap) can be exercised end to end on a laptop. Expect
low absolute numbers; the point is the shape of the tooling, not the scores.
"""

import random
import tempfile
from pathlib import Path

from splax import BackendDescriptor, GoldAnswer, GridSpec, QaExample, emit_heatmap, run_grid
from splax.pipeline import derive_vocab

WORDS = "lagoon marble nectar onyx pumice quartz reed saffron tundra umber".split()

rng = random.Random(3)
examples = []
for i in range(60):
    words = [rng.choice(WORDS) for _ in range(rng.randint(60, 240))]
    answer = rng.choice(["silver maple", "northern lights", "1905"])
    pos = rng.randint(0, len(words))
    merged = words[:pos] + answer.split() + words[pos:]
    char_start = sum(len(w) + 1 for w in merged[:pos])
    examples.append(
        QaExample(
            qid=f"g{i:03d}",
            question=f"find {answer} in the passage",
            context=" ".join(merged),
            answers=(GoldAnswer(text=answer, char_start=char_start),),
        )
    )
vocab = derive_vocab(examples)

spec = GridSpec(
    lengths=(32, 64, 96, 128),
    overlaps=(0, 16, 48),
    backend=BackendDescriptor(kind="lexical"),
    model_max_len=192,
    max_question_tokens=32,
)

out_dir = Path(tempfile.mkdtemp(prefix="splax-grid-"))
csv_path = out_dir / "grid.csv"
svg_path = out_dir / "grid.svg"

result = run_grid(spec, examples, vocab, out_csv=csv_path)
print(f"{'L':>4} {'O':>4} {'EM':>7} {'F1':>7} {'chunks':>7}")
for row in result.rows:
    print(f"{row.length:>4} {row.overlap:>4} {row.exact_match:>7.2f} {row.f1:>7.2f} "
          f"{row.total_chunks:>7}")
if result.invalid_pairs:
    print(f"skipped invalid pairs (overlap >= length): {result.invalid_pairs}")

emit_heatmap(result, "f1", svg_path)
print(f"\ncsv:     {csv_path}")
print(f"heatmap: {svg_path}")
