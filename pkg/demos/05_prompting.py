#!/usr/bin/env python3
"""Walkthrough: the chat-model baseline prompts and response cleanup.

Shows the exact prompt sent in direct mode, the second-stage compression
prompt used by chain mode, and how raw chat replies are normalized before
scoring (quote/label stripping, extractiveness check).
"""

from splax import CHAIN2_TEMPLATE, DIRECT_TEMPLATE, postprocess_response, render_prompt

passage = "The lighthouse at Cape Arden was automated in 1974 after a century of keepers."
question = "When was the Cape Arden lighthouse automated?"

print("=" * 70)
print("direct prompt (also chain step 1):")
print("=" * 70)
print(render_prompt(DIRECT_TEMPLATE, passage=passage, question=question))
print()

print("=" * 70)
print("chain step 2 prompt, fed with step 1's cleaned output:")
print("=" * 70)
print(render_prompt(CHAIN2_TEMPLATE, question=question, pred="in 1974"))
print()

print("=" * 70)
print("response cleanup:")
print("=" * 70)
for raw in ['"1974"', "Answer: in 1974", "It was automated in the year 1974, I believe."]:
    answer, violation = postprocess_response(raw, passage)
    print(f"  raw {raw!r}")
    print(f"    -> {answer!r}  format_violation={violation}")
