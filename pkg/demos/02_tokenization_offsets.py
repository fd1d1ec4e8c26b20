#!/usr/bin/env python3
"""Walkthrough: WordPiece tokenization that never loses character positions.

Every token remembers the half-open source-character span it came from, so
an answer span can travel characters -> tokens -> characters and come back
with its original casing, accents, and punctuation intact.
"""

from splax import Vocab, char_span_to_token_span, tokenize_with_offsets

vocab = Vocab.from_tokens(
    ("[PAD]", "[UNK]", "[CLS]", "[SEP]",
     "the", "eiffel", "tower", "was", "finished", "in", "1889", ",", ".", "paris",
     "un", "##aff", "##able")
)

text = "The Eiffel Tower was finished in 1889, in Paris."
tc = tokenize_with_offsets(text, vocab)

print(f"text: {text!r}")
print(f"{'token':>10}  span        source slice")
for token, (start, end) in zip(tc.tokens, tc.offsets):
    print(f"{token:>10}  ({start:2d},{end:2d})  {text[start:end]!r}")
print()

answer = "Eiffel Tower"
char_start = text.index(answer)
span = char_span_to_token_span(tc, char_start, char_start + len(answer))
print(f"answer {answer!r} at chars [{char_start}, {char_start + len(answer)})")
print(f"maps to tokens [{span[0]}, {span[1]}] = {tc.tokens[span[0]:span[1] + 1]}")
print(f"slicing those tokens' spans recovers: {tc.slice_text(span[0], span[1])!r}")
print()

sub = tokenize_with_offsets("unaffable", vocab)
print("subword pieces partition their word's span exactly:")
for token, span in zip(sub.tokens, sub.offsets):
    print(f"  {token:>7} covers {span} = {'unaffable'[span[0]:span[1]]!r}")
