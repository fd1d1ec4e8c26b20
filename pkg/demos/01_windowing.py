#!/usr/bin/env python3
"""Walkthrough: splitting a long token sequence into overlapping windows.

A context of N tokens is cut into k = max(1, ceil((N - O) / (L - O)))
windows of L tokens, each window starting (L - O) tokens after the last so
neighbours share exactly O tokens. Shared tokens are what rescue answers
that would otherwise straddle a boundary.
"""

from splax import chunk_count, window_spans

N, L, O = 1000, 384, 128
print(f"context tokens N={N}, window length L={L}, overlap O={O}")
print(f"stride S = L - O = {L - O}")
print(f"window count k = ceil((N - O) / (L - O)) = {chunk_count(N, L, O)}")
print()

for n, length, overlap in [(500, 256, 64), (300, 384, 64), (10, 384, 64), (0, 384, 64)]:
    spans = window_spans(n, length, overlap)
    print(f"N={n:4d} L={length} O={overlap}: {len(spans)} window(s) -> {spans}")
print()

print("neighbouring windows always share exactly O tokens:")
spans = window_spans(900, 256, 64)
for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
    print(f"  ({s1:3d},{e1:3d}) and ({s2:3d},{e2:3d}) share tokens [{s2}, {e1}) = {e1 - s2}")
print()

print("an answer span fits in SOME window whenever it has at most O+1 tokens,")
print("no matter where it falls:")
L, O = 128, 64
for answer in [(60, 125), (120, 180), (190, 191)]:
    spans = window_spans(400, L, O)
    containing = [w for w in spans if w[0] <= answer[0] and answer[1] <= w[1]]
    print(f"  answer tokens [{answer[0]}, {answer[1]}): contained by {containing or 'NO window'}")
