"""Span decoding: per-chunk candidate search and cross-chunk aggregation.

A candidate is a (start, end) token pair inside a chunk's context region
with start <= end and span length below a cap, scored as
start_logit + end_logit. Each chunk contributes its n-best candidates; the
answer for a question is the highest-scoring candidate over all its chunks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import ChunkScores
from .chunker import ChunkFeature
from .errors import ConfigError, InternalError, NoAnswerError
from .tokenizer import TokenizedContext


SCORE_MODES = ("raw", "normalized")


@dataclass(frozen=True)
class ExtractionConfig:
    """Decoding bounds and the cross-chunk score convention.

    ``score_mode="raw"`` compares raw logit sums across chunks;
    ``"normalized"`` log-softmaxes start and end logits over each chunk's
    context region first, so chunks compete on probabilities instead. The
    ranking within a single chunk is identical either way.
    """

    max_answer_tokens: int = 30
    n_best: int = 20
    score_mode: str = "raw"

    def __post_init__(self):
        if self.max_answer_tokens < 1 or self.n_best < 1:
            raise ConfigError("max_answer_tokens and n_best must be >= 1")
        if self.score_mode not in SCORE_MODES:
            raise ConfigError(f"score_mode must be one of {SCORE_MODES}, got {self.score_mode!r}")


@dataclass(frozen=True)
class SpanCandidate:
    """A scored token span in one chunk plus its recovered source text.

    Token positions are input coordinates; char positions index the original
    context string, so ``text`` is always an exact context substring.
    """

    qid: str
    chunk_index: int
    token_start: int
    token_end: int
    score: float
    char_start: int
    char_end: int
    text: str

    @property
    def sort_key(self):
        """Global preference order: higher score, then earlier chunk, earlier
        start, shorter span."""
        return (-self.score, self.chunk_index, self.token_start, self.token_end - self.token_start)


def _logsumexp(x: np.ndarray) -> float:
    peak = float(x.max())
    return peak + float(np.log(np.exp(x - peak).sum()))


def detokenize_answer(token_start: int, token_end: int, tc: TokenizedContext) -> str:
    """Original-casing substring covered by context tokens token_start..token_end."""
    if not 0 <= token_start <= token_end < len(tc.tokens):
        raise InternalError(
            f"token span ({token_start}, {token_end}) out of range for {len(tc.tokens)} tokens"
        )
    return tc.slice_text(token_start, token_end)


def extract_candidates(
    feature: ChunkFeature,
    scores: ChunkScores,
    tc: TokenizedContext,
    cfg: ExtractionConfig = ExtractionConfig(),
) -> list[SpanCandidate]:
    """The n-best valid (start, end) pairs of one chunk, best first.

    Valid means: both positions inside the chunk's context region (never
    [CLS], question, [SEP], or [PAD]), start <= end, and span length at most
    ``max_answer_tokens``. Exact over all valid pairs, not a top-k-per-side
    approximation. Empty when the chunk has an empty context window.
    """
    lo, hi = feature.context_input_range
    m = hi - lo
    if m == 0:
        return []
    start = np.asarray(scores.start_logits[lo:hi], dtype=np.float64)
    end = np.asarray(scores.end_logits[lo:hi], dtype=np.float64)
    if cfg.score_mode == "normalized":
        start = start - _logsumexp(start)
        end = end - _logsumexp(end)
    total = start[:, None] + end[None, :]
    rows = np.arange(m)[:, None]
    cols = np.arange(m)[None, :]
    valid = (cols >= rows) & (cols - rows < cfg.max_answer_tokens)
    flat = np.where(valid, total, -np.inf).ravel()

    n_valid = int(valid.sum())
    k = min(cfg.n_best, n_valid)
    threshold = np.partition(flat, flat.size - k)[flat.size - k]
    picked = np.flatnonzero((flat >= threshold) & valid.ravel())

    candidates = []
    for idx in picked:
        s, e = divmod(int(idx), m)
        ctx_s = feature.ctx_start + s
        ctx_e = feature.ctx_start + e
        char_start = tc.offsets[ctx_s][0]
        char_end = tc.offsets[ctx_e][1]
        candidates.append(
            SpanCandidate(
                qid=feature.qid,
                chunk_index=feature.chunk_index,
                token_start=lo + s,
                token_end=lo + e,
                score=float(flat[idx]),
                char_start=char_start,
                char_end=char_end,
                text=tc.text[char_start:char_end],
            )
        )
    candidates.sort(key=lambda c: c.sort_key)
    return candidates[: cfg.n_best]


def aggregate(candidates_per_chunk, qid: str = "") -> SpanCandidate:
    """The single best candidate across all chunks of one question.

    Ties break toward the lower chunk index, then lower token start, then the
    shorter span. Raises :class:`NoAnswerError` when every list is empty.
    """
    best: SpanCandidate | None = None
    for candidates in candidates_per_chunk:
        for cand in candidates:
            if best is None or cand.sort_key < best.sort_key:
                best = cand
            if not qid:
                qid = cand.qid
    if best is None:
        raise NoAnswerError(qid or "<unknown>")
    return best
