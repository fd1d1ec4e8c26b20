"""Overlapping-window context splitting and model-input assembly.

A context of N tokens is cut into k = max(1, ceil((N - O) / (L - O)))
windows of L context tokens each, where consecutive windows share O tokens
(stride L - O). Window i starts at i * (L - O); the final window ends at N
and may be shorter. Each window is packaged as
``[CLS] question [SEP] window [SEP] [PAD]...`` padded to a fixed total
input length.
"""

from __future__ import annotations

from dataclasses import dataclass

from .data import QaExample
from .errors import ConfigError, ValidationError
from .tokenizer import TokenizedContext, Vocab, char_span_to_token_span, tokenize_with_offsets

DEFAULT_MODEL_MAX_LEN = 384
DEFAULT_MAX_QUESTION_TOKENS = 64

# Label meaning "this window does not contain the answer": both positions
# point at [CLS].
CLS_LABEL = (0, 0)


@dataclass(frozen=True)
class ChunkConfig:
    """Window-splitting parameters.

    ``segment_length`` counts context tokens per window; the total model
    input is fixed at ``model_max_len`` including [CLS], the (possibly
    truncated) question, both [SEP]s, and padding.
    """

    segment_length: int
    overlap: int
    model_max_len: int = DEFAULT_MODEL_MAX_LEN
    max_question_tokens: int = DEFAULT_MAX_QUESTION_TOKENS

    def __post_init__(self):
        if not 0 <= self.overlap < self.segment_length:
            raise ConfigError(
                f"need 0 <= overlap < segment_length, got overlap={self.overlap}, "
                f"segment_length={self.segment_length}"
            )
        if self.max_question_tokens < 1:
            raise ConfigError("max_question_tokens must be >= 1")
        budget = self.segment_length + self.max_question_tokens + 3
        if budget > self.model_max_len:
            raise ConfigError(
                f"segment_length + max_question_tokens + 3 = {budget} exceeds "
                f"model_max_len = {self.model_max_len}"
            )

    @property
    def stride(self) -> int:
        return self.segment_length - self.overlap


@dataclass(frozen=True)
class ChunkFeature:
    """One model-ready window.

    ``(ctx_start, ctx_end)`` is the half-open window into the context token
    sequence; ``input_offset_of_context`` is where that window begins inside
    ``input_ids``. ``label``, when present and not (0, 0), points at the
    answer span in input-token coordinates.
    """

    qid: str
    chunk_index: int
    input_ids: tuple[int, ...]
    attention_mask: tuple[int, ...]
    token_type_ids: tuple[int, ...]
    ctx_start: int
    ctx_end: int
    input_offset_of_context: int
    label: tuple[int, int] | None = None

    @property
    def context_input_range(self) -> tuple[int, int]:
        """Half-open input-position range holding context tokens."""
        lo = self.input_offset_of_context
        return lo, lo + (self.ctx_end - self.ctx_start)

    def to_json_dict(self) -> dict:
        start_pos, end_pos = self.label if self.label is not None else (None, None)
        return {
            "qid": self.qid,
            "chunk_index": self.chunk_index,
            "input_ids": list(self.input_ids),
            "attention_mask": list(self.attention_mask),
            "token_type_ids": list(self.token_type_ids),
            "ctx_start": self.ctx_start,
            "ctx_end": self.ctx_end,
            "start_pos": start_pos,
            "end_pos": end_pos,
        }


def chunk_count(n: int, length: int, overlap: int) -> int:
    """Number of windows covering n context tokens: max(1, ceil((n-O)/(L-O))).

    Clamped to 1 so short and empty contexts still produce one window.
    """
    if overlap < 0 or overlap >= length:
        raise ConfigError(f"need 0 <= overlap < length, got overlap={overlap}, length={length}")
    if n < 0:
        raise ValueError(f"token count must be >= 0, got {n}")
    stride = length - overlap
    return max(1, -(-(n - overlap) // stride))


def window_spans(n: int, length: int, overlap: int) -> list[tuple[int, int]]:
    """Half-open window spans over ``range(n)``; window i starts at i*(L-O)."""
    stride = length - overlap
    return [(i * stride, min(i * stride + length, n)) for i in range(chunk_count(n, length, overlap))]


def split_context(tc: TokenizedContext, cfg: ChunkConfig) -> list[tuple[int, int]]:
    """Window spans over a tokenized context (see :func:`window_spans`)."""
    return window_spans(len(tc.tokens), cfg.segment_length, cfg.overlap)


def build_features(
    example: QaExample,
    tc: TokenizedContext,
    cfg: ChunkConfig,
    vocab: Vocab,
    with_labels: bool = False,
) -> list[ChunkFeature]:
    """Assemble one ChunkFeature per window of the example's context.

    Layout per window: ``[CLS] question [SEP] window [SEP] [PAD]...``, with
    the question tail-truncated to ``cfg.max_question_tokens``. With labels,
    the first gold answer is mapped to input-token coordinates; windows that
    do not fully contain it get the (0, 0) [CLS] label, as do unanswerable
    examples.
    """
    question_ids = tokenize_with_offsets(example.question, vocab).ids
    if not question_ids:
        raise ValidationError(f"question for qid {example.qid!r} tokenizes to 0 tokens")
    question_ids = question_ids[: cfg.max_question_tokens]

    answer_span = None
    if with_labels and example.answers:
        gold = example.answers[0]
        answer_span = char_span_to_token_span(tc, gold.char_start, gold.char_start + len(gold.text))

    prefix = (vocab.cls_id,) + question_ids + (vocab.sep_id,)
    offset = len(prefix)
    features: list[ChunkFeature] = []
    for chunk_index, (ws, we) in enumerate(split_context(tc, cfg)):
        body = prefix + tc.ids[ws:we] + (vocab.sep_id,)
        n_pad = cfg.model_max_len - len(body)
        input_ids = body + (vocab.pad_id,) * n_pad
        attention_mask = (1,) * len(body) + (0,) * n_pad
        token_type_ids = (0,) * offset + (1,) * (we - ws + 1) + (0,) * n_pad

        label = None
        if with_labels:
            label = CLS_LABEL
            if answer_span is not None:
                ts, te = answer_span
                if ws <= ts and te < we:
                    label = (offset + ts - ws, offset + te - ws)
        features.append(
            ChunkFeature(
                qid=example.qid,
                chunk_index=chunk_index,
                input_ids=input_ids,
                attention_mask=attention_mask,
                token_type_ids=token_type_ids,
                ctx_start=ws,
                ctx_end=we,
                input_offset_of_context=offset,
                label=label,
            )
        )
    return features
