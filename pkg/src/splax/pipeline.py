"""End-to-end prediction: tokenize, window, score, decode, aggregate.

Features are buffered and scored in backend-sized batches, so HTTP backends
see full batches while memory stays bounded by the buffer, not the dataset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .backend import BackendDescriptor, score_batch
from .chunker import ChunkConfig, build_features
from .data import QaExample
from .errors import NoAnswerError
from .spans import ExtractionConfig, SpanCandidate, aggregate, extract_candidates
from .tokenizer import Vocab, tokenize_with_offsets


@dataclass
class PipelineStats:
    """Chunking bookkeeping for manifests and grid-search rows."""

    n_examples: int = 0
    n_features: int = 0
    n_no_answer: int = 0
    chunks_per_example: dict[str, int] = field(default_factory=dict)

    @property
    def max_chunks(self) -> int:
        return max(self.chunks_per_example.values(), default=0)

    def to_json_dict(self) -> dict:
        return {
            "n_examples": self.n_examples,
            "n_features": self.n_features,
            "n_no_answer": self.n_no_answer,
            "max_chunks_per_example": self.max_chunks,
        }


def derive_vocab(examples: list[QaExample]) -> Vocab:
    """Whole-word vocabulary over every context and question word.

    With it, every basic token is in-vocab, which makes the oracle and
    lexical backends exact on synthetic corpora; real models bring their own
    vocab file instead.
    """
    words: set[str] = set()
    for ex in examples:
        for text in (ex.context, ex.question):
            probe = tokenize_with_offsets(text, _BOOTSTRAP_VOCAB)
            for start, end in probe.offsets:
                words.add(text[start:end].lower())
    return Vocab.from_words(words)


# Minimal vocab used only to run the basic-tokenizer split during vocab
# derivation; every word comes back as [UNK] but offsets are exact.
_BOOTSTRAP_VOCAB = Vocab.from_words([])


def predict(
    examples: list[QaExample],
    vocab: Vocab,
    chunk_cfg: ChunkConfig,
    backend: BackendDescriptor,
    extraction_cfg: ExtractionConfig = ExtractionConfig(),
    *,
    batch_buffer: int = 256,
) -> tuple[dict[str, str], PipelineStats]:
    """Predict one answer string per question.

    The oracle backend needs labels, so features carry them exactly when the
    backend kind is ``oracle``. Questions whose chunks yield no candidate at
    all (empty contexts) predict the empty string and are counted in the
    stats rather than failing the run.
    """
    with_labels = backend.kind == "oracle"
    stats = PipelineStats(n_examples=len(examples))
    preds: dict[str, str] = {}

    buffer: list = []  # (feature, tc) pairs awaiting scoring
    pending: dict[str, list[list[SpanCandidate]]] = {}
    remaining: dict[str, int] = {}

    def flush():
        if not buffer:
            return
        features = [f for f, _ in buffer]
        all_scores = score_batch(features, backend)
        for (feature, tc), scores in zip(buffer, all_scores):
            pending[feature.qid].append(extract_candidates(feature, scores, tc, extraction_cfg))
            remaining[feature.qid] -= 1
            if remaining[feature.qid] == 0:
                try:
                    preds[feature.qid] = aggregate(pending.pop(feature.qid), qid=feature.qid).text
                except NoAnswerError:
                    preds[feature.qid] = ""
                    stats.n_no_answer += 1
                del remaining[feature.qid]
        buffer.clear()

    for ex in examples:
        tc = tokenize_with_offsets(ex.context, vocab)
        features = build_features(ex, tc, chunk_cfg, vocab, with_labels=with_labels)
        stats.n_features += len(features)
        stats.chunks_per_example[ex.qid] = len(features)
        pending[ex.qid] = []
        remaining[ex.qid] = len(features)
        for feature in features:
            buffer.append((feature, tc))
            if len(buffer) >= batch_buffer:
                flush()
    flush()
    return preds, stats
