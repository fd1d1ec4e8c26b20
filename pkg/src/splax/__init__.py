"""Extractive question answering over long texts.

Long contexts are split into overlapping token windows sized for a
fixed-length model input; each window is scored for answer start/end
positions by a pluggable backend; the highest-scoring span across windows
becomes the answer. The package also ships SQuAD-style EM/F1 scoring, a
chunking-parameter grid search with CSV/SVG output, and chat-model
prompting baselines.
"""

from .backend import (
    BackendDescriptor,
    ChunkScores,
    HttpScoringClient,
    lexical_scores,
    oracle_scores,
    question_ids_of,
    score_batch,
)
from .chunker import (
    ChunkConfig,
    ChunkFeature,
    build_features,
    chunk_count,
    split_context,
    window_spans,
)
from .config import RunConfig
from .data import (
    GoldAnswer,
    QaExample,
    parse_predictions,
    parse_squad,
    to_squad_json,
    write_predictions,
)
from .errors import (
    BackendUnavailableError,
    ConfigError,
    InternalError,
    NoAnswerError,
    ParseError,
    ProtocolError,
    SplaxError,
    TemplateError,
    ValidationError,
)
from .gridsearch import GridResult, GridRow, GridSpec, emit_heatmap, run_grid
from .llm import (
    CHAIN1_TEMPLATE,
    CHAIN2_TEMPLATE,
    DIRECT_TEMPLATE,
    ChatCompletionClient,
    LlmRunRecord,
    PromptTemplate,
    postprocess_response,
    render_prompt,
    run_llm_eval,
)
from .metrics import EvalReport, evaluate, exact_match, f1_score, normalize_answer
from .pipeline import PipelineStats, derive_vocab, predict
from .spans import (
    ExtractionConfig,
    SpanCandidate,
    aggregate,
    detokenize_answer,
    extract_candidates,
)
from .tokenizer import (
    TokenizedContext,
    Vocab,
    char_span_to_token_span,
    load_vocab,
    tokenize_with_offsets,
)

__version__ = "0.1.0"
