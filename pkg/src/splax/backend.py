"""Per-chunk span scorers.

Three interchangeable kinds:

- ``oracle``: peaks exactly at each feature's label; a perfect scorer for
  labeled synthetic data, used to validate the whole pipeline.
- ``lexical``: deterministic question/context word-overlap scoring; lets
  grid-search demos and tests run without any neural model.
- ``http``: client for a remote scoring service speaking the JSON protocol
  ``POST {endpoint}/score`` / ``GET {endpoint}/healthz``.

All kinds return results positionally aligned with their input features.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from .chunker import ChunkFeature
from .errors import BackendUnavailableError, ConfigError, ProtocolError

BACKEND_KINDS = ("oracle", "lexical", "http")

ORACLE_PEAK = 10.0

# Finite stand-in for -inf on positions span decoding must never pick
# ([CLS], question, [SEP], [PAD]); keeps every logit finite on the wire.
MASKED_LOGIT = -1e9

# Word-overlap scoring looks at this many tokens around each position.
LEXICAL_WINDOW = 10

RETRY_BASE_DELAY = 0.25
RETRY_FACTOR = 2.0


@dataclass(frozen=True)
class ChunkScores:
    """Start/end logits over one feature's input positions."""

    start_logits: tuple[float, ...]
    end_logits: tuple[float, ...]


@dataclass(frozen=True)
class BackendDescriptor:
    kind: str
    endpoint: str | None = None
    batch_size: int = 32
    max_in_flight: int = 4
    timeout: float = 30.0
    retries: int = 3

    def __post_init__(self):
        if self.kind not in BACKEND_KINDS:
            raise ConfigError(f"unknown backend kind {self.kind!r}; expected one of {BACKEND_KINDS}")
        if self.kind == "http" and not self.endpoint:
            raise ConfigError("http backend requires an endpoint URL")
        if self.batch_size < 1 or self.max_in_flight < 1:
            raise ConfigError("batch_size and max_in_flight must be >= 1")
        if self.retries < 0:
            raise ConfigError("retries must be >= 0")


def oracle_scores(feature: ChunkFeature) -> ChunkScores:
    """Logits peaking (+10) at the feature's label, 0 elsewhere.

    An unlabeled feature scores like the (0, 0) [CLS] label.
    """
    n = len(feature.input_ids)
    s, e = feature.label if feature.label is not None else (0, 0)
    start = [0.0] * n
    end = [0.0] * n
    start[s] = ORACLE_PEAK
    end[e] = ORACLE_PEAK
    return ChunkScores(tuple(start), tuple(end))


def lexical_scores(feature: ChunkFeature, question_ids) -> ChunkScores:
    """Word-overlap logits: at each context position, the count of question
    token ids inside a LEXICAL_WINDOW-token window centered there (clipped to
    the context region). Identical for start and end; non-context positions
    get the masked sentinel.
    """
    qset = set(question_ids)
    n = len(feature.input_ids)
    logits = [MASKED_LOGIT] * n
    lo, hi = feature.context_input_range
    ids = feature.input_ids
    half = LEXICAL_WINDOW // 2
    for p in range(lo, hi):
        w0 = max(lo, p - half)
        w1 = min(hi, p + half)
        logits[p] = float(sum(1 for j in range(w0, w1) if ids[j] in qset))
    scores = tuple(logits)
    return ChunkScores(scores, scores)


def question_ids_of(feature: ChunkFeature) -> tuple[int, ...]:
    """Question token ids of a feature: everything between [CLS] and the first [SEP]."""
    return feature.input_ids[1 : feature.input_offset_of_context - 1]


class HttpScoringClient:
    """Client for the remote scoring protocol, with retries and bounded concurrency.

    Requests: ``POST {endpoint}/score`` with
    ``{"batch": [{"input_ids": [...], "attention_mask": [...], "token_type_ids": [...]}]}``;
    response ``{"results": [{"start_logits": [...], "end_logits": [...]}]}``.
    Retries use exponential backoff on transport errors and 5xx only; any 4xx
    is fatal.
    """

    def __init__(self, descriptor: BackendDescriptor, session: requests.Session | None = None):
        if descriptor.kind != "http":
            raise ConfigError(f"HttpScoringClient needs an http descriptor, got {descriptor.kind!r}")
        self.descriptor = descriptor
        self.session = session or requests.Session()
        self._base = descriptor.endpoint.rstrip("/")

    def healthy(self) -> bool:
        try:
            resp = self.session.get(f"{self._base}/healthz", timeout=self.descriptor.timeout)
            return resp.status_code == 200
        except requests.RequestException:
            return False

    def _post_batch(self, features: list[ChunkFeature]) -> list[ChunkScores]:
        payload = {
            "batch": [
                {
                    "input_ids": list(f.input_ids),
                    "attention_mask": list(f.attention_mask),
                    "token_type_ids": list(f.token_type_ids),
                }
                for f in features
            ]
        }
        delay = RETRY_BASE_DELAY
        last_error: Exception | None = None
        for attempt in range(self.descriptor.retries + 1):
            if attempt:
                time.sleep(delay)
                delay *= RETRY_FACTOR
            try:
                resp = self.session.post(
                    f"{self._base}/score", json=payload, timeout=self.descriptor.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if 400 <= resp.status_code < 500:
                raise ProtocolError(
                    f"scoring service rejected the request ({resp.status_code}): {resp.text[:200]}"
                )
            if resp.status_code != 200:
                last_error = ProtocolError(f"scoring service returned {resp.status_code}")
                continue
            return self._parse_response(resp, features)
        raise BackendUnavailableError(
            f"backend unavailable after {self.descriptor.retries + 1} attempts: {last_error}"
        )

    @staticmethod
    def _parse_response(resp, features: list[ChunkFeature]) -> list[ChunkScores]:
        try:
            results = resp.json()["results"]
        except (ValueError, KeyError) as exc:
            raise ProtocolError(f"malformed scoring response: {exc}") from exc
        if len(results) != len(features):
            raise ProtocolError(
                f"scoring response has {len(results)} results for {len(features)} features"
            )
        out: list[ChunkScores] = []
        for r, f in zip(results, features):
            start = r.get("start_logits")
            end = r.get("end_logits")
            if (
                not isinstance(start, list)
                or not isinstance(end, list)
                or len(start) != len(f.input_ids)
                or len(end) != len(f.input_ids)
            ):
                raise ProtocolError("scoring response logits do not match feature length")
            if not all(math.isfinite(v) for v in start) or not all(math.isfinite(v) for v in end):
                raise ProtocolError("scoring response contains non-finite logits")
            out.append(ChunkScores(tuple(float(v) for v in start), tuple(float(v) for v in end)))
        return out

    def score(self, features: list[ChunkFeature]) -> list[ChunkScores]:
        """Score features in sub-batches, at most max_in_flight requests outstanding.

        Results come back in input order regardless of completion order.
        """
        size = self.descriptor.batch_size
        batches = [features[i : i + size] for i in range(0, len(features), size)]
        if len(batches) == 1:
            return self._post_batch(batches[0])
        with ThreadPoolExecutor(max_workers=self.descriptor.max_in_flight) as pool:
            parts = list(pool.map(self._post_batch, batches))
        return [scores for part in parts for scores in part]


def score_batch(features: list[ChunkFeature], backend: BackendDescriptor) -> list[ChunkScores]:
    """Score a feature batch with the described backend; results align positionally."""
    if not features:
        raise ValueError("score_batch requires a non-empty batch")
    lengths = {len(f.input_ids) for f in features}
    if len(lengths) != 1:
        raise ValueError(f"features disagree on input length: {sorted(lengths)}")
    if backend.kind == "oracle":
        return [oracle_scores(f) for f in features]
    if backend.kind == "lexical":
        return [lexical_scores(f, question_ids_of(f)) for f in features]
    return HttpScoringClient(backend).score(features)
