import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest

from splax.backend import (
    MASKED_LOGIT,
    BackendDescriptor,
    HttpScoringClient,
    lexical_scores,
    oracle_scores,
    question_ids_of,
    score_batch,
)
from splax.chunker import ChunkConfig, build_features
from splax.errors import BackendUnavailableError, ConfigError, ProtocolError
from splax.pipeline import derive_vocab
from splax.tokenizer import tokenize_with_offsets
from util import make_synthetic_examples


@pytest.fixture(scope="module")
def features_and_ctx():
    examples = make_synthetic_examples(3, seed=21, n_words_range=(40, 60))
    vocab = derive_vocab(examples)
    cfg = ChunkConfig(segment_length=16, overlap=4, model_max_len=48, max_question_tokens=16)
    out = []
    for ex in examples:
        tc = tokenize_with_offsets(ex.context, vocab)
        out.extend(build_features(ex, tc, cfg, vocab, with_labels=True))
    return out, vocab


class TestDescriptor:
    def test_http_requires_endpoint(self):
        with pytest.raises(ConfigError):
            BackendDescriptor(kind="http")

    def test_unknown_kind_rejected(self):
        with pytest.raises(ConfigError):
            BackendDescriptor(kind="neural")

    def test_bounds(self):
        with pytest.raises(ConfigError):
            BackendDescriptor(kind="oracle", batch_size=0)
        with pytest.raises(ConfigError):
            BackendDescriptor(kind="oracle", max_in_flight=0)


class TestOracleScores:
    def test_peaks_at_label(self, features_and_ctx):
        features, _ = features_and_ctx
        labeled = next(f for f in features if f.label != (0, 0))
        scores = oracle_scores(labeled)
        s, e = labeled.label
        assert scores.start_logits.index(max(scores.start_logits)) == s
        assert scores.end_logits.index(max(scores.end_logits)) == e
        assert scores.start_logits[s] == 10.0
        assert sum(v != 0.0 for v in scores.start_logits) == 1

    def test_cls_label_peaks_at_zero(self, features_and_ctx):
        features, _ = features_and_ctx
        unlabeled = next(f for f in features if f.label == (0, 0))
        scores = oracle_scores(unlabeled)
        assert scores.start_logits[0] == 10.0
        assert scores.end_logits[0] == 10.0


def brute_force_lexical(feature, question_ids):
    """Window-count oracle written independently of the implementation."""
    qset = set(question_ids)
    lo, hi = feature.context_input_range
    out = []
    for p in range(len(feature.input_ids)):
        if not lo <= p < hi:
            out.append(MASKED_LOGIT)
            continue
        count = 0
        for j in range(p - 5, p + 5):
            if lo <= j < hi and feature.input_ids[j] in qset:
                count += 1
        out.append(float(count))
    return out


class TestLexicalScores:
    def test_matches_brute_force_window_count(self, features_and_ctx):
        features, _ = features_and_ctx
        for f in features:
            qids = question_ids_of(f)
            scores = lexical_scores(f, qids)
            expected = brute_force_lexical(f, qids)
            assert list(scores.start_logits) == expected
            assert scores.end_logits == scores.start_logits

    def test_no_shared_vocabulary_gives_flat_zero_context(self, features_and_ctx):
        features, vocab = features_and_ctx
        f = features[0]
        scores = lexical_scores(f, question_ids=[10**9])  # id not present anywhere
        lo, hi = f.context_input_range
        assert all(v == 0.0 for v in scores.start_logits[lo:hi])

    def test_empty_question_set_all_zero(self, features_and_ctx):
        features, _ = features_and_ctx
        f = features[0]
        scores = lexical_scores(f, question_ids=())
        lo, hi = f.context_input_range
        assert all(v == 0.0 for v in scores.start_logits[lo:hi])

    def test_non_context_positions_masked_finite(self, features_and_ctx):
        features, _ = features_and_ctx
        f = features[0]
        scores = lexical_scores(f, question_ids_of(f))
        lo, hi = f.context_input_range
        for p, v in enumerate(scores.start_logits):
            if not lo <= p < hi:
                assert v == MASKED_LOGIT
            assert math.isfinite(v)

    def test_contiguous_question_match_peaks_at_center(self, features_and_ctx):
        features, _ = features_and_ctx
        f = features[0]
        lo, hi = f.context_input_range
        qids = f.input_ids[lo : min(hi, lo + 10)]  # question = a context run
        scores = lexical_scores(f, qids)
        peak = max(scores.start_logits)
        assert peak >= min(10, hi - lo) - 1
        assert scores.start_logits.index(peak) >= lo


class TestScoreBatchDispatch:
    def test_positional_alignment_under_permutation(self, features_and_ctx):
        features, _ = features_and_ctx
        backend = BackendDescriptor(kind="lexical")
        base = score_batch(features, backend)
        perm = list(reversed(features))
        permuted = score_batch(perm, backend)
        assert permuted == list(reversed(base))

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            score_batch([], BackendDescriptor(kind="oracle"))


class _ScoreHandler(BaseHTTPRequestHandler):
    fail_first = 0
    calls = []

    def log_message(self, *args):
        pass

    def do_GET(self):
        if self.path == "/healthz":
            self.send_response(200)
            self.end_headers()
            self.wfile.write(b"ok")
        else:
            self.send_response(404)
            self.end_headers()

    def do_POST(self):
        cls = type(self)
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        cls.calls.append(len(body["batch"]))
        if cls.fail_first > 0:
            cls.fail_first -= 1
            self.send_response(503)
            self.end_headers()
            return
        results = []
        for item in body["batch"]:
            n = len(item["input_ids"])
            # echo a deterministic function of the ids so alignment is checkable
            results.append(
                {
                    "start_logits": [float(v % 7) for v in item["input_ids"]],
                    "end_logits": [float(v % 5) for v in item["input_ids"]],
                }
            )
        payload = json.dumps({"results": results}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture()
def http_server():
    _ScoreHandler.fail_first = 0
    _ScoreHandler.calls = []
    server = HTTPServer(("127.0.0.1", 0), _ScoreHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


class TestHttpClient:
    def test_healthz_and_scoring_alignment(self, http_server, features_and_ctx):
        features, _ = features_and_ctx
        backend = BackendDescriptor(kind="http", endpoint=http_server, batch_size=2)
        client = HttpScoringClient(backend)
        assert client.healthy()
        scores = client.score(features)
        assert len(scores) == len(features)
        for f, s in zip(features, scores):
            assert s.start_logits == tuple(float(v % 7) for v in f.input_ids)
            assert s.end_logits == tuple(float(v % 5) for v in f.input_ids)

    def test_sub_batching_respects_batch_size(self, http_server, features_and_ctx):
        features, _ = features_and_ctx
        backend = BackendDescriptor(kind="http", endpoint=http_server, batch_size=3)
        HttpScoringClient(backend).score(features)
        assert all(size <= 3 for size in _ScoreHandler.calls)
        assert sum(_ScoreHandler.calls) == len(features)

    def test_retries_recover_from_transient_5xx(self, http_server, features_and_ctx):
        features, _ = features_and_ctx
        _ScoreHandler.fail_first = 2
        backend = BackendDescriptor(kind="http", endpoint=http_server, batch_size=64, retries=3)
        scores = HttpScoringClient(backend).score(features[:2])
        assert len(scores) == 2

    def test_exhausted_retries_raise_backend_unavailable(self, http_server, features_and_ctx):
        features, _ = features_and_ctx
        _ScoreHandler.fail_first = 99
        backend = BackendDescriptor(kind="http", endpoint=http_server, retries=1)
        with pytest.raises(BackendUnavailableError):
            HttpScoringClient(backend).score(features[:1])

    def test_unreachable_endpoint_raises_backend_unavailable(self, features_and_ctx):
        features, _ = features_and_ctx
        backend = BackendDescriptor(
            kind="http", endpoint="http://127.0.0.1:9", retries=0, timeout=0.5
        )
        with pytest.raises(BackendUnavailableError):
            HttpScoringClient(backend).score(features[:1])
        assert not HttpScoringClient(backend).healthy()


class _BadLengthHandler(_ScoreHandler):
    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        results = [{"start_logits": [0.0], "end_logits": [0.0]} for _ in body["batch"]]
        payload = json.dumps({"results": results}).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


def test_length_mismatch_is_a_protocol_error(features_and_ctx):
    features, _ = features_and_ctx
    server = HTTPServer(("127.0.0.1", 0), _BadLengthHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        backend = BackendDescriptor(kind="http", endpoint=f"http://127.0.0.1:{server.server_port}")
        with pytest.raises(ProtocolError):
            HttpScoringClient(backend).score(features[:1])
    finally:
        server.shutdown()


class _SlowCountingHandler(_ScoreHandler):
    """Tracks how many /score requests are being served at once."""

    active = 0
    peak = 0
    lock = threading.Lock()

    def do_POST(self):
        cls = _SlowCountingHandler
        with cls.lock:
            cls.active += 1
            cls.peak = max(cls.peak, cls.active)
        try:
            import time as _time

            _time.sleep(0.1)
            super().do_POST()
        finally:
            with cls.lock:
                cls.active -= 1


def test_max_in_flight_bounds_concurrency(features_and_ctx):
    from http.server import ThreadingHTTPServer

    features, _ = features_and_ctx
    _SlowCountingHandler.active = 0
    _SlowCountingHandler.peak = 0
    _SlowCountingHandler.calls = []
    _SlowCountingHandler.fail_first = 0  # shadow whatever earlier tests left on the parent
    server = ThreadingHTTPServer(("127.0.0.1", 0), _SlowCountingHandler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    try:
        backend = BackendDescriptor(
            kind="http",
            endpoint=f"http://127.0.0.1:{server.server_port}",
            batch_size=1,  # one request per feature -> many chances to overlap
            max_in_flight=2,
        )
        scores = HttpScoringClient(backend).score(features)
        assert len(scores) == len(features)
        assert _SlowCountingHandler.peak <= 2
        assert _SlowCountingHandler.peak >= 2  # the pool really did run concurrently
    finally:
        server.shutdown()
