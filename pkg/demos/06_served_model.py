#!/usr/bin/env python3
"""Walkthrough: the whole loop with a real (tiny) neural scorer.

Trains a small randomly initialized encoder on synthetic features, serves it
over HTTP in a background thread, and runs the pipeline against it through
the http backend - the same wiring a fine-tuned full-size model would use.

Needs the server package: pip install -e ./server --no-build-isolation
"""

import json
import random
import socket
import tempfile
import threading
import time
from pathlib import Path

try:
    import uvicorn
    from transformers import BertConfig

    from splax_server.model import load_checkpoint
    from splax_server.serve import create_app
    from splax_server.train import TrainConfig, train
except ImportError as exc:
    raise SystemExit(f"this demo needs the splax-server package installed: {exc}")

from splax import (
    BackendDescriptor,
    ChunkConfig,
    GoldAnswer,
    QaExample,
    build_features,
    evaluate,
    predict,
    tokenize_with_offsets,
)
from splax.pipeline import derive_vocab

WORDS = "alder basalt cobalt delta ember fjord garnet harbor ivory juniper".split()
MODEL_MAX_LEN = 48

rng = random.Random(7)
examples = []
for i in range(24):
    words = [rng.choice(WORDS) for _ in range(rng.randint(25, 80))]
    answer = rng.choice(["1905", "blue heron"])
    pos = rng.randint(0, len(words))
    merged = words[:pos] + answer.split() + words[pos:]
    char_start = sum(len(w) + 1 for w in merged[:pos])
    examples.append(
        QaExample(f"d{i:02d}", f"find the planted phrase {i}", " ".join(merged),
                  (GoldAnswer(answer, char_start),))
    )
vocab = derive_vocab(examples)
cfg = ChunkConfig(segment_length=20, overlap=8, model_max_len=MODEL_MAX_LEN,
                  max_question_tokens=8)

work = Path(tempfile.mkdtemp(prefix="splax-served-"))
features_path = work / "features.jsonl"
with features_path.open("w") as fh:
    for ex in examples:
        tc = tokenize_with_offsets(ex.context, vocab)
        for feature in build_features(ex, tc, cfg, vocab, with_labels=True):
            fh.write(json.dumps(feature.to_json_dict()) + "\n")
print(f"features: {sum(1 for _ in features_path.open())} rows")

config_dir = work / "tinycfg"
BertConfig(
    vocab_size=len(vocab), hidden_size=32, num_hidden_layers=2,
    num_attention_heads=2, intermediate_size=64,
    max_position_embeddings=MODEL_MAX_LEN,
).save_pretrained(config_dir)

result = train(
    features_path,
    TrainConfig(base_model=str(config_dir), epochs=4, learning_rate=1e-3,
                batch_size=8, device="cpu"),
    work / "ckpt",
)
print(f"trained {len(result.step_losses)} steps: "
      f"loss {result.step_losses[0]:.3f} -> {result.step_losses[-1]:.3f}")

model, _ = load_checkpoint(result.checkpoint_dir)
with socket.socket() as sock:
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
server = uvicorn.Server(uvicorn.Config(create_app(model), host="127.0.0.1",
                                       port=port, log_level="error"))
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.05)
print(f"serving on http://127.0.0.1:{port}")

backend = BackendDescriptor(kind="http", endpoint=f"http://127.0.0.1:{port}", batch_size=16)
preds, stats = predict(examples, vocab, cfg, backend)
report = evaluate(examples, preds)
print(f"scored {stats.n_features} chunks over HTTP")
print(f"exact match: {report.exact_match:.2f}   f1: {report.f1:.2f}")

server.should_exit = True
