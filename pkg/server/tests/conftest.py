import json

import pytest
from transformers import BertConfig

from feature_fixtures import SEQ_LEN, make_feature_rows


@pytest.fixture(scope="session")
def tiny_config_dir(tmp_path_factory):
    cfg = BertConfig(
        vocab_size=32,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=SEQ_LEN + 16,
    )
    out = tmp_path_factory.mktemp("tiny_config")
    cfg.save_pretrained(out)
    return str(out)


@pytest.fixture(scope="session")
def features_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("features") / "features.jsonl"
    rows = make_feature_rows(100)
    out.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return out
