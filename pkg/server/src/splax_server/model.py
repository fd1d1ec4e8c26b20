"""Span-scoring model: a transformer encoder, an optional highway head, and a
linear start/end projection.

The encoder comes from the pretrained-model ecosystem: a model name resolves
to pretrained weights (needs the model available locally or downloadable),
while a config directory or JSON file builds a randomly initialized encoder,
which is what tests and smoke runs use.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch
from torch import nn
from transformers import AutoConfig, AutoModel

CHECKPOINT_WEIGHTS = "model.pt"
CHECKPOINT_TRAIN_CONFIG = "train_config.json"


class HighwayLayer(nn.Module):
    """Gated residual transform: y = H(x) * T(x) + x * (1 - T(x)).

    T is a sigmoid gate; H is an affine map with ReLU. With T forced to 0 the
    layer is the identity; with T forced to 1 it is H alone.
    """

    def __init__(self, hidden_size: int):
        super().__init__()
        self.transform = nn.Linear(hidden_size, hidden_size)
        self.gate = nn.Linear(hidden_size, hidden_size)

    def transform_only(self, x: torch.Tensor) -> torch.Tensor:
        """H(x), exposed so the gate-limit behavior can be checked exactly."""
        return torch.relu(self.transform(x))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        t = torch.sigmoid(self.gate(x))
        return self.transform_only(x) * t + x * (1.0 - t)


class SpanScoringModel(nn.Module):
    """Encoder + (optional highway) + linear head emitting start/end logits."""

    def __init__(self, config, highway_layer: bool = False):
        super().__init__()
        self.config = config
        self.encoder = AutoModel.from_config(config)
        self.highway = HighwayLayer(config.hidden_size) if highway_layer else None
        self.qa_head = nn.Linear(config.hidden_size, 2)

    @property
    def max_input_len(self) -> int:
        return int(self.config.max_position_embeddings)

    def forward(self, input_ids, attention_mask, token_type_ids):
        hidden = self.encoder(
            input_ids=input_ids,
            attention_mask=attention_mask,
            token_type_ids=token_type_ids,
        ).last_hidden_state
        if self.highway is not None:
            hidden = self.highway(hidden)
        logits = self.qa_head(hidden)
        start_logits, end_logits = logits.split(1, dim=-1)
        return start_logits.squeeze(-1), end_logits.squeeze(-1)

    def span_loss(self, start_logits, end_logits, start_positions, end_positions):
        loss_fn = nn.CrossEntropyLoss()
        return (loss_fn(start_logits, start_positions) + loss_fn(end_logits, end_positions)) / 2


def build_model(base_model: str, highway_layer: bool = False, pretrained: bool | None = None):
    """Build the span model; pretrained weights only for named models.

    ``pretrained=None`` picks automatically: local config paths initialize
    randomly, names load pretrained encoder weights.
    """
    path = Path(base_model)
    local_config = path.is_dir() or path.suffix == ".json"
    if pretrained is None:
        pretrained = not local_config
    config = AutoConfig.from_pretrained(base_model)
    model = SpanScoringModel(config, highway_layer=highway_layer)
    if pretrained:
        model.encoder = AutoModel.from_pretrained(base_model)
    return model


def save_checkpoint(model: SpanScoringModel, train_config_dict: dict, out_dir: str | Path) -> Path:
    """Checkpoint layout: HF-style config.json next to the weights and the
    training-config snapshot."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model.config.save_pretrained(out)
    torch.save(model.state_dict(), out / CHECKPOINT_WEIGHTS)
    (out / CHECKPOINT_TRAIN_CONFIG).write_text(
        json.dumps(train_config_dict, indent=2), encoding="utf-8"
    )
    return out


def load_checkpoint(ckpt_dir: str | Path) -> tuple[SpanScoringModel, dict]:
    ckpt = Path(ckpt_dir)
    train_config = json.loads((ckpt / CHECKPOINT_TRAIN_CONFIG).read_text(encoding="utf-8"))
    config = AutoConfig.from_pretrained(ckpt)
    model = SpanScoringModel(config, highway_layer=train_config.get("highway_layer", False))
    state = torch.load(ckpt / CHECKPOINT_WEIGHTS, map_location="cpu", weights_only=True)
    model.load_state_dict(state)
    model.eval()
    return model, train_config
