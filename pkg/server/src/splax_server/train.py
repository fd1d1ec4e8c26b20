"""Fine-tuning with optional mixed precision.

Forward passes run under autocast (fp16 on CUDA, bf16 on CPU) and the loss
is scaled before backprop so small half-precision gradients survive; the
optimizer still updates full-precision master weights. Loss is checked for
finiteness on every step and logged.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
from torch.utils.data import DataLoader, TensorDataset

from .features import load_features
from .model import build_model, save_checkpoint

logger = logging.getLogger("splax_server.train")


@dataclass
class TrainConfig:
    base_model: str
    epochs: int = 3
    mixed_precision: bool = True
    learning_rate: float = 3e-5
    batch_size: int = 8
    highway_layer: bool = False
    device: str = "cuda" if torch.cuda.is_available() else "cpu"
    seed: int = 0
    max_steps: int | None = None  # cap for smoke runs; None = full epochs

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


def _check_finite(loss: torch.Tensor, step: int, scale: float) -> None:
    if not torch.isfinite(loss):
        raise RuntimeError(
            f"non-finite loss {loss.item()} at step {step} (loss scale {scale}); aborting"
        )


@dataclass
class TrainResult:
    checkpoint_dir: Path
    step_losses: list[float] = field(default_factory=list)
    wall_time_s: float = 0.0


def train(features_path: str | Path, cfg: TrainConfig, out_dir: str | Path) -> TrainResult:
    """Fine-tune on a feature file and write a checkpoint directory.

    The checkpoint holds the encoder config, the full model weights, the
    TrainConfig snapshot, and the per-step loss log.
    """
    torch.manual_seed(cfg.seed)
    data = load_features(features_path, require_labels=True)
    dataset = TensorDataset(
        data["input_ids"],
        data["attention_mask"],
        data["token_type_ids"],
        data["start_positions"],
        data["end_positions"],
    )
    loader = DataLoader(dataset, batch_size=cfg.batch_size, shuffle=True,
                        generator=torch.Generator().manual_seed(cfg.seed))

    device = torch.device(cfg.device)
    model = build_model(cfg.base_model, highway_layer=cfg.highway_layer).to(device)
    model.train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)

    amp_dtype = torch.float16 if device.type == "cuda" else torch.bfloat16
    scaler = torch.amp.GradScaler(device.type, enabled=cfg.mixed_precision)
    if cfg.mixed_precision and not scaler.is_enabled():
        raise RuntimeError("mixed precision requested but loss scaling is unavailable")

    started = time.perf_counter()
    losses: list[float] = []
    step = 0
    done = False
    for epoch in range(cfg.epochs):
        epoch_started = time.perf_counter()
        for batch in loader:
            input_ids, attention_mask, token_type_ids, starts, ends = (
                t.to(device) for t in batch
            )
            optimizer.zero_grad(set_to_none=True)
            with torch.autocast(device.type, dtype=amp_dtype, enabled=cfg.mixed_precision):
                start_logits, end_logits = model(input_ids, attention_mask, token_type_ids)
                loss = model.span_loss(start_logits, end_logits, starts, ends)
            _check_finite(loss, step, scaler.get_scale() if scaler.is_enabled() else 1.0)
            scaler.scale(loss).backward()
            scaler.step(optimizer)
            scaler.update()
            losses.append(float(loss.detach()))
            logger.info("epoch %d step %d loss %.4f", epoch, step, losses[-1])
            step += 1
            if cfg.max_steps is not None and step >= cfg.max_steps:
                done = True
                break
        logger.info("epoch %d finished in %.1fs", epoch, time.perf_counter() - epoch_started)
        if done:
            break

    model.eval()
    snapshot = asdict(cfg)
    snapshot["steps_run"] = step
    ckpt = save_checkpoint(model, snapshot, out_dir)
    (ckpt / "train_log.json").write_text(json.dumps({"step_losses": losses}), encoding="utf-8")
    return TrainResult(
        checkpoint_dir=ckpt,
        step_losses=losses,
        wall_time_s=time.perf_counter() - started,
    )
