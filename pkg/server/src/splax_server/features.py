"""Feature-file loading.

Training consumes the feature JSONL emitted by the splax `features`
subcommand, one object per line:

    {qid, chunk_index, input_ids, attention_mask, token_type_ids,
     ctx_start, ctx_end, start_pos, end_pos}

This is the single wire format between the pipeline and the trainer; the
server never re-tokenizes anything.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch

REQUIRED_KEYS = (
    "qid",
    "chunk_index",
    "input_ids",
    "attention_mask",
    "token_type_ids",
    "ctx_start",
    "ctx_end",
    "start_pos",
    "end_pos",
)


class FeatureFileError(ValueError):
    pass


def load_features(path: str | Path, require_labels: bool = True) -> dict[str, torch.Tensor]:
    """Load a feature JSONL file into stacked tensors.

    All rows must share one input length. With ``require_labels`` every row
    needs integer start/end positions (null labels mean the file was emitted
    without --with-labels).
    """
    rows = []
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FeatureFileError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            missing = [k for k in REQUIRED_KEYS if k not in rec]
            if missing:
                raise FeatureFileError(f"{path}:{lineno}: missing keys {missing}")
            rows.append(rec)
    if not rows:
        raise FeatureFileError(f"{path}: no features")

    length = len(rows[0]["input_ids"])
    for i, rec in enumerate(rows):
        if not (
            len(rec["input_ids"]) == len(rec["attention_mask"]) == len(rec["token_type_ids"]) == length
        ):
            raise FeatureFileError(f"{path}: row {i} has inconsistent sequence lengths")
        if require_labels and (rec["start_pos"] is None or rec["end_pos"] is None):
            raise FeatureFileError(
                f"{path}: row {i} has no label; emit features with labels for training"
            )

    out = {
        "input_ids": torch.tensor([r["input_ids"] for r in rows], dtype=torch.long),
        "attention_mask": torch.tensor([r["attention_mask"] for r in rows], dtype=torch.long),
        "token_type_ids": torch.tensor([r["token_type_ids"] for r in rows], dtype=torch.long),
    }
    if require_labels:
        out["start_positions"] = torch.tensor([r["start_pos"] for r in rows], dtype=torch.long)
        out["end_positions"] = torch.tensor([r["end_pos"] for r in rows], dtype=torch.long)
    return out
