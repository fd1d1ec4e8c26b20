"""Sweep (segment length x overlap) configurations over a dataset.

Each valid pair runs the full predict + evaluate pipeline; rows are
checkpointed to CSV as they complete so an interrupted sweep can resume.
Pairs with overlap >= length are skipped and recorded as invalid.
"""

from __future__ import annotations

import csv
import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .backend import BackendDescriptor
from .chunker import DEFAULT_MAX_QUESTION_TOKENS, DEFAULT_MODEL_MAX_LEN, ChunkConfig
from .data import QaExample
from .errors import BackendUnavailableError, ValidationError
from .metrics import evaluate
from .pipeline import predict
from .spans import ExtractionConfig
from .tokenizer import Vocab

# Brackets the length 128-256 / overlap 64 neighborhood that performs well.
DEFAULT_LENGTHS = (64, 128, 192, 256, 320)
DEFAULT_OVERLAPS = (0, 32, 64, 128)

CSV_COLUMNS = ("length", "overlap", "exact_match", "f1", "wall_time_s", "total_chunks")


@dataclass(frozen=True)
class GridSpec:
    lengths: tuple[int, ...] = DEFAULT_LENGTHS
    overlaps: tuple[int, ...] = DEFAULT_OVERLAPS
    backend: BackendDescriptor = BackendDescriptor(kind="lexical")
    model_max_len: int = DEFAULT_MODEL_MAX_LEN
    max_question_tokens: int = DEFAULT_MAX_QUESTION_TOKENS
    extraction: ExtractionConfig = ExtractionConfig()

    def pairs(self) -> list[tuple[int, int]]:
        """All (length, overlap) combinations, sorted."""
        return sorted((l, o) for l in set(self.lengths) for o in set(self.overlaps))

    def chunk_config(self, length: int, overlap: int) -> ChunkConfig:
        # The question budget shrinks for lengths near model_max_len so every
        # in-range pair stays runnable.
        budget = min(self.max_question_tokens, self.model_max_len - length - 3)
        return ChunkConfig(
            segment_length=length,
            overlap=overlap,
            model_max_len=self.model_max_len,
            max_question_tokens=budget,
        )


@dataclass(frozen=True)
class GridRow:
    length: int
    overlap: int
    exact_match: float
    f1: float
    wall_time_s: float
    total_chunks: int

    def to_csv_fields(self) -> list[str]:
        return [
            str(self.length),
            str(self.overlap),
            f"{self.exact_match:.6f}",
            f"{self.f1:.6f}",
            f"{self.wall_time_s:.6f}",
            str(self.total_chunks),
        ]


@dataclass
class GridResult:
    rows: list[GridRow] = field(default_factory=list)
    invalid_pairs: list[tuple[int, int]] = field(default_factory=list)


def _read_completed(path: Path) -> dict[tuple[int, int], GridRow]:
    rows: dict[tuple[int, int], GridRow] = {}
    with path.open(newline="") as fh:
        for rec in csv.DictReader(fh):
            row = GridRow(
                length=int(rec["length"]),
                overlap=int(rec["overlap"]),
                exact_match=float(rec["exact_match"]),
                f1=float(rec["f1"]),
                wall_time_s=float(rec["wall_time_s"]),
                total_chunks=int(rec["total_chunks"]),
            )
            rows[(row.length, row.overlap)] = row
    return rows


def run_grid(
    spec: GridSpec,
    examples: list[QaExample],
    vocab: Vocab,
    out_csv: str | Path | None = None,
    *,
    resume: bool = True,
    max_parallel: int = 1,
    clock=time.perf_counter,
) -> GridResult:
    """Run the sweep; rows come back sorted by (length, overlap).

    With ``out_csv``, every completed row is appended immediately and, on a
    backend failure, a ``<out_csv>.resume`` marker records the pair to retry;
    rerunning with ``resume=True`` skips pairs already in the file.

    Grid points run sequentially by default so wall times are comparable;
    ``max_parallel > 1`` runs them concurrently when the backend can take
    the load (per-point wall times then overlap). ``clock`` exists so tests
    can pin wall times; the pipeline itself is deterministic for
    deterministic backends.
    """
    if not examples:
        raise ValidationError("grid search needs a non-empty dataset")
    if max_parallel < 1:
        raise ValidationError("max_parallel must be >= 1")
    out_path = Path(out_csv) if out_csv is not None else None
    completed: dict[tuple[int, int], GridRow] = {}
    if out_path is not None and resume and out_path.exists():
        completed = _read_completed(out_path)

    result = GridResult()
    pending: list[tuple[int, int]] = []
    for length, overlap in spec.pairs():
        if overlap >= length:
            result.invalid_pairs.append((length, overlap))
        elif (length, overlap) in completed:
            result.rows.append(completed[(length, overlap)])
        else:
            pending.append((length, overlap))

    write_header = out_path is not None and (not out_path.exists() or not completed)
    fh = None
    writer = None
    write_lock = threading.Lock()
    if out_path is not None:
        fh = out_path.open("w" if write_header else "a", newline="")
        writer = csv.writer(fh)
        if write_header:
            writer.writerow(CSV_COLUMNS)

    resume_marker = out_path.with_suffix(out_path.suffix + ".resume") if out_path else None

    def run_point(pair: tuple[int, int]) -> GridRow:
        length, overlap = pair
        cfg = spec.chunk_config(length, overlap)
        started = clock()
        try:
            preds, stats = predict(examples, vocab, cfg, spec.backend, spec.extraction)
        except BackendUnavailableError:
            if resume_marker is not None:
                resume_marker.write_text(json.dumps({"next": [length, overlap]}), encoding="utf-8")
            raise
        report = evaluate(examples, preds)
        row = GridRow(
            length=length,
            overlap=overlap,
            exact_match=report.exact_match,
            f1=report.f1,
            wall_time_s=clock() - started,
            total_chunks=stats.n_features,
        )
        if writer is not None:
            with write_lock:
                writer.writerow(row.to_csv_fields())
                fh.flush()
        return row

    try:
        if max_parallel == 1:
            for pair in pending:
                result.rows.append(run_point(pair))
        else:
            with ThreadPoolExecutor(max_workers=max_parallel) as pool:
                result.rows.extend(pool.map(run_point, pending))
    finally:
        if fh is not None:
            fh.close()
    if resume_marker is not None and resume_marker.exists():
        resume_marker.unlink()
    result.rows.sort(key=lambda r: (r.length, r.overlap))
    return result


# --- SVG heatmap ---------------------------------------------------------

CELL_W, CELL_H = 84, 46
MARGIN_LEFT, MARGIN_TOP = 120, 70
LOW_COLOR = (40, 52, 120)
HIGH_COLOR = (250, 220, 80)


def _cell_color(value: float, vmin: float, vmax: float) -> str:
    t = 0.5 if vmax == vmin else (value - vmin) / (vmax - vmin)
    rgb = [round(lo + t * (hi - lo)) for lo, hi in zip(LOW_COLOR, HIGH_COLOR)]
    return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"


def emit_heatmap(result: GridResult, metric: str, path: str | Path) -> Path:
    """Write a heatmap SVG: lengths as columns, overlaps as rows.

    One value-bearing cell per grid row (text = value to 2 decimals), with the
    color scale anchored to the result's min/max. Invalid pairs are hatched.
    """
    if metric not in ("em", "f1"):
        raise ValidationError(f"metric must be 'em' or 'f1', got {metric!r}")
    if not result.rows:
        raise ValidationError("cannot draw a heatmap from an empty grid result")
    value_of = (lambda r: r.exact_match) if metric == "em" else (lambda r: r.f1)
    lengths = sorted({r.length for r in result.rows} | {l for l, _ in result.invalid_pairs})
    overlaps = sorted({r.overlap for r in result.rows} | {o for _, o in result.invalid_pairs})
    by_pair = {(r.length, r.overlap): value_of(r) for r in result.rows}
    invalid = set(result.invalid_pairs)
    vmin = min(by_pair.values())
    vmax = max(by_pair.values())

    width = MARGIN_LEFT + CELL_W * len(lengths) + 30
    height = MARGIN_TOP + CELL_H * len(overlaps) + 40
    title = "exact match" if metric == "em" else "F1"
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="sans-serif" font-size="13">',
        "<defs>"
        '<pattern id="hatch" width="8" height="8" patternTransform="rotate(45)" '
        'patternUnits="userSpaceOnUse">'
        '<line x1="0" y1="0" x2="0" y2="8" stroke="#999" stroke-width="2"/>'
        "</pattern></defs>",
        f'<text x="{MARGIN_LEFT}" y="24" font-size="16">{title} by segment length and overlap</text>',
        f'<text x="{MARGIN_LEFT + CELL_W * len(lengths) / 2:.0f}" y="{MARGIN_TOP - 28}" '
        f'text-anchor="middle">segment length</text>',
        f'<text x="18" y="{MARGIN_TOP + CELL_H * len(overlaps) / 2:.0f}" '
        f'transform="rotate(-90 18 {MARGIN_TOP + CELL_H * len(overlaps) / 2:.0f})" '
        f'text-anchor="middle">overlap</text>',
    ]
    for ci, length in enumerate(lengths):
        x = MARGIN_LEFT + ci * CELL_W + CELL_W / 2
        parts.append(f'<text x="{x:.0f}" y="{MARGIN_TOP - 8}" text-anchor="middle">{length}</text>')
    for ri, overlap in enumerate(overlaps):
        y = MARGIN_TOP + ri * CELL_H + CELL_H / 2 + 4
        parts.append(
            f'<text x="{MARGIN_LEFT - 10}" y="{y:.0f}" text-anchor="end">{overlap}</text>'
        )
    for ri, overlap in enumerate(overlaps):
        for ci, length in enumerate(lengths):
            x = MARGIN_LEFT + ci * CELL_W
            y = MARGIN_TOP + ri * CELL_H
            if (length, overlap) in by_pair:
                value = by_pair[(length, overlap)]
                parts.append(
                    f'<rect class="cell" x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" '
                    f'fill="{_cell_color(value, vmin, vmax)}" stroke="white"/>'
                )
                t = 0.5 if vmax == vmin else (value - vmin) / (vmax - vmin)
                text_fill = "#ffffff" if t < 0.55 else "#1a1a1a"
                parts.append(
                    f'<text class="cell-value" x="{x + CELL_W / 2:.0f}" y="{y + CELL_H / 2 + 4:.0f}" '
                    f'text-anchor="middle" fill="{text_fill}">{value:.2f}</text>'
                )
            elif (length, overlap) in invalid:
                parts.append(
                    f'<rect class="invalid" x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" '
                    f'fill="url(#hatch)" stroke="white"/>'
                )
    parts.append("</svg>")
    out = Path(path)
    out.write_text("\n".join(parts), encoding="utf-8")
    return out
