"""SQuAD-format dataset and prediction file handling.

The on-disk layout is the standard one: a top-level ``"data"`` array of
articles, each holding ``"paragraphs"``, each holding ``"qas"`` with
``"answers": [{"text", "answer_start"}]``. Files are flattened into a list
of :class:`QaExample`, the canonical example model used everywhere else.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ParseError, ValidationError

SCHEMA_MODES = ("v1_1", "v2_0", "auto")


@dataclass(frozen=True)
class GoldAnswer:
    """One annotated answer: its exact text and character offset into the context."""

    text: str
    char_start: int


@dataclass(frozen=True)
class QaExample:
    """One question with its context passage and gold answers.

    ``answers`` is empty only for unanswerable questions from v2.0-style
    files; v1.1-style parsing guarantees at least one answer.
    """

    qid: str
    question: str
    context: str
    answers: tuple[GoldAnswer, ...]
    is_impossible: bool = False


def _check_answer_spans(example: QaExample) -> None:
    for ans in example.answers:
        lo, hi = ans.char_start, ans.char_start + len(ans.text)
        if lo < 0 or hi > len(example.context) or example.context[lo:hi] != ans.text:
            raise ValidationError(
                f"answer span mismatch for qid {example.qid!r}: "
                f"context[{lo}:{hi}] != {ans.text!r}"
            )


def _load_json(path: str | Path):
    raw = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        byte_offset = len(raw[: exc.pos].encode("utf-8"))
        raise ParseError(f"{path}: malformed JSON at byte offset {byte_offset}: {exc.msg}") from exc


def parse_squad(path: str | Path, schema_mode: str = "auto") -> list[QaExample]:
    """Parse a SQuAD-format JSON file into a flat, file-ordered example list.

    ``schema_mode`` is one of ``"v1_1"``, ``"v2_0"``, or ``"auto"``. Auto
    detection treats the file as v2.0 when any question carries an
    ``is_impossible`` key, the sole structural difference between the two
    layouts. In v1.1 mode every question must have at least one answer; in
    v2.0 mode unanswerable questions carry empty answer lists. Duplicate
    question ids and answer spans that do not match the context text are
    hard errors.
    """
    if schema_mode not in SCHEMA_MODES:
        raise ValidationError(f"unknown schema_mode {schema_mode!r}; expected one of {SCHEMA_MODES}")
    doc = _load_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("data"), list):
        raise ValidationError(f"{path}: expected a JSON object with a top-level 'data' array")

    flat: list[tuple[str, dict]] = []  # (context, qa) in file order
    try:
        for article in doc["data"]:
            for para in article.get("paragraphs", []):
                context = para["context"]
                for qa in para.get("qas", []):
                    flat.append((context, qa))
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValidationError(f"{path}: not in data/paragraphs/qas layout: {exc!r}") from exc

    if schema_mode == "auto":
        schema_mode = "v2_0" if any("is_impossible" in qa for _, qa in flat) else "v1_1"

    examples: list[QaExample] = []
    seen: set[str] = set()
    for context, qa in flat:
        try:
            qid = str(qa["id"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"{path}: qa entry without an 'id': {exc!r}") from exc
        if qid in seen:
            raise ValidationError(f"duplicate qid {qid!r}")
        seen.add(qid)
        impossible = bool(qa.get("is_impossible", False)) if schema_mode == "v2_0" else False
        raw_answers = qa.get("answers")
        if impossible:
            answers: tuple[GoldAnswer, ...] = ()
        else:
            if not raw_answers:
                raise ValidationError(f"qid {qid!r} has no answers (required in {schema_mode} mode)")
            try:
                answers = tuple(
                    GoldAnswer(text=a["text"], char_start=int(a["answer_start"]))
                    for a in raw_answers
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValidationError(f"qid {qid!r} has a malformed answer entry: {exc!r}") from exc
        if "question" not in qa:
            raise ValidationError(f"qid {qid!r} has no question")
        example = QaExample(
            qid=qid,
            question=qa["question"],
            context=context,
            answers=answers,
            is_impossible=impossible,
        )
        _check_answer_spans(example)
        examples.append(example)
    return examples


def to_squad_json(examples: Iterable[QaExample], title: str = "dataset") -> dict:
    """Serialize examples back to the SQuAD JSON layout.

    Consecutive examples sharing a context are grouped into one paragraph, so
    re-parsing the result yields an identical example list. The
    ``is_impossible`` flag is emitted only when some example actually uses it,
    which keeps v1.1 round-trips in v1.1 shape.
    """
    examples = list(examples)
    has_flag = any(ex.is_impossible for ex in examples)
    paragraphs: list[dict] = []
    for ex in examples:
        qa: dict = {
            "id": ex.qid,
            "question": ex.question,
            "answers": [{"text": a.text, "answer_start": a.char_start} for a in ex.answers],
        }
        if has_flag:
            qa["is_impossible"] = ex.is_impossible
        if paragraphs and paragraphs[-1]["context"] == ex.context:
            paragraphs[-1]["qas"].append(qa)
        else:
            paragraphs.append({"context": ex.context, "qas": [qa]})
    return {
        "version": "v2.0" if has_flag else "1.1",
        "data": [{"title": title, "paragraphs": paragraphs}],
    }


def parse_predictions(path: str | Path) -> dict[str, str]:
    """Parse a predictions file: a JSON object mapping qid to answer string.

    Entries are preserved verbatim; an empty object is valid (evaluation will
    report every qid as missing).
    """
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected a JSON object mapping qid to answer string")
    for qid, value in doc.items():
        if not isinstance(value, str):
            raise ValidationError(
                f"{path}: prediction for qid {qid!r} is not a string (got {type(value).__name__})"
            )
    return dict(doc)


def write_predictions(preds: Mapping[str, str], path: str | Path) -> None:
    Path(path).write_text(json.dumps(dict(preds), ensure_ascii=False, indent=1), encoding="utf-8")
