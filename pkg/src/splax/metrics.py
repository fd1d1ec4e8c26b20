"""SQuAD-style Exact Match and token-level F1.

Normalization replicates the standard v1.1 evaluation script: lowercase,
remove punctuation, remove standalone articles, collapse whitespace - in
that order (article removal before punctuation removal would let "the."
survive). Per-question scores take the max over all gold answers.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass

from .data import QaExample
from .errors import ValidationError

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT = set(string.punctuation)


def normalize_answer(s: str) -> str:
    """Lowercase, strip punctuation, drop articles, collapse whitespace."""
    s = s.lower()
    s = "".join(ch for ch in s if ch not in _PUNCT)
    s = _ARTICLES.sub(" ", s)
    return " ".join(s.split())


def f1_score(pred: str, gold: str) -> float:
    """Token-level F1 over normalized, whitespace-split strings in [0, 1].

    Two empty normalized strings count as a perfect match; a single empty
    one scores 0.
    """
    pred_tokens = normalize_answer(pred).split()
    gold_tokens = normalize_answer(gold).split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    num_same = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_tokens)
    recall = num_same / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def exact_match(pred: str, gold: str) -> int:
    """1 iff the normalized strings are equal."""
    return int(normalize_answer(pred) == normalize_answer(gold))


@dataclass
class EvalReport:
    """Aggregate EM/F1 percentages plus the per-question breakdown.

    Both directions of a qid mismatch are surfaced: dataset questions with
    no prediction, and predictions for unknown qids (ignored in the scores,
    like the official script does).
    """

    exact_match: float
    f1: float
    total: int
    per_question: dict[str, tuple[int, float]]
    missing_predictions: list[str]
    extra_predictions: list[str]

    def to_json_dict(self) -> dict:
        return {"exact_match": self.exact_match, "f1": self.f1}


def evaluate(examples: list[QaExample], preds: dict[str, str], strict: bool = False) -> EvalReport:
    """Score predictions against a dataset.

    Each question's EM and F1 are the max over its gold answers; aggregates
    are means scaled to percentages. Questions without a prediction score 0
    and are listed in ``missing_predictions`` (an error in strict mode).
    Questions with no gold answers are scored against the empty string.
    """
    missing = [ex.qid for ex in examples if ex.qid not in preds]
    known = {ex.qid for ex in examples}
    extra = [qid for qid in preds if qid not in known]
    if strict and missing:
        raise ValidationError(f"missing predictions for {len(missing)} qids: {missing[:20]}")
    per_question: dict[str, tuple[int, float]] = {}
    for ex in examples:
        if ex.qid not in preds:
            per_question[ex.qid] = (0, 0.0)
            continue
        pred = preds[ex.qid]
        golds = [a.text for a in ex.answers] or [""]
        per_question[ex.qid] = (
            max(exact_match(pred, g) for g in golds),
            max(f1_score(pred, g) for g in golds),
        )
    total = len(examples)
    em_sum = sum(em for em, _ in per_question.values())
    f1_sum = sum(f1 for _, f1 in per_question.values())
    return EvalReport(
        exact_match=100.0 * em_sum / total if total else 0.0,
        f1=100.0 * f1_sum / total if total else 0.0,
        total=total,
        per_question=per_question,
        missing_predictions=missing,
        extra_predictions=extra,
    )
