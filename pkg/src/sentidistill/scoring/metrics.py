"""The three metric families: macro-F1, exact-tuple micro-F1, and
span-overlap-weighted graph F1 for opinion quads.

Unparseable predictions always count against the model: as a wrong label in
classification, as the empty set in extraction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .parse import Prediction, normalize_slot

UNPARSED = "<unparsed>"

HOLDER_SLOT, TARGET_SLOT, EXPRESSION_SLOT, POLARITY_SLOT = 0, 1, 2, 3


class ScoringError(Exception):
    pass


@dataclass
class ScoreCard:
    task_id: str
    seed: int
    metric: str
    value: float
    counts: dict = field(default_factory=dict)
    unparsed_count: int = 0

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "seed": self.seed,
            "metric": self.metric,
            "value": self.value,
            "counts": self.counts,
            "unparsed_count": self.unparsed_count,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ScoreCard":
        return cls(obj["task_id"], obj["seed"], obj["metric"], obj["value"],
                   obj.get("counts", {}), obj.get("unparsed_count", 0))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _pred_label(pred: Prediction | str) -> str:
    if isinstance(pred, str):
        return pred
    return pred.label if pred.kind == "label" and pred.label is not None else UNPARSED


def macro_f1(golds: Sequence[str], preds: Sequence[Prediction | str],
             label_set: Sequence[str]) -> tuple[float, dict]:
    """Macro-averaged F1 over the classes present in gold or predictions.

    Unparsed predictions count as a non-label: they create a false negative
    for the gold class and a false positive for nothing.
    """
    if not golds:
        raise ScoringError("empty input")
    if len(golds) != len(preds):
        raise ScoringError(f"gold/pred length mismatch: {len(golds)} != {len(preds)}")
    labels = list(label_set)
    tp = {label: 0 for label in labels}
    fp = {label: 0 for label in labels}
    fn = {label: 0 for label in labels}
    confusion: dict[str, dict[str, int]] = {}
    for gold, raw_pred in zip(golds, preds):
        if gold not in tp:
            raise ScoringError(f"gold label {gold!r} outside label set")
        pred = _pred_label(raw_pred)
        confusion.setdefault(gold, {}).setdefault(pred, 0)
        confusion[gold][pred] += 1
        if pred == gold:
            tp[gold] += 1
        else:
            fn[gold] += 1
            if pred in fp:
                fp[pred] += 1
    present = [label for label in labels
               if (tp[label] + fn[label]) > 0 or fp[label] > 0]
    per_class = {}
    for label in present:
        precision = tp[label] / (tp[label] + fp[label]) if tp[label] + fp[label] else 0.0
        recall = tp[label] / (tp[label] + fn[label]) if tp[label] + fn[label] else 0.0
        per_class[label] = _f1(precision, recall)
    value = sum(per_class.values()) / len(per_class) if per_class else 0.0
    details = {
        "per_class_f1": per_class,
        "confusion": confusion,
    }
    return value, details


def _normalize_tuple(t: Sequence[str]) -> tuple[str, ...]:
    return tuple(normalize_slot(slot) for slot in t)


def micro_f1_tuples(gold_sets: Sequence[Sequence[Sequence[str]]],
                    pred_sets: Sequence[Sequence[Sequence[str]]]) -> tuple[float, dict]:
    """Corpus-level exact-tuple F1 with per-instance set semantics."""
    if len(gold_sets) != len(pred_sets):
        raise ScoringError("gold/pred length mismatch")
    tp = n_gold = n_pred = 0
    for golds, preds in zip(gold_sets, pred_sets):
        arities = {len(t) for t in golds} | {len(t) for t in preds}
        if len(arities) > 1:
            raise ScoringError(f"arity mismatch within a comparison: {sorted(arities)}")
        gold_set = {_normalize_tuple(t) for t in golds}
        pred_set = {_normalize_tuple(t) for t in preds}
        tp += len(gold_set & pred_set)
        n_gold += len(gold_set)
        n_pred += len(pred_set)
    if n_gold == 0 and n_pred == 0:
        return 1.0, {"tp": 0, "n_gold": 0, "n_pred": 0}
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    return _f1(precision, recall), {"tp": tp, "n_gold": n_gold, "n_pred": n_pred}


def _is_null(slot: str) -> bool:
    return normalize_slot(slot) == "null"


def _span_weight(gold_slot: str, pred_slot: str) -> float:
    gold_null, pred_null = _is_null(gold_slot), _is_null(pred_slot)
    if gold_null and pred_null:
        return 1.0
    if gold_null or pred_null:
        return 0.0
    gold_tokens = set(normalize_slot(gold_slot).split())
    pred_tokens = set(normalize_slot(pred_slot).split())
    union = gold_tokens | pred_tokens
    if not union:
        return 0.0
    return len(gold_tokens & pred_tokens) / len(union)


def quad_match_weight(gold: Sequence[str], pred: Sequence[str]) -> float:
    """Pair weight, or 0.0 when the pair is not matchable.

    Matchable requires equal polarity and non-zero expression-token overlap;
    the weight is the mean Jaccard over the holder/target/expression slots
    (NULL-NULL scores 1, NULL against a span scores 0).
    """
    if normalize_slot(gold[POLARITY_SLOT]) != normalize_slot(pred[POLARITY_SLOT]):
        return 0.0
    expression = _span_weight(gold[EXPRESSION_SLOT], pred[EXPRESSION_SLOT])
    if expression == 0.0:
        return 0.0
    holder = _span_weight(gold[HOLDER_SLOT], pred[HOLDER_SLOT])
    target = _span_weight(gold[TARGET_SLOT], pred[TARGET_SLOT])
    return (holder + target + expression) / 3.0


def _instance_weighted_tp(golds: Sequence[Sequence[str]],
                          preds: Sequence[Sequence[str]]) -> float:
    if not golds or not preds:
        return 0.0
    weights = np.zeros((len(golds), len(preds)))
    for i, gold in enumerate(golds):
        for j, pred in enumerate(preds):
            weights[i, j] = quad_match_weight(gold, pred)
    rows, cols = linear_sum_assignment(weights, maximize=True)
    return float(weights[rows, cols].sum())


def sentiment_graph_f1(gold_sets: Sequence[Sequence[Sequence[str]]],
                       pred_sets: Sequence[Sequence[Sequence[str]]]) -> tuple[float, dict]:
    """Overlap-weighted quad F1.

    Each predicted quad matches at most one gold quad; the pairing maximizes
    total weight (exact assignment), so ties cannot change the score.
    """
    if len(gold_sets) != len(pred_sets):
        raise ScoringError("gold/pred length mismatch")
    weighted_tp = 0.0
    n_gold = n_pred = 0
    for golds, preds in zip(gold_sets, pred_sets):
        for t in list(golds) + list(preds):
            if len(t) != 4:
                raise ScoringError(f"graph F1 requires quads, got arity {len(t)}")
        weighted_tp += _instance_weighted_tp(golds, preds)
        n_gold += len(golds)
        n_pred += len(preds)
    if n_gold == 0 and n_pred == 0:
        return 1.0, {"weighted_tp": 0.0, "n_gold": 0, "n_pred": 0}
    precision = weighted_tp / n_pred if n_pred else 0.0
    recall = weighted_tp / n_gold if n_gold else 0.0
    return _f1(precision, recall), {
        "weighted_tp": weighted_tp, "n_gold": n_gold, "n_pred": n_pred,
    }
