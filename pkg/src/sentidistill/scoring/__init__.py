from .metrics import (
    ScoreCard,
    ScoringError,
    macro_f1,
    micro_f1_tuples,
    quad_match_weight,
    sentiment_graph_f1,
)
from .parse import Prediction, normalize_slot, parse_label, parse_tuples, serialize_tuples

__all__ = [
    "ScoreCard",
    "ScoringError",
    "macro_f1",
    "micro_f1_tuples",
    "quad_match_weight",
    "sentiment_graph_f1",
    "Prediction",
    "normalize_slot",
    "parse_label",
    "parse_tuples",
    "serialize_tuples",
]
