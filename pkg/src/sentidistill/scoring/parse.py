"""Turning raw model output into predictions.

Classification outputs are matched against the task's label set on the first
line (exact after normalization, else a unique embedded label).  Extraction
outputs go through a small tolerant scanner for list-of-tuples literals:
surrounding prose, single or double quotes with escapes, bracketed or
parenthesized tuples, trailing commas, and bare/quoted NULL in any case.
Unparseable output is a value (kind="unparsed"), never an exception.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence

_EDGE_PUNCT = "\"'`.,:;!?()[]{}* \t"


@dataclass
class Prediction:
    kind: str  # "label" | "tuple_set" | "unparsed"
    label: str | None = None
    tuples: list[tuple[str, ...]] = field(default_factory=list)
    instance_id: str | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def unparsed(self) -> bool:
        return self.kind == "unparsed"

    def to_json(self) -> dict:
        return {
            "instance_id": self.instance_id,
            "kind": self.kind,
            "label": self.label,
            "tuples": [list(t) for t in self.tuples],
            "diagnostics": self.diagnostics,
        }


def normalize_slot(value: str) -> str:
    return " ".join(value.split()).casefold()


def _excerpt(raw: str, limit: int = 120) -> str:
    return raw[:limit] + ("..." if len(raw) > limit else "")


def parse_label(raw: str | None, label_set: Sequence[str]) -> Prediction:
    """Match the first output line against the label set."""
    if not label_set:
        raise ValueError("label_set must be non-empty")
    if not raw or not raw.strip():
        return Prediction(kind="unparsed", diagnostics={"reason": "empty output"})
    line = next(ln for ln in raw.splitlines() if ln.strip()).strip()
    stripped = line.strip(_EDGE_PUNCT)
    by_norm = {label.casefold(): label for label in label_set}
    exact = by_norm.get(stripped.casefold())
    if exact is not None:
        return Prediction(kind="label", label=exact)
    lowered = line.casefold()
    found = []
    for label in label_set:
        pattern = r"(?<![\w+-])" + re.escape(label.casefold()) + r"(?![\w+-])"
        if re.search(pattern, lowered):
            found.append(label)
    if len(found) == 1:
        return Prediction(kind="label", label=found[0])
    reason = "no label present" if not found else f"ambiguous labels {found}"
    return Prediction(kind="unparsed",
                      diagnostics={"reason": reason, "raw": _excerpt(raw)})


class _ParseFail(Exception):
    pass


class _Scanner:
    def __init__(self, text: str, start: int):
        self.text = text
        self.i = start

    def peek(self) -> str:
        return self.text[self.i] if self.i < len(self.text) else ""

    def skip_ws(self) -> None:
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def quoted(self) -> str:
        quote = self.text[self.i]
        self.i += 1
        out = []
        while self.i < len(self.text):
            ch = self.text[self.i]
            if ch == "\\" and self.i + 1 < len(self.text):
                out.append(self.text[self.i + 1])
                self.i += 2
                continue
            if ch == quote:
                self.i += 1
                return "".join(out)
            out.append(ch)
            self.i += 1
        raise _ParseFail("unterminated string")

    def bare(self, stops: str) -> str:
        out = []
        while self.i < len(self.text) and self.text[self.i] not in stops:
            out.append(self.text[self.i])
            self.i += 1
        token = "".join(out).strip()
        if not token:
            raise _ParseFail("empty bare token")
        return token

    def tuple_items(self) -> list[str]:
        """Parse one tuple starting at '(' or '['.

        A ']' met where ')' was expected closes both the tuple and the list
        (a common truncation in model output), signalled via _ListClosed.
        """
        opener = self.text[self.i]
        closer = ")" if opener == "(" else "]"
        self.i += 1
        items: list[str] = []
        closed_list = False
        while True:
            self.skip_ws()
            ch = self.peek()
            if not ch:
                raise _ParseFail("unterminated tuple")
            if ch == closer:
                self.i += 1
                break
            if ch == "]" and closer == ")":
                # tolerate a missing ')' right before the list's own ']'
                self.i += 1
                closed_list = True
                break
            if ch in "'\"":
                items.append(self.quoted())
            else:
                items.append(self.bare(",)]"))
            self.skip_ws()
            if self.peek() == ",":
                self.i += 1
        if closed_list:
            raise _ListClosed(items)
        return items


class _ListClosed(Exception):
    def __init__(self, items: list[str]):
        self.items = items


def _parse_list(text: str, start: int) -> tuple[list[list[str]], list[str]]:
    """Items + per-item drop notes for the bracketed list at ``start``."""
    sc = _Scanner(text, start)
    assert sc.peek() == "["
    sc.i += 1
    tuples: list[list[str]] = []
    notes: list[str] = []
    while True:
        sc.skip_ws()
        ch = sc.peek()
        if not ch:
            raise _ParseFail("unterminated list")
        if ch == "]":
            sc.i += 1
            return tuples, notes
        if ch in "([":
            try:
                tuples.append(sc.tuple_items())
            except _ListClosed as closed:
                tuples.append(closed.items)
                return tuples, notes
        elif ch in "'\"":
            notes.append(f"loose string {sc.quoted()!r} skipped")
        else:
            token = sc.bare(",]([")
            if sc.peek() in "([":
                # junk ran into an opener: mis-nested, retry at a later bracket
                raise _ParseFail(f"loose token {token!r} before opener")
            notes.append(f"loose token {token!r} skipped")
        sc.skip_ws()
        if sc.peek() == ",":
            sc.i += 1


def parse_tuples(raw: str | None, arity: int,
                 null_slots: Sequence[int] = ()) -> Prediction:
    """Extract the first balanced list-of-tuples literal in the output."""
    if arity not in (2, 4):
        raise ValueError("arity must be 2 or 4")
    if not raw or not raw.strip():
        return Prediction(kind="unparsed", diagnostics={"reason": "empty output"})
    parsed: tuple[list[list[str]], list[str]] | None = None
    for match in re.finditer(r"\[", raw):
        try:
            parsed = _parse_list(raw, match.start())
            break
        except _ParseFail:
            continue
    if parsed is None:
        return Prediction(kind="unparsed",
                          diagnostics={"reason": "no list found", "raw": _excerpt(raw)})
    items, notes = parsed
    tuples: list[tuple[str, ...]] = []
    for item in items:
        if len(item) != arity:
            notes.append(f"tuple {tuple(item)!r} dropped: arity {len(item)} != {arity}")
            continue
        slots = []
        for idx, value in enumerate(item):
            if idx in null_slots and value.strip().casefold() == "null":
                slots.append("NULL")
            else:
                slots.append(value)
        if all(s.strip().casefold() == "null" for s in item):
            # the instructed "no opinions" marker, not a real tuple
            notes.append("all-NULL tuple treated as empty prediction")
            continue
        tuples.append(tuple(slots))
    diagnostics: dict = {}
    if notes:
        diagnostics["notes"] = notes
        diagnostics["raw"] = _excerpt(raw)
    return Prediction(kind="tuple_set", tuples=tuples, diagnostics=diagnostics)


def _escape(value: str) -> str:
    return value.replace("\\", "\\\\").replace("'", "\\'")


def serialize_tuples(tuples: Sequence[Sequence[str]]) -> str:
    """Canonical list-of-tuples rendering; inverse of parse_tuples."""
    if not tuples:
        return "[]"
    rendered = []
    for t in tuples:
        inner = ", ".join(f"'{_escape(slot)}'" for slot in t)
        rendered.append(f"({inner})")
    return "[" + ", ".join(rendered) + "]"
