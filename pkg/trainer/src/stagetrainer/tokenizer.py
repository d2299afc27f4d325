"""Byte-level chat tokenizer with role markers and assistant-only loss masks.

Serialization: [BOS] then per message a role token, the UTF-8 bytes of the
content, and an end-of-turn token.  Supervised positions (loss mask True)
are exactly the assistant content bytes plus the assistant turn's
end-of-turn token; everything else is conditioning only.
"""

from __future__ import annotations

from dataclasses import dataclass

BYTE_VOCAB = 256
PAD, BOS, EOT = 256, 257, 258
ROLE_TOKENS = {"system": 259, "user": 260, "assistant": 261}
VOCAB_SIZE = 262

IGNORE_INDEX = -100


@dataclass
class EncodedSample:
    input_ids: list[int]
    loss_mask: list[bool]  # True where the token is a training target

    def labels(self) -> list[int]:
        return [tok if keep else IGNORE_INDEX
                for tok, keep in zip(self.input_ids, self.loss_mask)]


def encode_text(text: str) -> list[int]:
    return list(text.encode("utf-8"))


def decode_text(ids: list[int]) -> str:
    return bytes(i for i in ids if i < BYTE_VOCAB).decode("utf-8", errors="replace")


def encode_chat(messages: list[dict], max_len: int = 512) -> EncodedSample:
    """Serialize a chat sample; keeps the tail when over max_len.

    Truncating from the left sacrifices early conditioning but never the
    assistant target at the end of the sample.
    """
    ids: list[int] = [BOS]
    mask: list[bool] = [False]
    for msg in messages:
        role = msg["role"]
        if role not in ROLE_TOKENS:
            raise ValueError(f"unknown role: {role}")
        supervised = role == "assistant"
        ids.append(ROLE_TOKENS[role])
        mask.append(False)  # the role marker itself is conditioning
        content = encode_text(msg["content"])
        ids.extend(content)
        mask.extend([supervised] * len(content))
        ids.append(EOT)
        mask.append(supervised)
    if len(ids) > max_len:
        ids = ids[-max_len:]
        mask = mask[-max_len:]
    return EncodedSample(ids, mask)
