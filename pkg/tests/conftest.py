import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sentidistill.records import TextRecord  # noqa: E402

_WORDS = (
    "brisk", "lantern", "orchard", "velvet", "thunder", "cobalt", "meadow", "ember",
    "harbor", "salt", "drifting", "copper", "quill", "marble", "juniper", "echo",
    "glacier", "pepper", "willow", "crescent", "tumble", "onyx", "sable", "fjord",
)


def synth_text(rng: random.Random, n_tokens: int = 30) -> str:
    return " ".join(rng.choice(_WORDS) for _ in range(n_tokens))


def synth_records(n: int, seed: int = 0, n_tokens: int = 30, source: str = "other",
                  prefix: str = "rec") -> list[TextRecord]:
    rng = random.Random(seed)
    return [
        TextRecord.from_text(f"{prefix}:{i:05d}", source, synth_text(rng, n_tokens))
        for i in range(n)
    ]


@pytest.fixture
def rng() -> random.Random:
    return random.Random(12345)
