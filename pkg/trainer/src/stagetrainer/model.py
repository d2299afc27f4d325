"""A small causal transformer LM for desk-scale runs."""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

from .tokenizer import VOCAB_SIZE


@dataclass(frozen=True)
class ModelConfig:
    name: str
    d_model: int
    n_layers: int
    n_heads: int
    max_seq: int = 512
    vocab_size: int = VOCAB_SIZE


MODEL_PROFILES = {
    "tiny-1m": ModelConfig("tiny-1m", d_model=128, n_layers=2, n_heads=4),
    "small-5m": ModelConfig("small-5m", d_model=256, n_layers=4, n_heads=8),
    "desk-20m": ModelConfig("desk-20m", d_model=448, n_layers=8, n_heads=8),
}


class Block(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.ln1 = nn.LayerNorm(config.d_model)
        self.attn = nn.MultiheadAttention(config.d_model, config.n_heads, batch_first=True)
        self.ln2 = nn.LayerNorm(config.d_model)
        self.mlp = nn.Sequential(
            nn.Linear(config.d_model, 4 * config.d_model),
            nn.GELU(),
            nn.Linear(4 * config.d_model, config.d_model),
        )

    def forward(self, x: torch.Tensor, attn_mask: torch.Tensor) -> torch.Tensor:
        normed = self.ln1(x)
        attn_out, _ = self.attn(normed, normed, normed, attn_mask=attn_mask,
                                need_weights=False)
        x = x + attn_out
        return x + self.mlp(self.ln2(x))


class TinyCausalLM(nn.Module):
    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.tok_emb = nn.Embedding(config.vocab_size, config.d_model)
        self.pos_emb = nn.Embedding(config.max_seq, config.d_model)
        self.blocks = nn.ModuleList(Block(config) for _ in range(config.n_layers))
        self.ln_f = nn.LayerNorm(config.d_model)
        self.head = nn.Linear(config.d_model, config.vocab_size, bias=False)

    def forward(self, input_ids: torch.Tensor) -> torch.Tensor:
        _, seq = input_ids.shape
        if seq > self.config.max_seq:
            raise ValueError(f"sequence length {seq} exceeds max_seq {self.config.max_seq}")
        positions = torch.arange(seq, device=input_ids.device)
        x = self.tok_emb(input_ids) + self.pos_emb(positions)
        causal = torch.triu(
            torch.full((seq, seq), float("-inf"), device=input_ids.device), diagonal=1
        )
        for block in self.blocks:
            x = block(x, causal)
        return self.head(self.ln_f(x))

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())
