"""Low-rank adapters for the decoder's attention query/value projections.

The adapted weight is W + A @ B with A of shape (out, r) and B of shape
(r, in). B starts at zero, so a freshly wrapped decoder is bit-identical to
its base until the first optimizer step touches the adapters.
"""

from __future__ import annotations

from typing import Iterator, List

import torch
from torch import nn

from ..errors import InvalidInputError
from .decoder import Attention, MaskDecoder


class LoraLinear(nn.Module):
    def __init__(self, base: nn.Linear, rank: int) -> None:
        super().__init__()
        d = min(base.in_features, base.out_features)
        if rank < 1 or rank >= d:
            raise InvalidInputError(f"LoRA rank must satisfy 1 <= r < {d}, got {rank}")
        self.base = base
        self.rank = rank
        self.lora_a = nn.Parameter(torch.randn(base.out_features, rank) * 0.02)
        self.lora_b = nn.Parameter(torch.zeros(rank, base.in_features))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.base(x) + (x @ self.lora_b.t()) @ self.lora_a.t()


def lora_wrap_decoder(decoder: MaskDecoder, rank: int) -> MaskDecoder:
    """Wrap every attention q/v projection in the decoder with LoRA adapters."""
    wrapped = 0
    for module in decoder.modules():
        if isinstance(module, Attention):
            if isinstance(module.q_proj, LoraLinear) or isinstance(module.v_proj, LoraLinear):
                raise InvalidInputError("decoder is already LoRA-wrapped")
            module.q_proj = LoraLinear(module.q_proj, rank)
            module.v_proj = LoraLinear(module.v_proj, rank)
            wrapped += 1
    if wrapped == 0:
        raise InvalidInputError("decoder has no attention blocks to wrap")
    return decoder


def lora_parameters(decoder: MaskDecoder) -> Iterator[nn.Parameter]:
    for module in decoder.modules():
        if isinstance(module, LoraLinear):
            yield module.lora_a
            yield module.lora_b


def freeze_base_with_lora(decoder: MaskDecoder) -> List[nn.Parameter]:
    """Freeze everything except adapters; returns the trainable parameters."""
    lora_params = set(id(p) for p in lora_parameters(decoder))
    trainable = []
    for p in decoder.parameters():
        if id(p) in lora_params:
            p.requires_grad_(True)
            trainable.append(p)
        else:
            p.requires_grad_(False)
    return trainable
