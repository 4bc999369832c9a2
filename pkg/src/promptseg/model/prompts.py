"""Sparse prompt types and their embedding into decoder tokens.

Points and boxes are encoded with random Fourier positional features: the
(x, y) location is normalized to [0, 1]^2, projected through a fixed Gaussian
matrix frozen at initialization, and expanded as [sin, cos]. A learned type
indicator (positive point, negative point, box top-left, box bottom-right) is
added on top, so two prompts at the same location differ exactly by the
difference of their indicator tokens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import torch
from torch import nn

from ..errors import InvalidInputError

POSITIVE = "positive"
NEGATIVE = "negative"

# Indicator slots in the type-embedding table.
_TYPE_POS = 0
_TYPE_NEG = 1
_TYPE_BOX_TL = 2
_TYPE_BOX_BR = 3


@dataclass(frozen=True)
class Point:
    x: float
    y: float
    label: str

    def __post_init__(self) -> None:
        if self.label not in (POSITIVE, NEGATIVE):
            raise InvalidInputError(f"point label must be positive/negative, got {self.label!r}")


@dataclass(frozen=True)
class PromptSet:
    """Ordered point prompts plus at most one box, in pixel coordinates."""

    points: Tuple[Point, ...] = ()
    box: Optional[Tuple[float, float, float, float]] = None

    def __post_init__(self) -> None:
        if self.box is not None:
            x1, y1, x2, y2 = self.box
            if not (x1 < x2 and y1 < y2):
                raise InvalidInputError(f"box must satisfy x1<x2 and y1<y2, got {self.box}")

    def __len__(self) -> int:
        return len(self.points) + (1 if self.box is not None else 0)

    @property
    def n_tokens(self) -> int:
        return len(self.points) + (2 if self.box is not None else 0)

    def with_point(self, point: Point) -> "PromptSet":
        return PromptSet(points=self.points + (point,), box=self.box)

    def with_box(self, box: Tuple[float, float, float, float]) -> "PromptSet":
        return PromptSet(points=self.points, box=box)

    def validate(self, image_size: int) -> None:
        """Check coordinates are inside an image_size x image_size frame."""
        if len(self) == 0:
            raise InvalidInputError("prompt set is empty; the decoder requires at least one prompt")
        for p in self.points:
            if not (0.0 <= p.x <= image_size and 0.0 <= p.y <= image_size):
                raise InvalidInputError(f"point ({p.x}, {p.y}) outside image of size {image_size}")
        if self.box is not None:
            x1, y1, x2, y2 = self.box
            if not (0.0 <= x1 and x2 <= image_size and 0.0 <= y1 and y2 <= image_size):
                raise InvalidInputError(f"box {self.box} outside image of size {image_size}")


class PromptEncoder(nn.Module):
    """Maps a :class:`PromptSet` to a ``(n_tokens, D)`` tensor.

    One token per point, two per box (its corners). The Fourier matrix is
    drawn once at construction and registered as a buffer, so it is frozen,
    checkpointed, and shared when decoder weights are inherited.
    """

    def __init__(self, channels: int) -> None:
        super().__init__()
        if channels % 2 != 0:
            raise InvalidInputError("prompt embedding width must be even")
        self.channels = channels
        self.register_buffer("fourier", torch.randn(2, channels // 2))
        self.type_embeddings = nn.Embedding(4, channels)

    def embed_normalized(self, coords: torch.Tensor) -> torch.Tensor:
        """Fourier-embed ``(n, 2)`` coordinates already scaled to [0, 1]."""
        proj = (2.0 * math.pi) * (coords @ self.fourier)
        return torch.cat([torch.sin(proj), torch.cos(proj)], dim=-1)

    def forward(self, prompts: PromptSet, image_size: int) -> torch.Tensor:
        prompts.validate(image_size)
        coords = []
        types = []
        for p in prompts.points:
            coords.append((p.x / image_size, p.y / image_size))
            types.append(_TYPE_POS if p.label == POSITIVE else _TYPE_NEG)
        if prompts.box is not None:
            x1, y1, x2, y2 = prompts.box
            coords.append((x1 / image_size, y1 / image_size))
            types.append(_TYPE_BOX_TL)
            coords.append((x2 / image_size, y2 / image_size))
            types.append(_TYPE_BOX_BR)
        device = self.fourier.device
        xy = torch.tensor(coords, dtype=self.fourier.dtype, device=device)
        idx = torch.tensor(types, dtype=torch.long, device=device)
        return self.embed_normalized(xy) + self.type_embeddings(idx)

    def dense_grid(self, height: int, width: int) -> torch.Tensor:
        """Positional embedding of the feature grid, shape ``(D, H, W)``."""
        dtype = self.fourier.dtype
        device = self.fourier.device
        ys = (torch.arange(height, dtype=dtype, device=device) + 0.5) / height
        xs = (torch.arange(width, dtype=dtype, device=device) + 0.5) / width
        grid_y, grid_x = torch.meshgrid(ys, xs, indexing="ij")
        coords = torch.stack([grid_x.reshape(-1), grid_y.reshape(-1)], dim=-1)
        emb = self.embed_normalized(coords)  # (H*W, D)
        return emb.t().reshape(self.channels, height, width)
