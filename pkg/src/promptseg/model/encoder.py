"""Image encoders: a compact CNN backbone with an FPN head.

The backbone keeps its native downsampling; the deepest stage (running at
twice the target stride) is upsampled and added to the previous stage, and a
final 1x1 projection maps the fused map to the shared embedding width. The
teacher uses the same stack at double width.

Every convolution before the final projection is bias-free and followed by
GroupNorm, so a zero image stays zero all the way through; the projection
bias starts at zero, which the tests rely on.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F
from torch import nn

from ..errors import InvalidInputError
from .config import ModelConfig


class ConvBlock(nn.Module):
    """3x3 conv (no bias) + GroupNorm + ReLU."""

    def __init__(self, in_ch: int, out_ch: int, stride: int = 1) -> None:
        super().__init__()
        self.conv = nn.Conv2d(in_ch, out_ch, 3, stride=stride, padding=1, bias=False)
        self.norm = nn.GroupNorm(_num_groups(out_ch), out_ch)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.relu(self.norm(self.conv(x)))


class ImageEncoder(nn.Module):
    """CNN backbone + two-level FPN fusion + channel projection.

    Output shape is ``(B, D, input/stride, input/stride)`` where ``D`` and the
    stride come from :class:`ModelConfig`.
    """

    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        self.config = config
        w = config.backbone_width
        n = config.num_stages

        self.stem = ConvBlock(3, w, stride=2)
        stages = []
        in_ch = w
        self.stage_channels = []
        for i in range(n):
            out_ch = w * (2**i)
            stages.append(
                nn.Sequential(ConvBlock(in_ch, out_ch, stride=2), ConvBlock(out_ch, out_ch))
            )
            self.stage_channels.append(out_ch)
            in_ch = out_ch
        self.stages = nn.ModuleList(stages)

        # FPN over the two deepest stages; fused width follows the shallower one.
        fpn_ch = self.stage_channels[-2]
        self.lateral_mid = nn.Conv2d(self.stage_channels[-2], fpn_ch, 1, bias=False)
        self.lateral_top = nn.Conv2d(self.stage_channels[-1], fpn_ch, 1, bias=False)
        self.fuse = ConvBlock(fpn_ch, fpn_ch)
        self.project = nn.Conv2d(fpn_ch, config.feature_channels, 1, bias=True)
        nn.init.zeros_(self.project.bias)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        if images.ndim != 4 or images.shape[1] != 3:
            raise InvalidInputError(f"expected (B,3,H,W) images, got {tuple(images.shape)}")
        if images.shape[2] != self.config.input_size or images.shape[3] != self.config.input_size:
            raise InvalidInputError(
                f"image size {tuple(images.shape[2:])} does not match "
                f"configured input_size {self.config.input_size}"
            )
        x = self.stem(images)
        feats = []
        for stage in self.stages:
            x = stage(x)
            feats.append(x)
        mid, top = feats[-2], feats[-1]
        fused = self.lateral_mid(mid) + F.interpolate(
            self.lateral_top(top), scale_factor=2, mode="nearest"
        )
        return self.project(self.fuse(fused))


def _num_groups(channels: int, target: int = 8) -> int:
    g = min(target, channels)
    while channels % g != 0:
        g -= 1
    return g
