"""Two-way transformer mask decoder.

The token stream starts as [IoU token; 4 mask tokens; prompt tokens]. Each
layer runs token self-attention, token-to-image cross-attention, a token MLP,
and image-to-token cross-attention, alternating information between the two
streams. Afterwards each mask token is turned into a dynamic linear
classifier applied to an upscaled feature map, and the IoU token predicts a
quality score per mask.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..errors import InvalidInputError
from .config import ModelConfig
from .encoder import _num_groups


@dataclass
class MaskPrediction:
    """Four mask logit maps at image resolution plus their predicted IoUs."""

    logits: torch.Tensor  # (4, H, W)
    iou_scores: torch.Tensor  # (4,), each in [0, 1]
    aux: Optional[Dict[str, torch.Tensor]] = None


def binarize(logits, threshold: float = 0.0) -> np.ndarray:
    """Threshold a logit map to a boolean mask; ties resolve to background."""
    if isinstance(logits, torch.Tensor):
        logits = logits.detach().cpu().numpy()
    logits = np.asarray(logits)
    if not np.all(np.isfinite(logits)):
        raise InvalidInputError("logits must be finite")
    return logits > threshold


def select_best_mask(pred: MaskPrediction) -> int:
    """Index of the highest predicted-IoU mask; ties go to the lowest index."""
    scores = pred.iou_scores.detach().cpu().numpy()
    if not np.all(np.isfinite(scores)):
        raise InvalidInputError("iou_scores must be finite")
    return int(np.argmax(scores))


class MLP(nn.Module):
    def __init__(self, in_dim: int, hidden: int, out_dim: int, layers: int) -> None:
        super().__init__()
        dims = [in_dim] + [hidden] * (layers - 1) + [out_dim]
        self.layers = nn.ModuleList(nn.Linear(a, b) for a, b in zip(dims[:-1], dims[1:]))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = F.relu(x)
        return x


class Attention(nn.Module):
    """Multi-head attention over explicit q/k/v inputs."""

    def __init__(self, channels: int, heads: int) -> None:
        super().__init__()
        if channels % heads != 0:
            raise InvalidInputError("attention width must be divisible by head count")
        self.heads = heads
        self.q_proj = nn.Linear(channels, channels)
        self.k_proj = nn.Linear(channels, channels)
        self.v_proj = nn.Linear(channels, channels)
        self.out_proj = nn.Linear(channels, channels)
        self.last_attn: Optional[torch.Tensor] = None

    def forward(
        self, q: torch.Tensor, k: torch.Tensor, v: torch.Tensor, record: bool = False
    ) -> torch.Tensor:
        q = self._split(self.q_proj(q))
        k = self._split(self.k_proj(k))
        v = self._split(self.v_proj(v))
        attn = torch.softmax((q @ k.transpose(-2, -1)) / (q.shape[-1] ** 0.5), dim=-1)
        if record:
            self.last_attn = attn
        out = attn @ v
        out = out.transpose(1, 2).reshape(out.shape[0], out.shape[2], -1)
        return self.out_proj(out)

    def _split(self, x: torch.Tensor) -> torch.Tensor:
        b, n, c = x.shape
        return x.reshape(b, n, self.heads, c // self.heads).transpose(1, 2)


class TwoWayBlock(nn.Module):
    def __init__(self, channels: int, heads: int, mlp_ratio: int, first: bool) -> None:
        super().__init__()
        self.first = first
        self.self_attn = Attention(channels, heads)
        self.norm1 = nn.LayerNorm(channels)
        self.token_to_image = Attention(channels, heads)
        self.norm2 = nn.LayerNorm(channels)
        self.mlp = MLP(channels, channels * mlp_ratio, channels, 2)
        self.norm3 = nn.LayerNorm(channels)
        self.image_to_token = Attention(channels, heads)
        self.norm4 = nn.LayerNorm(channels)

    def forward(
        self,
        tokens: torch.Tensor,
        image: torch.Tensor,
        token_pe: torch.Tensor,
        image_pe: torch.Tensor,
    ) -> Tuple[torch.Tensor, torch.Tensor]:
        if self.first:
            tokens = self.self_attn(tokens, tokens, tokens)
        else:
            q = tokens + token_pe
            tokens = tokens + self.self_attn(q, q, tokens)
        tokens = self.norm1(tokens)

        q = tokens + token_pe
        k = image + image_pe
        tokens = self.norm2(tokens + self.token_to_image(q, k, image))
        tokens = self.norm3(tokens + self.mlp(tokens))

        q = tokens + token_pe
        k = image + image_pe
        image = self.norm4(image + self.image_to_token(k, q, tokens))
        return tokens, image


class MaskDecoder(nn.Module):
    """Produces 4 candidate masks and their quality scores from one prompt set.

    ``calls`` counts forward invocations; the distillation loop tests use it
    to verify how many decoder passes a training step performs.
    """

    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        self.config = config
        d = config.feature_channels
        self.iou_token = nn.Embedding(1, d)
        self.mask_tokens = nn.Embedding(config.num_mask_tokens, d)
        self.blocks = nn.ModuleList(
            TwoWayBlock(d, config.decoder_heads, config.decoder_mlp_ratio, first=(i == 0))
            for i in range(config.decoder_layers)
        )
        self.final_token_to_image = Attention(d, config.decoder_heads)
        self.final_norm = nn.LayerNorm(d)

        n_up = int((config.feature_stride // config.mask_stride).bit_length() - 1)
        ups = []
        ch = d
        for _ in range(n_up):
            nxt = max(ch // 2, 8)
            ups.append(nn.ConvTranspose2d(ch, nxt, 2, stride=2))
            ups.append(nn.GroupNorm(_num_groups(nxt), nxt))
            ups.append(nn.GELU())
            ch = nxt
        self.upscale = nn.Sequential(*ups)
        self.classifier_dim = ch
        self.hyper_mlps = nn.ModuleList(
            MLP(d, d, self.classifier_dim, 3) for _ in range(config.num_mask_tokens)
        )
        self.iou_head = MLP(d, d, config.num_mask_tokens, 3)
        self.calls = 0

    def forward(
        self,
        feature: torch.Tensor,
        image_pe: torch.Tensor,
        prompt_tokens: torch.Tensor,
        return_aux: bool = False,
    ) -> MaskPrediction:
        d = self.config.feature_channels
        if feature.ndim != 3 or feature.shape[0] != d:
            raise InvalidInputError(
                f"feature must be ({d}, h, w), got {tuple(feature.shape)}"
            )
        if prompt_tokens.ndim != 2 or prompt_tokens.shape[1] != d:
            raise InvalidInputError(
                f"prompt tokens must be (n, {d}), got {tuple(prompt_tokens.shape)}"
            )
        self.calls += 1

        _, h, w = feature.shape
        n_mask = self.config.num_mask_tokens
        out_tokens = torch.cat([self.iou_token.weight, self.mask_tokens.weight], dim=0)
        tokens = torch.cat([out_tokens, prompt_tokens], dim=0).unsqueeze(0)
        token_pe = tokens  # initial embeddings serve as the token positional code
        image = feature.reshape(d, h * w).t().unsqueeze(0)
        pe = image_pe.reshape(d, h * w).t().unsqueeze(0)

        for block in self.blocks:
            tokens, image = block(tokens, image, token_pe, pe)
        q = tokens + token_pe
        k = image + pe
        tokens = self.final_norm(
            tokens + self.final_token_to_image(q, k, image, record=return_aux)
        )

        iou_out = tokens[0, 0]
        mask_out = tokens[0, 1 : 1 + n_mask]
        refined = image[0].t().reshape(d, h, w)
        upscaled = self.upscale(refined.unsqueeze(0))[0]  # (c, h*r, w*r)

        hyper = torch.stack([mlp(mask_out[i]) for i, mlp in enumerate(self.hyper_mlps)])
        c, uh, uw = upscaled.shape
        lowres = (hyper @ upscaled.reshape(c, uh * uw)).reshape(n_mask, uh, uw)
        size = self.config.input_size
        logits = F.interpolate(
            lowres.unsqueeze(0), size=(size, size), mode="bilinear", align_corners=False
        )[0]
        iou_scores = torch.sigmoid(self.iou_head(iou_out))

        aux = None
        if return_aux:
            aux = {
                "cross_attn": self.final_token_to_image.last_attn,
                "refined_feature": refined,
                "lowres_logits": lowres,
            }
        return MaskPrediction(logits=logits, iou_scores=iou_scores, aux=aux)
