"""The full promptable model: image encoder + prompt encoder + mask decoder."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..errors import InvalidInputError
from .config import ModelConfig
from .decoder import MaskDecoder, MaskPrediction
from .encoder import ImageEncoder
from .prompts import PromptEncoder, PromptSet


class PromptableSegmenter(nn.Module):
    """Encode an image once, then decode any number of prompt sets against it."""

    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        self.config = config
        self.image_encoder = ImageEncoder(config)
        self.prompt_encoder = PromptEncoder(config.feature_channels)
        self.mask_decoder = MaskDecoder(config)

    def encode_image(self, image: np.ndarray) -> torch.Tensor:
        """Encode an ``(H, W, 3)`` float image in [0, 1] to a ``(D, h, w)`` feature map."""
        arr = np.asarray(image)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise InvalidInputError(f"expected (H, W, 3) image, got {arr.shape}")
        tensor = torch.from_numpy(np.ascontiguousarray(arr, dtype=np.float32))
        tensor = tensor.permute(2, 0, 1).unsqueeze(0)
        return self.image_encoder(tensor)[0]

    def decode(
        self, feature: torch.Tensor, prompts: PromptSet, return_aux: bool = False
    ) -> MaskPrediction:
        tokens = self.prompt_encoder(prompts, self.config.input_size)
        pe = self.prompt_encoder.dense_grid(feature.shape[1], feature.shape[2])
        return self.mask_decoder(feature, pe, tokens, return_aux=return_aux)

    def predict(self, image: np.ndarray, prompts: PromptSet, return_aux: bool = False) -> MaskPrediction:
        return self.decode(self.encode_image(image), prompts, return_aux=return_aux)


def build_segmenter(config: ModelConfig, seed: int) -> PromptableSegmenter:
    """Construct a model with all parameters drawn from one seeded stream."""
    torch.manual_seed(seed)
    return PromptableSegmenter(config)
