"""Model configuration shared by the image encoder, prompt encoder and decoder."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from ..errors import InvalidInputError

ROLES = ("teacher", "student")


@dataclass(frozen=True)
class ModelConfig:
    """Sizes and strides of one promptable segmentation model.

    The defaults describe the desk-scale geometry: 256x256 inputs, a 16x16
    feature map with 128 channels, mask logits produced at stride 4 and
    bilinearly upsampled back to the input resolution. ``role`` selects the
    backbone width: the teacher is twice as wide as the student while keeping
    the same output contract.
    """

    input_size: int = 256
    feature_channels: int = 128
    feature_stride: int = 16
    decoder_layers: int = 2
    decoder_heads: int = 4
    num_mask_tokens: int = 4
    mask_stride: int = 4
    role: str = "student"
    base_width: int = 16
    decoder_mlp_ratio: int = 4
    teacher_width_mult: int = 2

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise InvalidInputError(f"role must be one of {ROLES}, got {self.role!r}")
        if self.num_mask_tokens != 4:
            raise InvalidInputError("num_mask_tokens is fixed at 4")
        if self.input_size <= 0 or self.input_size % self.feature_stride != 0:
            raise InvalidInputError(
                f"input_size {self.input_size} must be a positive multiple of "
                f"feature_stride {self.feature_stride}"
            )
        if self.feature_stride % self.mask_stride != 0:
            raise InvalidInputError(
                f"feature_stride {self.feature_stride} must be divisible by "
                f"mask_stride {self.mask_stride}"
            )
        if not _is_pow2(self.feature_stride) or not _is_pow2(self.mask_stride):
            raise InvalidInputError("feature_stride and mask_stride must be powers of two")
        if self.feature_channels % self.decoder_heads != 0:
            raise InvalidInputError("feature_channels must be divisible by decoder_heads")
        if self.feature_channels % 2 != 0:
            raise InvalidInputError("feature_channels must be even")

    @property
    def feature_size(self) -> int:
        """Spatial side of the encoder output feature map."""
        return self.input_size // self.feature_stride

    @property
    def mask_size(self) -> int:
        """Spatial side of the low-resolution mask logits before upsampling."""
        return self.input_size // self.mask_stride

    @property
    def backbone_width(self) -> int:
        return self.base_width * (self.teacher_width_mult if self.role == "teacher" else 1)

    @property
    def num_stages(self) -> int:
        # Stages halve resolution after the stride-2 stem; the deepest stage
        # runs at 2x feature_stride and is merged back by the FPN.
        return int(math.log2(self.feature_stride))

    def as_role(self, role: str) -> "ModelConfig":
        """Same geometry with a different backbone role."""
        return replace(self, role=role)

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, data: dict) -> "ModelConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown ModelConfig keys: {sorted(unknown)}")
        return cls(**data)


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0
