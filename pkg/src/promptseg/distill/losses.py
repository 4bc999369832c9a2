"""Mask and feature losses used across training stages."""

from __future__ import annotations

import numpy as np
import torch
import torch.nn.functional as F

from ..errors import InvalidInputError


def _check_shapes(a: torch.Tensor, b: torch.Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise InvalidInputError(f"{op}: shape mismatch {tuple(a.shape)} vs {tuple(b.shape)}")


def encoder_kd_loss(f_t: torch.Tensor, f_s: torch.Tensor) -> torch.Tensor:
    """Pixel-wise feature alignment: mean squared error over all elements."""
    _check_shapes(f_t, f_s, "encoder_kd_loss")
    return F.mse_loss(f_s, f_t, reduction="mean")


def dice_loss(pred_prob: torch.Tensor, target: torch.Tensor, eps: float = 1.0) -> torch.Tensor:
    """Soft Dice loss with an additive smoothing term covering the empty case."""
    _check_shapes(pred_prob, target, "dice_loss")
    target = target.to(pred_prob.dtype)
    inter = (pred_prob * target).sum()
    denom = pred_prob.sum() + target.sum()
    return 1.0 - (2.0 * inter + eps) / (denom + eps)


def bce_loss(logits: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean binary cross-entropy on logits, evaluated in the stable form."""
    _check_shapes(logits, target, "bce_loss")
    target = target.to(logits.dtype)
    bad = torch.logical_and(target != 0, target != 1)
    if bool(bad.any()):
        raise InvalidInputError("bce_loss targets must be binary")
    return F.binary_cross_entropy_with_logits(logits, target, reduction="mean")


def mask_loss(student_logits: torch.Tensor, teacher_binary: torch.Tensor) -> torch.Tensor:
    """Dice + BCE against a binarized reference mask, with equal weights."""
    if not isinstance(teacher_binary, torch.Tensor):
        teacher_binary = torch.from_numpy(np.ascontiguousarray(teacher_binary))
    target = teacher_binary.to(device=student_logits.device)
    return dice_loss(torch.sigmoid(student_logits), target) + bce_loss(student_logits, target)
