"""Uncompressed run-length codec for binary masks.

Runs are counted over the column-major (Fortran-order) flattening of the
mask and always start with the number of leading zeros, matching the COCO
uncompressed RLE convention so external tooling can read the output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..errors import RleFormatError


@dataclass(frozen=True)
class RLEMask:
    size: Tuple[int, int]  # (height, width)
    counts: Tuple[int, ...]

    def to_coco(self) -> dict:
        return {"size": [int(self.size[0]), int(self.size[1])], "counts": list(self.counts)}

    @classmethod
    def from_coco(cls, obj: dict) -> "RLEMask":
        return cls(size=(int(obj["size"][0]), int(obj["size"][1])), counts=tuple(obj["counts"]))


def rle_encode(mask: np.ndarray) -> RLEMask:
    """Encode a 2-D binary mask; exact inverse of :func:`rle_decode`."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise RleFormatError(f"mask must be 2-D, got shape {arr.shape}")
    flat = arr.reshape(-1, order="F").astype(bool)
    if flat.size == 0:
        return RLEMask(size=(arr.shape[0], arr.shape[1]), counts=(0,))
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    boundaries = np.concatenate([[0], change, [flat.size]])
    counts = np.diff(boundaries).tolist()
    if flat[0]:
        counts = [0] + counts
    return RLEMask(size=(arr.shape[0], arr.shape[1]), counts=tuple(int(c) for c in counts))


def rle_decode(rle: RLEMask) -> np.ndarray:
    """Decode back to a 2-D boolean mask, validating the declared size."""
    h, w = rle.size
    if h < 0 or w < 0:
        raise RleFormatError(f"bad mask size {rle.size}")
    counts = list(rle.counts)
    if any((not isinstance(c, (int, np.integer))) or c < 0 for c in counts):
        raise RleFormatError(f"counts must be nonnegative integers, got {counts}")
    total = int(sum(counts))
    if total != h * w:
        raise RleFormatError(f"counts sum to {total}, expected {h}*{w}={h * w}")
    flat = np.zeros(h * w, dtype=bool)
    pos = 0
    value = False
    for c in counts:
        if value:
            flat[pos : pos + c] = True
        pos += c
        value = not value
    return flat.reshape((h, w), order="F")


def mask_to_coco_rle(mask: np.ndarray) -> dict:
    return rle_encode(mask).to_coco()


def coco_rle_to_mask(obj: dict) -> np.ndarray:
    return rle_decode(RLEMask.from_coco(obj))
