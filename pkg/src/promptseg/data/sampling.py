"""Prompt-source utilities: mask centers, interior points, instance subsets."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from ..errors import InvalidInputError
from ..model.prompts import POSITIVE, Point


def mask_center(mask: np.ndarray) -> Tuple[int, int]:
    """Most interior pixel of a mask as ``(x, y)``.

    Uses the distance-transform argmax (distance to the nearest background
    pixel, with the image border counting as background), so the returned
    point lies inside the mask even for rings and other concave shapes.
    Ties break in row-major scan order.
    """
    arr = np.asarray(mask, dtype=bool)
    if arr.ndim != 2:
        raise InvalidInputError(f"mask must be 2-D, got shape {arr.shape}")
    if not arr.any():
        raise InvalidInputError("mask_center of an empty mask")
    padded = np.pad(arr, 1, constant_values=False)
    dist = ndimage.distance_transform_edt(padded)[1:-1, 1:-1]
    dist[~arr] = -1.0
    r, c = np.unravel_index(int(np.argmax(dist)), arr.shape)
    return (int(c), int(r))


def center_point(mask: np.ndarray) -> Point:
    """The mask center as a positive point prompt at the pixel's center."""
    x, y = mask_center(mask)
    return Point(x + 0.5, y + 0.5, POSITIVE)


def interior_point(mask: np.ndarray, rng: np.random.Generator) -> Point:
    """A uniformly random foreground pixel as a positive point prompt."""
    arr = np.asarray(mask, dtype=bool)
    idx = np.flatnonzero(arr.reshape(-1))
    if idx.size == 0:
        raise InvalidInputError("interior_point of an empty mask")
    k = int(idx[rng.integers(idx.size)])
    r, c = divmod(k, arr.shape[1])
    return Point(c + 0.5, r + 0.5, POSITIVE)


def sample_instances(instances: Sequence, max_n: int, rng: np.random.Generator) -> List:
    """Uniform subset without replacement; everything when under the cap."""
    if max_n < 1:
        raise InvalidInputError(f"max_n must be >= 1, got {max_n}")
    if len(instances) <= max_n:
        return list(instances)
    chosen = rng.choice(len(instances), size=max_n, replace=False)
    return [instances[i] for i in sorted(int(i) for i in chosen)]
