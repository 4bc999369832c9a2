"""Synthetic multi-grained shape scenes.

Each image is 2-6 filled shapes (ellipses, rectangles, triangles) in distinct
colors over a textured noise background. A configurable fraction of shapes is
composite: the shape is bisected by a random line through its center and each
half is painted its own color, emitting the whole as a parent instance plus
the two halves as part-level children. That reproduces the part-vs-whole
granularity ambiguity a single point prompt cannot resolve.
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from ..errors import InvalidInputError
from .dataset import ImageSample, Instance, SegDataset, tight_box

_MIN_INSTANCE_AREA = 8


def generate_synthetic_dataset(
    n_images: int,
    image_size: int,
    seed: int,
    composite_prob: float = 0.5,
    min_shapes: int = 2,
    max_shapes: int = 6,
    out_dir=None,
) -> SegDataset:
    """Generate a deterministic dataset; optionally also write it to ``out_dir``."""
    if n_images < 1:
        raise InvalidInputError(f"n_images must be >= 1, got {n_images}")
    if image_size < 32:
        raise InvalidInputError(f"image_size must be >= 32, got {image_size}")
    seeds = np.random.SeedSequence(seed).spawn(n_images)
    samples = []
    next_ann_id = 1
    for i in range(n_images):
        rng = np.random.default_rng(seeds[i])
        sample, next_ann_id = _generate_image(
            image_id=i + 1,
            ann_start=next_ann_id,
            image_size=image_size,
            rng=rng,
            composite_prob=composite_prob,
            min_shapes=min_shapes,
            max_shapes=max_shapes,
        )
        samples.append(sample)
    dataset = SegDataset(samples)
    if out_dir is not None:
        dataset.save(out_dir)
    return dataset


def _generate_image(
    image_id: int,
    ann_start: int,
    image_size: int,
    rng: np.random.Generator,
    composite_prob: float,
    min_shapes: int,
    max_shapes: int,
) -> Tuple[ImageSample, int]:
    s = image_size
    canvas = _textured_background(s, rng)
    used_colors = [canvas.reshape(-1, 3).mean(axis=0)]

    n_shapes = int(rng.integers(min_shapes, max_shapes + 1))
    shape_masks: List[np.ndarray] = []
    shape_splits: List[Optional[np.ndarray]] = []
    occupied = np.zeros((s, s), dtype=bool)
    for _ in range(n_shapes):
        mask = _place_shape(s, rng, occupied)
        if mask is None:
            continue
        occupied |= mask
        split = None
        if rng.random() < composite_prob:
            split = _bisect(mask, rng)
        shape_masks.append(mask)
        shape_splits.append(split)

    # Later shapes are painted on top; the id map records the topmost shape.
    id_map = np.full((s, s), -1, dtype=np.int64)
    for idx, (mask, split) in enumerate(zip(shape_masks, shape_splits)):
        id_map[mask] = idx
        if split is None:
            color = _pick_color(rng, used_colors)
            canvas[mask] = color
        else:
            for half in (split, mask & ~split):
                color = _pick_color(rng, used_colors)
                canvas[half] = color

    canvas += rng.normal(0.0, 0.015, size=canvas.shape)
    canvas = np.clip(canvas, 0.0, 1.0)
    canvas = np.round(canvas * 255.0) / 255.0  # match the PNG round trip exactly

    instances: List[Instance] = []
    ann_id = ann_start
    for idx, (mask, split) in enumerate(zip(shape_masks, shape_splits)):
        visible = id_map == idx
        if visible.sum() < _MIN_INSTANCE_AREA:
            continue
        parent = Instance(id=ann_id, mask=visible, box=tight_box(visible))
        ann_id += 1
        instances.append(parent)
        if split is not None:
            for half in (visible & split, visible & ~split):
                if half.sum() < _MIN_INSTANCE_AREA:
                    continue
                instances.append(
                    Instance(id=ann_id, mask=half, box=tight_box(half), parent_id=parent.id)
                )
                ann_id += 1

    sample = ImageSample(
        image_id=image_id,
        instances=instances,
        image=canvas.astype(np.float32),
        file_name=f"images/{image_id:06d}.png",
        size=(s, s),
    )
    return sample, ann_id


def _textured_background(s: int, rng: np.random.Generator) -> np.ndarray:
    base = rng.uniform(0.15, 0.85, size=3)
    coarse = rng.normal(0.0, 0.06, size=(max(s // 8, 2), max(s // 8, 2), 3))
    texture = ndimage.zoom(coarse, (s / coarse.shape[0], s / coarse.shape[1], 1), order=1)
    return np.clip(base[None, None, :] + texture, 0.0, 1.0)


def _place_shape(s: int, rng: np.random.Generator, occupied: np.ndarray) -> Optional[np.ndarray]:
    for _ in range(20):
        kind = ("ellipse", "rectangle", "triangle")[int(rng.integers(3))]
        rx = rng.uniform(0.08, 0.22) * s
        ry = rng.uniform(0.08, 0.22) * s
        cx = rng.uniform(rx + 1, s - rx - 1)
        cy = rng.uniform(ry + 1, s - ry - 1)
        mask = _render_shape(kind, s, cx, cy, rx, ry, rng)
        area = int(mask.sum())
        if area < 4 * _MIN_INSTANCE_AREA:
            continue
        if (mask & occupied).sum() > 0.2 * area:
            continue
        return mask
    return None


def _render_shape(
    kind: str, s: int, cx: float, cy: float, rx: float, ry: float, rng: np.random.Generator
) -> np.ndarray:
    yy, xx = np.mgrid[0:s, 0:s]
    if kind == "ellipse":
        return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    if kind == "rectangle":
        return (np.abs(xx - cx) <= rx) & (np.abs(yy - cy) <= ry)
    # Triangle: three vertices spread around the center at random angles.
    angles = np.sort(rng.uniform(0, 2 * np.pi, size=3))
    if np.min(np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))) < 0.6:
        angles = np.array([0.0, 2.1, 4.2]) + rng.uniform(0, 2 * np.pi)
    vx = cx + rx * np.cos(angles)
    vy = cy + ry * np.sin(angles)
    mask = np.ones((s, s), dtype=bool)
    for k in range(3):
        x1, y1 = vx[k], vy[k]
        x2, y2 = vx[(k + 1) % 3], vy[(k + 1) % 3]
        cross = (x2 - x1) * (yy - y1) - (y2 - y1) * (xx - x1)
        orient = (x2 - x1) * (vy[(k + 2) % 3] - y1) - (y2 - y1) * (vx[(k + 2) % 3] - x1)
        mask &= (cross * np.sign(orient)) >= 0
    return mask


def _bisect(mask: np.ndarray, rng: np.random.Generator) -> Optional[np.ndarray]:
    """Half-plane split through the mask centroid; None when a half is too small."""
    ys, xs = np.nonzero(mask)
    cx, cy = xs.mean(), ys.mean()
    theta = rng.uniform(0, np.pi)
    yy, xx = np.mgrid[0 : mask.shape[0], 0 : mask.shape[1]]
    side = ((xx - cx) * np.cos(theta) + (yy - cy) * np.sin(theta)) > 0
    a = int((mask & side).sum())
    b = int(mask.sum()) - a
    if min(a, b) < max(_MIN_INSTANCE_AREA, 0.25 * mask.sum()):
        return None
    return mask & side


def _pick_color(rng: np.random.Generator, used: List[np.ndarray]) -> np.ndarray:
    best, best_dist = None, -1.0
    for _ in range(50):
        color = rng.uniform(0.05, 0.95, size=3)
        dist = min(float(np.linalg.norm(color - u)) for u in used)
        if dist > 0.35:
            used.append(color)
            return color
        if dist > best_dist:
            best, best_dist = color, dist
    used.append(best)
    return best
