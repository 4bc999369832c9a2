"""In-memory dataset containers and the on-disk directory layout.

A dataset directory holds ``images/*.png`` plus ``annotations.json`` in a
COCO-style schema (images, annotations with RLE or polygon segmentation,
bbox, area, and an optional parent_id linking part-level instances to their
whole).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from PIL import Image

from ..errors import InvalidInputError
from .rle import mask_to_coco_rle

Box = Tuple[float, float, float, float]


@dataclass
class Instance:
    id: int
    mask: np.ndarray  # (H, W) bool
    box: Box  # tight (x1, y1, x2, y2), x2/y2 exclusive
    parent_id: Optional[int] = None

    @property
    def area(self) -> int:
        return int(self.mask.sum())


@dataclass
class ImageSample:
    image_id: int
    instances: List[Instance]
    image: Optional[np.ndarray] = None  # (H, W, 3) float32 in [0, 1]
    file_name: Optional[str] = None
    root: Optional[Path] = None
    size: Optional[Tuple[int, int]] = None  # (H, W)

    def pixels(self) -> np.ndarray:
        """Image pixels, loaded lazily from disk when not held in memory."""
        if self.image is None:
            if self.file_name is None or self.root is None:
                raise InvalidInputError(f"image {self.image_id} has no pixel source")
            with Image.open(self.root / self.file_name) as img:
                arr = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
            self.image = arr
            self.size = arr.shape[:2]
        return self.image

    @property
    def height(self) -> int:
        return self.size[0] if self.size is not None else self.pixels().shape[0]

    @property
    def width(self) -> int:
        return self.size[1] if self.size is not None else self.pixels().shape[1]


@dataclass
class SegDataset:
    samples: List[ImageSample] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, idx: int) -> ImageSample:
        return self.samples[idx]

    def by_id(self) -> Dict[int, ImageSample]:
        return {s.image_id: s for s in self.samples}

    def instance_level(self) -> "SegDataset":
        """View keeping only whole-object instances (those without a parent)."""
        out = []
        for s in self.samples:
            kept = [i for i in s.instances if i.parent_id is None]
            out.append(
                ImageSample(
                    image_id=s.image_id,
                    instances=kept,
                    image=s.image,
                    file_name=s.file_name,
                    root=s.root,
                    size=s.size,
                )
            )
        return SegDataset(out)

    def n_instances(self) -> int:
        return sum(len(s.instances) for s in self.samples)

    def save(self, directory) -> None:
        """Write ``images/*.png`` + ``annotations.json``."""
        root = Path(directory)
        (root / "images").mkdir(parents=True, exist_ok=True)
        images = []
        annotations = []
        for sample in self.samples:
            pixels = sample.pixels()
            file_name = sample.file_name or f"images/{sample.image_id:06d}.png"
            arr = np.clip(np.round(pixels * 255.0), 0, 255).astype(np.uint8)
            Image.fromarray(arr).save(root / file_name)
            images.append(
                {
                    "id": sample.image_id,
                    "file_name": file_name,
                    "width": int(pixels.shape[1]),
                    "height": int(pixels.shape[0]),
                }
            )
            for inst in sample.instances:
                x1, y1, x2, y2 = inst.box
                record = {
                    "id": inst.id,
                    "image_id": sample.image_id,
                    "segmentation": mask_to_coco_rle(inst.mask),
                    "bbox": [float(x1), float(y1), float(x2 - x1), float(y2 - y1)],
                    "area": inst.area,
                }
                if inst.parent_id is not None:
                    record["parent_id"] = inst.parent_id
                annotations.append(record)
        payload = {"images": images, "annotations": annotations}
        with open(root / "annotations.json", "w", encoding="utf-8") as fh:
            json.dump(payload, fh, separators=(",", ":"))


def tight_box(mask: np.ndarray) -> Box:
    """Tight bounding box of a nonempty mask, exclusive on the far edges."""
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    if rows.size == 0:
        raise InvalidInputError("cannot compute the bounding box of an empty mask")
    return (float(cols[0]), float(rows[0]), float(cols[-1] + 1), float(rows[-1] + 1))
