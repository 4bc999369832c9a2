"""COCO-style annotation ingestion (also reads this package's own datasets).

Accepted segmentation formats: uncompressed RLE objects ``{"size": [h, w],
"counts": [...]}`` and polygon lists ``[[x0, y0, x1, y1, ...], ...]``.
Category labels are dropped; everything is treated class-agnostically.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import shapely

from ..errors import IngestionError, RleFormatError
from .dataset import ImageSample, Instance, SegDataset, tight_box
from .rle import coco_rle_to_mask

logger = logging.getLogger(__name__)


def load_coco_annotations(path: Union[str, Path], images_root: Optional[Path] = None) -> SegDataset:
    """Parse a COCO-style JSON file into a dataset with decoded masks."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise IngestionError(f"{path}: top level must be a JSON object")
    for key in ("images", "annotations"):
        if key not in payload:
            raise IngestionError(f"{path}: missing top-level key {key!r}")

    root = images_root if images_root is not None else path.parent
    samples: Dict[int, ImageSample] = {}
    for rec in payload["images"]:
        _require(rec, ("id", "width", "height"), "image")
        samples[rec["id"]] = ImageSample(
            image_id=rec["id"],
            instances=[],
            file_name=rec.get("file_name"),
            root=Path(root),
            size=(int(rec["height"]), int(rec["width"])),
        )

    for rec in payload["annotations"]:
        _require(rec, ("id", "image_id", "segmentation", "bbox", "area"), "annotation")
        if rec["image_id"] not in samples:
            raise IngestionError(f"annotation id={rec['id']} references unknown image {rec['image_id']}")
        if rec["area"] == 0:
            logger.warning("skipping annotation id=%s with zero area", rec["id"])
            continue
        sample = samples[rec["image_id"]]
        mask = _decode_segmentation(rec, sample.height, sample.width)
        if not mask.any():
            logger.warning("skipping annotation id=%s with an empty decoded mask", rec["id"])
            continue
        sample.instances.append(
            Instance(
                id=rec["id"],
                mask=mask,
                box=tight_box(mask),
                parent_id=rec.get("parent_id"),
            )
        )

    return SegDataset([samples[k] for k in sorted(samples)])


def load_dataset(directory: Union[str, Path]) -> SegDataset:
    """Load a dataset directory written by :meth:`SegDataset.save`."""
    directory = Path(directory)
    return load_coco_annotations(directory / "annotations.json", images_root=directory)


def _require(rec: dict, keys, kind: str) -> None:
    for key in keys:
        if key not in rec:
            label = rec.get("id", "<no id>")
            raise IngestionError(f"{kind} record id={label} is missing key {key!r}")


def _decode_segmentation(rec: dict, height: int, width: int) -> np.ndarray:
    seg = rec["segmentation"]
    if isinstance(seg, dict):
        try:
            mask = coco_rle_to_mask(seg)
        except (RleFormatError, KeyError, TypeError) as exc:
            raise IngestionError(f"annotation id={rec['id']}: bad RLE segmentation: {exc}") from exc
        if mask.shape != (height, width):
            raise IngestionError(
                f"annotation id={rec['id']}: RLE size {mask.shape} does not match "
                f"image ({height}, {width})"
            )
        return mask
    if isinstance(seg, list):
        return rasterize_polygons(seg, height, width, ann_id=rec["id"])
    raise IngestionError(f"annotation id={rec['id']}: unsupported segmentation type {type(seg)}")


def rasterize_polygons(polygons: List[List[float]], height: int, width: int, ann_id=None) -> np.ndarray:
    """Pixel-center rasterization: a pixel is foreground when its center lies
    strictly inside any of the polygons."""
    mask = np.zeros((height, width), dtype=bool)
    for poly in polygons:
        if not isinstance(poly, list) or len(poly) < 6 or len(poly) % 2 != 0:
            raise IngestionError(f"annotation id={ann_id}: malformed polygon {poly!r}")
        coords = np.asarray(poly, dtype=np.float64).reshape(-1, 2)
        shape = shapely.Polygon(coords)
        x1 = max(int(np.floor(coords[:, 0].min())), 0)
        x2 = min(int(np.ceil(coords[:, 0].max())) + 1, width)
        y1 = max(int(np.floor(coords[:, 1].min())), 0)
        y2 = min(int(np.ceil(coords[:, 1].max())) + 1, height)
        if x1 >= x2 or y1 >= y2:
            continue
        yy, xx = np.mgrid[y1:y2, x1:x2]
        inside = shapely.contains_xy(shape, xx.reshape(-1) + 0.5, yy.reshape(-1) + 0.5)
        mask[y1:y2, x1:x2] |= inside.reshape(yy.shape)
    return mask
