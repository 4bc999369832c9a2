from .coco import load_coco_annotations, load_dataset, rasterize_polygons
from .dataset import ImageSample, Instance, SegDataset, tight_box
from .rle import RLEMask, coco_rle_to_mask, mask_to_coco_rle, rle_decode, rle_encode
from .sampling import center_point, interior_point, mask_center, sample_instances
from .synthetic import generate_synthetic_dataset

__all__ = [
    "ImageSample",
    "Instance",
    "SegDataset",
    "tight_box",
    "RLEMask",
    "rle_encode",
    "rle_decode",
    "mask_to_coco_rle",
    "coco_rle_to_mask",
    "mask_center",
    "center_point",
    "interior_point",
    "sample_instances",
    "generate_synthetic_dataset",
    "load_coco_annotations",
    "load_dataset",
    "rasterize_polygons",
]
