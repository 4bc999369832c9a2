from .checkpoint import load_checkpoint, load_model, save_checkpoint, save_model
from .config import ModelConfig
from .decoder import MaskDecoder, MaskPrediction, binarize, select_best_mask
from .encoder import ImageEncoder
from .lora import LoraLinear, freeze_base_with_lora, lora_parameters, lora_wrap_decoder
from .prompts import NEGATIVE, POSITIVE, Point, PromptEncoder, PromptSet
from .segmenter import PromptableSegmenter, build_segmenter

__all__ = [
    "ModelConfig",
    "ImageEncoder",
    "PromptEncoder",
    "PromptSet",
    "Point",
    "POSITIVE",
    "NEGATIVE",
    "MaskDecoder",
    "MaskPrediction",
    "binarize",
    "select_best_mask",
    "PromptableSegmenter",
    "build_segmenter",
    "LoraLinear",
    "lora_wrap_decoder",
    "lora_parameters",
    "freeze_base_with_lora",
    "save_checkpoint",
    "load_checkpoint",
    "save_model",
    "load_model",
]
