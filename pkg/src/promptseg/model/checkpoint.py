"""Bit-exact named-tensor checkpoints: ``manifest.json`` + ``weights.bin``.

The manifest is a JSON array of entries ``{name, dtype, shape, offset,
nbytes}`` describing non-overlapping little-endian float32 slices of the
payload. The manifest is fully validated before any payload bytes are
interpreted.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, Mapping, Union

import numpy as np
import torch
from torch import nn

from ..errors import CheckpointFormatError, InvalidInputError

MANIFEST_NAME = "manifest.json"
PAYLOAD_NAME = "weights.bin"

ArrayLike = Union[np.ndarray, torch.Tensor]


def save_checkpoint(weights: Mapping[str, ArrayLike], path: Union[str, Path]) -> None:
    """Write named float32 arrays to ``path/manifest.json`` + ``path/weights.bin``."""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = []
    chunks = []
    offset = 0
    for name, value in weights.items():
        arr = _to_float32_array(name, value)
        raw = arr.astype("<f4", copy=False).tobytes()
        manifest.append(
            {
                "name": name,
                "dtype": "float32",
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        chunks.append(raw)
        offset += len(raw)
    (directory / PAYLOAD_NAME).write_bytes(b"".join(chunks))
    with open(directory / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)


def load_checkpoint(path: Union[str, Path]) -> Dict[str, np.ndarray]:
    """Load a checkpoint directory back into named float32 arrays."""
    directory = Path(path)
    manifest_path = directory / MANIFEST_NAME
    payload_path = directory / PAYLOAD_NAME
    if not manifest_path.is_file() or not payload_path.is_file():
        raise CheckpointFormatError(f"{directory} is not a checkpoint directory")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointFormatError(f"corrupt manifest: {exc}") from exc
    payload_size = payload_path.stat().st_size
    entries = _validate_manifest(manifest, payload_size)

    payload = payload_path.read_bytes()
    out: Dict[str, np.ndarray] = {}
    for entry in entries:
        raw = payload[entry["offset"] : entry["offset"] + entry["nbytes"]]
        arr = np.frombuffer(raw, dtype="<f4").reshape(entry["shape"])
        out[entry["name"]] = arr.copy()
    return out


def save_model(model: nn.Module, path: Union[str, Path], prefix: str = "") -> None:
    """Checkpoint a module's state dict, optionally namespaced by ``prefix``."""
    state = {prefix + k: v for k, v in model.state_dict().items()}
    save_checkpoint(state, path)


def load_model(model: nn.Module, path: Union[str, Path], prefix: str = "") -> nn.Module:
    arrays = load_checkpoint(path)
    if prefix:
        arrays = {k[len(prefix) :]: v for k, v in arrays.items() if k.startswith(prefix)}
    state = {k: torch.from_numpy(v) for k, v in arrays.items()}
    missing = set(model.state_dict()) - set(state)
    if missing:
        raise CheckpointFormatError(f"checkpoint is missing tensors: {sorted(missing)[:5]}")
    model.load_state_dict(state)
    return model


def _to_float32_array(name: str, value: ArrayLike) -> np.ndarray:
    if isinstance(value, torch.Tensor):
        value = value.detach().cpu().numpy()
    arr = np.asarray(value)
    if arr.dtype != np.float32:
        raise InvalidInputError(f"checkpoint tensors must be float32; {name!r} is {arr.dtype}")
    return arr


def _validate_manifest(manifest, payload_size: int):
    if not isinstance(manifest, list):
        raise CheckpointFormatError("manifest must be a JSON array")
    seen = set()
    for i, entry in enumerate(manifest):
        if not isinstance(entry, dict):
            raise CheckpointFormatError(f"manifest entry {i} is not an object")
        for key in ("name", "dtype", "shape", "offset", "nbytes"):
            if key not in entry:
                raise CheckpointFormatError(f"manifest entry {i} is missing {key!r}")
        if entry["dtype"] != "float32":
            raise CheckpointFormatError(f"unsupported dtype {entry['dtype']!r} in entry {i}")
        shape = entry["shape"]
        if not isinstance(shape, list) or not all(isinstance(s, int) and s >= 0 for s in shape):
            raise CheckpointFormatError(f"bad shape {shape!r} in entry {i}")
        offset, nbytes = entry["offset"], entry["nbytes"]
        if not isinstance(offset, int) or not isinstance(nbytes, int) or offset < 0 or nbytes < 0:
            raise CheckpointFormatError(f"bad offset/nbytes in entry {i}")
        expected = int(np.prod(shape, dtype=np.int64)) * 4
        if nbytes != expected:
            raise CheckpointFormatError(
                f"entry {i} declares {nbytes} bytes but shape {shape} needs {expected}"
            )
        if offset + nbytes > payload_size:
            raise CheckpointFormatError(
                f"entry {i} ({entry['name']!r}) extends past the payload "
                f"({offset}+{nbytes} > {payload_size})"
            )
        if entry["name"] in seen:
            raise CheckpointFormatError(f"duplicate tensor name {entry['name']!r}")
        seen.add(entry["name"])
    return manifest
