"""Checkpoint format: a directory holding meta.json plus a flat parameter blob.

meta.json carries arbitrary metadata under "meta" and a "tensors" list of
{name, shape, offset} entries describing params.bin, which is the concatenation
of each tensor's little-endian float32 bytes in listed order.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

FORMAT = "tiger-checkpoint-v1"


def save_checkpoint(out_dir, tensors: dict[str, torch.Tensor], meta: dict) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    offset = 0
    with (out_dir / "params.bin").open("wb") as blob:
        for name in sorted(tensors):
            arr = tensors[name].detach().cpu().numpy().astype("<f4")
            blob.write(arr.tobytes())
            entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
            offset += arr.nbytes
    doc = {"format": FORMAT, "meta": meta, "tensors": entries}
    (out_dir / "meta.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return out_dir


def load_checkpoint(ckpt_dir) -> tuple[dict[str, torch.Tensor], dict]:
    ckpt_dir = Path(ckpt_dir)
    doc = json.loads((ckpt_dir / "meta.json").read_text())
    if doc.get("format") != FORMAT:
        raise ValueError(f"unrecognized checkpoint format in {ckpt_dir}")
    raw = (ckpt_dir / "params.bin").read_bytes()
    tensors = {}
    for entry in doc["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype="<f4", count=count, offset=entry["offset"]).reshape(shape)
        tensors[entry["name"]] = torch.from_numpy(arr.copy())
    return tensors, doc["meta"]


def module_state(module: torch.nn.Module) -> dict[str, torch.Tensor]:
    return {k: v for k, v in module.state_dict().items()}


def load_module_state(module: torch.nn.Module, tensors: dict[str, torch.Tensor], prefix: str = "") -> None:
    state = {k[len(prefix):]: v for k, v in tensors.items() if k.startswith(prefix)}
    module.load_state_dict(state)
