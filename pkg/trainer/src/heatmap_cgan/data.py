"""Dataset loading and the image/heatmap exchange conventions.

Consumes the planner toolkit's corpus layout (``manifest.json`` plus
``maps/{id}_input.png`` / ``maps/{id}_truth.png``) purely through the files;
images are normalized to [-1, 1] to match the generator's Tanh range. The
green-filter rule (weight = G - max(R, B), clamped, noise floor 64) mirrors
the planner side's extraction so emitted heatmaps mean the same thing.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torch.utils.data import Dataset

logger = logging.getLogger(__name__)

GREEN_NOISE_FLOOR = 64


def image_to_tensor(path: str | Path) -> torch.Tensor:
    """Load an RGB PNG as a float tensor in [-1, 1], shape (3, H, W)."""
    arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32)
    return torch.from_numpy(arr / 127.5 - 1.0).permute(2, 0, 1)


def tensor_to_image(t: torch.Tensor) -> np.ndarray:
    """Tanh-range tensor (3, H, W) back to a uint8 (H, W, 3) array."""
    arr = t.detach().clamp(-1, 1).permute(1, 2, 0).numpy()
    return np.round((arr + 1.0) * 127.5).astype(np.uint8)


def extract_heatmap_weights(rgb: np.ndarray) -> np.ndarray:
    """Green-filter weights from a uint8 (H, W, 3) image."""
    arr = rgb.astype(np.int16)
    g = arr[:, :, 1] - np.maximum(arr[:, :, 0], arr[:, :, 2])
    weights = np.clip(g, 0, None).astype(np.float64)
    weights[weights < GREEN_NOISE_FLOOR] = 0.0
    return weights


class PairFolder(Dataset):
    """(input map, ground-truth map) image pairs listed by a corpus manifest."""

    def __init__(self, manifest_path: str | Path):
        manifest_path = Path(manifest_path)
        manifest = json.loads(manifest_path.read_text())
        maps_dir = manifest_path.parent / "maps"
        self.items: list[tuple[str, Path, Path]] = []
        skipped = 0
        for entry in manifest["pairs"]:
            pid = entry["id"]
            inp = maps_dir / f"{pid}_input.png"
            truth = maps_dir / f"{pid}_truth.png"
            if self._usable(inp) and self._usable(truth):
                self.items.append((pid, inp, truth))
            else:
                skipped += 1
        if not self.items:
            raise ValueError(f"no usable pairs found via {manifest_path}")
        self.skipped = skipped

    @staticmethod
    def _usable(path: Path) -> bool:
        if not path.exists():
            logger.warning("skipping pair: %s is missing", path.name)
            return False
        try:
            with Image.open(path) as img:
                img.verify()
        except Exception as exc:
            logger.warning("skipping pair: %s is corrupt (%s)", path.name, exc)
            return False
        return True

    def __len__(self) -> int:
        return len(self.items)

    def __getitem__(self, i: int) -> tuple[torch.Tensor, torch.Tensor]:
        _, inp, truth = self.items[i]
        return image_to_tensor(inp), image_to_tensor(truth)
