"""Inference: map image in, raw prediction plus exchange-format heatmap out.

Dropout stays active at prediction time, so repeated calls on one input give
different (stochastic) predictions by design.
"""

from __future__ import annotations

import io
import json
import logging
import time
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .data import extract_heatmap_weights, image_to_tensor, tensor_to_image
from .train import load_generator

logger = logging.getLogger(__name__)

NORMALIZATION_TAG = "max255"


def predict(
    checkpoint: str | Path,
    input_png: str | Path,
    heatmap_out: str | Path,
    raw_out: str | Path | None = None,
    map_id: str | None = None,
    seed: int | None = None,
) -> dict:
    """Run the generator on one map image and write the heatmap PNG + sidecar."""
    t0 = time.perf_counter()
    gen, payload = load_generator(checkpoint)
    x = image_to_tensor(input_png)
    h, w = x.shape[-2:]
    span = 2 ** payload["depth"]
    if h % span or w % span or h != w:
        raise ValueError(
            f"input is {w}x{h}; this checkpoint needs square images with "
            f"side divisible by 2^{payload['depth']} = {span}"
        )
    if seed is not None:
        torch.manual_seed(seed)
    with torch.no_grad():
        out = gen(x.unsqueeze(0))[0]
    rgb = tensor_to_image(out)

    if raw_out is not None:
        Image.fromarray(rgb, "RGB").save(raw_out, format="PNG")

    weights = extract_heatmap_weights(rgb)
    peak = weights.max()
    if peak > 0:
        gray = np.round(weights / peak * 255.0).astype(np.uint8)
    else:
        logger.warning("prediction carries no green signal; emitting an empty heatmap")
        gray = np.zeros_like(weights, dtype=np.uint8)
    heatmap_out = Path(heatmap_out)
    buf = io.BytesIO()
    Image.fromarray(gray, "L").save(buf, format="PNG")
    heatmap_out.write_bytes(buf.getvalue())
    if map_id is None:
        map_id = Path(input_png).stem.removesuffix("_input")
    heatmap_out.with_suffix(".json").write_text(
        json.dumps({"map_id": map_id, "normalization": NORMALIZATION_TAG}, sort_keys=True) + "\n"
    )
    elapsed = time.perf_counter() - t0
    logger.info("predicted %s in %.2fs", map_id, elapsed)
    return {
        "map_id": map_id,
        "heatmap": str(heatmap_out),
        "raw": str(raw_out) if raw_out else None,
        "nonzero_weights": int((weights > 0).sum()),
        "wall_time_s": elapsed,
    }
