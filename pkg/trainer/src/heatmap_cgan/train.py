"""Adversarial training loop: alternating discriminator/generator updates."""

from __future__ import annotations

import csv
import logging
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.utils.data import DataLoader

from .data import PairFolder
from .losses import LAMBDA_L1_DEFAULT, discriminator_loss, generator_loss
from .networks import PairDiscriminator, UNetGenerator, depth_for_size

logger = logging.getLogger(__name__)


@dataclass
class TrainerConfig:
    manifest: Path
    out_dir: Path
    steps: int = 200
    batch_size: int = 4
    learning_rate: float = 2e-4
    betas: tuple[float, float] = (0.5, 0.999)
    lambda_l1: float = LAMBDA_L1_DEFAULT
    seed: int = 0
    checkpoint_every: int = 100

    def __post_init__(self) -> None:
        if self.lambda_l1 <= 0:
            raise ValueError("lambda_l1 must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.steps < 1 or self.batch_size < 1:
            raise ValueError("steps and batch_size must be >= 1")
        self.manifest = Path(self.manifest)
        self.out_dir = Path(self.out_dir)


def save_checkpoint(path: Path, generator: UNetGenerator, discriminator: PairDiscriminator,
                    depth: int, step: int) -> None:
    """Atomic write: serialize to a temp file, then rename into place."""
    payload = {
        "generator": generator.state_dict(),
        "discriminator": discriminator.state_dict(),
        "depth": depth,
        "step": step,
    }
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            torch.save(payload, fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_generator(checkpoint_path: str | Path) -> tuple[UNetGenerator, dict]:
    payload = torch.load(checkpoint_path, map_location="cpu", weights_only=True)
    gen = UNetGenerator(depth=payload["depth"])
    gen.load_state_dict(payload["generator"])
    gen.eval()
    return gen, payload


def train(cfg: TrainerConfig) -> Path:
    """Run the adversarial loop; returns the final checkpoint path."""
    torch.manual_seed(cfg.seed)
    data = PairFolder(cfg.manifest)
    if data.skipped:
        logger.warning("skipped %d pairs with missing files", data.skipped)
    if len(data) < cfg.batch_size:
        raise ValueError(
            f"dataset has {len(data)} pairs, fewer than batch size {cfg.batch_size}"
        )
    sample, _ = data[0]
    size = sample.shape[-1]
    depth = depth_for_size(size)
    generator = UNetGenerator(depth=depth)
    discriminator = PairDiscriminator(depth=depth)
    opt_g = torch.optim.Adam(generator.parameters(), lr=cfg.learning_rate, betas=cfg.betas)
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=cfg.learning_rate, betas=cfg.betas)

    loader = DataLoader(
        data,
        batch_size=cfg.batch_size,
        shuffle=True,
        drop_last=True,
        generator=torch.Generator().manual_seed(cfg.seed),
    )

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    metrics_path = cfg.out_dir / "metrics.csv"
    step = 0
    ckpt_path = cfg.out_dir / f"ckpt_{cfg.steps}"
    with metrics_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "d_loss", "g_loss", "g_l1"])
        while step < cfg.steps:
            for x, y in loader:
                step += 1
                fake = generator(x)

                opt_d.zero_grad()
                d_loss = discriminator_loss(
                    discriminator(x, y), discriminator(x, fake.detach())
                )
                d_loss.backward()
                opt_d.step()

                opt_g.zero_grad()
                g = generator_loss(discriminator(x, fake), fake, y, cfg.lambda_l1)
                g.total.backward()
                opt_g.step()

                writer.writerow(
                    [step, d_loss.item(), g.total.item(), g.l1.item()]
                )
                if step % cfg.checkpoint_every == 0 or step == cfg.steps:
                    save_checkpoint(
                        cfg.out_dir / f"ckpt_{step}", generator, discriminator, depth, step
                    )
                if step % 50 == 0:
                    logger.info(
                        "step %d: d=%.4f g=%.4f l1=%.4f",
                        step, d_loss.item(), g.total.item(), g.l1.item(),
                    )
                if step >= cfg.steps:
                    break
    return ckpt_path
