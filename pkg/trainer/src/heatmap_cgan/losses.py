"""Adversarial and reconstruction losses.

The adversarial primitive is element-averaged sigmoid cross-entropy of
logits against a binary target, computed in the standard numerically stable
form. The generator objective is the non-saturating adversarial term (fool
the discriminator on the generated pair) plus a weighted L1 reconstruction
term; the discriminator objective is the real loss plus the generated loss.
"""

from __future__ import annotations

from typing import NamedTuple

import torch

LAMBDA_L1_DEFAULT = 100.0


def sce(logits: torch.Tensor, target: torch.Tensor | float) -> torch.Tensor:
    """Mean sigmoid cross-entropy: -[n*ln(s(m)) + (1-n)*ln(1-s(m))]."""
    logits = torch.as_tensor(logits)
    if not logits.is_floating_point():
        logits = logits.to(torch.get_default_dtype())
    target = torch.as_tensor(target, dtype=logits.dtype, device=logits.device)
    if not ((target == 0) | (target == 1)).all():
        raise ValueError("sce target must be binary (0 or 1)")
    target = target.expand_as(logits)
    # max(m,0) - m*n + log(1 + exp(-|m|)) avoids overflow at large |m|.
    return (logits.clamp(min=0) - logits * target + torch.log1p(torch.exp(-logits.abs()))).mean()


def l1_loss(generated: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    if generated.shape != target.shape:
        raise ValueError(f"shape mismatch: {tuple(generated.shape)} vs {tuple(target.shape)}")
    return (generated - target).abs().mean()


class GeneratorLoss(NamedTuple):
    total: torch.Tensor
    adversarial: torch.Tensor
    l1: torch.Tensor


def generator_loss(
    disc_logits_on_fake: torch.Tensor,
    generated: torch.Tensor,
    target_image: torch.Tensor,
    lambda_l1: float = LAMBDA_L1_DEFAULT,
) -> GeneratorLoss:
    adv = sce(disc_logits_on_fake, 1.0)
    l1 = l1_loss(generated, target_image)
    return GeneratorLoss(adv + lambda_l1 * l1, adv, l1)


def discriminator_loss(
    disc_logits_on_real: torch.Tensor, disc_logits_on_fake: torch.Tensor
) -> torch.Tensor:
    return sce(disc_logits_on_fake, 0.0) + sce(disc_logits_on_real, 1.0)
