"""Conditional-GAN trainer for map-to-path-heatmap prediction."""

from .losses import discriminator_loss, generator_loss, l1_loss, sce
from .networks import PairDiscriminator, UNetGenerator, audit_generator_shapes
from .predict import predict
from .train import TrainerConfig, load_generator, train

__all__ = [
    "sce",
    "l1_loss",
    "generator_loss",
    "discriminator_loss",
    "UNetGenerator",
    "PairDiscriminator",
    "audit_generator_shapes",
    "TrainerConfig",
    "train",
    "load_generator",
    "predict",
]

__version__ = "0.1.0"
