"""U-Net generator and paired-input discriminator.

Generator: stride-2 4x4 convolution encoder (Conv-BatchNorm-LeakyReLU 0.2)
down to a 1x1 bottleneck, mirrored transposed-convolution decoder
(ConvTranspose-BatchNorm-[dropout]-ReLU) with skip concatenation between
layer i and layer n-i, followed by a final up-convolution and Tanh. Dropout
(rate 0.5) sits on the first three decoder layers and stays active at test
time: it is the model's only noise source.

Discriminator: the channel-concatenated (map, candidate) pair through the
same encoder ladder, ending in a single logit; sigmoid of it is the
real-vs-fake score.
"""

from __future__ import annotations

import math

import torch
from torch import nn
from torch.nn import functional as F

ENCODER_BASE = 64
MAX_FILTERS = 512
KERNEL = 4
STRIDE = 2
LEAKY_SLOPE = 0.2
DROPOUT_RATE = 0.5
DROPOUT_LAYERS = 3


def encoder_filters(depth: int) -> list[int]:
    return [min(ENCODER_BASE * 2**i, MAX_FILTERS) for i in range(depth)]


def depth_for_size(size: int) -> int:
    """Number of stride-2 halvings that take ``size`` down to 1."""
    depth = int(math.log2(size))
    if 2**depth != size:
        raise ValueError(f"input size {size} is not a power of two")
    return depth


class UNetGenerator(nn.Module):
    def __init__(self, depth: int = 8, in_channels: int = 3, out_channels: int = 3):
        super().__init__()
        if depth < 4:
            raise ValueError(f"generator needs depth >= 4, got {depth}")
        self.depth = depth
        filters = encoder_filters(depth)
        self.encoders = nn.ModuleList()
        prev = in_channels
        for f in filters:
            self.encoders.append(
                nn.Sequential(
                    nn.Conv2d(prev, f, KERNEL, STRIDE, 1),
                    nn.BatchNorm2d(f),
                    nn.LeakyReLU(LEAKY_SLOPE),
                )
            )
            prev = f
        # Decoder stage i up-convolves to the width of encoder stage
        # depth-1-i, then concatenates that encoder's feature map.
        self.deconvs = nn.ModuleList()
        self.denorms = nn.ModuleList()
        prev = filters[-1]
        for i in range(depth - 1):
            out = filters[depth - 2 - i]
            self.deconvs.append(nn.ConvTranspose2d(prev, out, KERNEL, STRIDE, 1))
            self.denorms.append(nn.BatchNorm2d(out))
            prev = out * 2  # after skip concatenation
        self.final = nn.ConvTranspose2d(prev, out_channels, KERNEL, STRIDE, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        for enc in self.encoders:
            x = enc(x)
            skips.append(x)
        for i, (deconv, norm) in enumerate(zip(self.deconvs, self.denorms)):
            x = norm(deconv(x))
            if i < DROPOUT_LAYERS:
                # Noise source: active at train AND test time.
                x = F.dropout(x, DROPOUT_RATE, training=True)
            x = F.relu(x)
            x = torch.cat([x, skips[self.depth - 2 - i]], dim=1)
        return torch.tanh(self.final(x))


class PairDiscriminator(nn.Module):
    """Scores an (input map, candidate map) pair; forward returns the logit."""

    def __init__(self, depth: int = 8, in_channels: int = 6):
        super().__init__()
        self.depth = depth
        filters = encoder_filters(depth)
        layers: list[nn.Module] = []
        prev = in_channels
        for f in filters:
            layers += [
                nn.Conv2d(prev, f, KERNEL, STRIDE, 1),
                nn.BatchNorm2d(f),
                nn.LeakyReLU(LEAKY_SLOPE),
            ]
            prev = f
        self.encoder = nn.Sequential(*layers)
        self.head = nn.Conv2d(prev, 1, 1)

    def forward(self, map_img: torch.Tensor, candidate: torch.Tensor) -> torch.Tensor:
        x = self.encoder(torch.cat([map_img, candidate], dim=1))
        return self.head(x).flatten(1).squeeze(1)

    def probability(self, map_img: torch.Tensor, candidate: torch.Tensor) -> torch.Tensor:
        return torch.sigmoid(self.forward(map_img, candidate))


def audit_generator_shapes(gen: UNetGenerator, size: int) -> dict:
    """Trace one forward pass and report the spatial/channel ladders.

    Returns encoder spatial sizes, decoder spatial sizes, and the decoder
    channel ladder [first deconv width, then width after each skip concat].
    """
    enc_spatial: list[int] = []
    dec_spatial: list[int] = []
    channel_ladder: list[int] = []
    was_training = gen.training
    gen.eval()
    with torch.no_grad():
        x = torch.zeros(2, 3, size, size)
        skips = []
        for enc in gen.encoders:
            x = enc(x)
            enc_spatial.append(x.shape[-1])
            skips.append(x)
        for i, (deconv, norm) in enumerate(zip(gen.deconvs, gen.denorms)):
            x = F.relu(norm(deconv(x)))
            if i == 0:
                channel_ladder.append(x.shape[1])
            x = torch.cat([x, skips[gen.depth - 2 - i]], dim=1)
            channel_ladder.append(x.shape[1])
            dec_spatial.append(x.shape[-1])
        x = torch.tanh(gen.final(x))
        dec_spatial.append(x.shape[-1])
    gen.train(was_training)
    return {
        "encoder_spatial": enc_spatial,
        "decoder_spatial": dec_spatial,
        "channel_ladder": channel_ladder,
        "output_shape": tuple(x.shape[1:]),
    }
