"""Trainer command line: ``train`` on a corpus, ``predict`` on map images."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .predict import predict
from .train import TrainerConfig, train


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = argparse.ArgumentParser(prog="heatmap-cgan", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train")
    p.add_argument("--manifest", required=True, help="corpus manifest.json")
    p.add_argument("--out", required=True, help="checkpoint/metrics directory")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--lambda-l1", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint-every", type=int, default=100)

    p = sub.add_parser("predict")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, nargs="+", help="input map PNG(s)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--raw", action="store_true", help="also write the raw RGB prediction")
    p.add_argument("--seed", type=int)

    args = parser.parse_args(argv)
    if args.command == "train":
        cfg = TrainerConfig(
            manifest=Path(args.manifest),
            out_dir=Path(args.out),
            steps=args.steps,
            batch_size=args.batch_size,
            learning_rate=args.lr,
            lambda_l1=args.lambda_l1,
            seed=args.seed,
            checkpoint_every=args.checkpoint_every,
        )
        ckpt = train(cfg)
        print(f"final checkpoint: {ckpt}")
        return 0
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for path in args.input:
        stem = Path(path).stem.removesuffix("_input")
        info = predict(
            checkpoint=args.checkpoint,
            input_png=path,
            heatmap_out=out_dir / f"{stem}_heat.png",
            raw_out=(out_dir / f"{stem}_raw.png") if args.raw else None,
            seed=args.seed,
        )
        print(f"{info['map_id']}: {info['nonzero_weights']} active cells")
    return 0


if __name__ == "__main__":
    sys.exit(main())
