"""Session fixtures: toy corpus from the planner CLI, one trained run.

The corpus is produced by invoking the planner package's command line, so
the trainer is exercised purely through the published file contracts.
"""

import subprocess
import sys
from pathlib import Path

import pytest

from heatmap_cgan.train import TrainerConfig, train


@pytest.fixture(scope="session")
def toy_corpus(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("toy_corpus")
    cmd = [
        sys.executable, "-m", "heatmap_rrt.cli", "gen-dataset",
        "--pairs", "50", "--width", "64", "--height", "64",
        "--paths-per-map", "12", "--budget", "2500",
        "--goal-radius", "4", "--seed", "42", "--out", str(out),
    ]
    subprocess.run(cmd, check=True, capture_output=True, text=True)
    assert (out / "manifest.json").exists()
    return out


@pytest.fixture(scope="session")
def trained_run(toy_corpus, tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("trained")
    cfg = TrainerConfig(
        manifest=toy_corpus / "manifest.json",
        out_dir=out,
        steps=200,
        seed=0,
    )
    ckpt = train(cfg)
    assert ckpt.exists()
    return out
