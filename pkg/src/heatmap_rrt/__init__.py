"""2-D sampling-based path planning with heatmap-guided nonuniform sampling.

Subpackages split along the pipeline: ``gridworld`` (maps, collision,
image codec), ``sampling`` (uniform / nonuniform / hybrid samplers),
``planners`` (RRT, RRT*, heatmap-guided RRT*), ``dataset`` (ground-truth
heatmap corpus generation), ``evaluation`` (connectivity test and benchmark
harness), ``cli`` (command-line front end).
"""

from .gridworld import (
    GridMap,
    PlanningQuery,
    WorldPoint,
    decode_map_image,
    encode_map_image,
    generate_random_map,
    is_free,
    segment_obstacle_free,
)
from .planners import (
    PlannerConfig,
    PlanPath,
    PlanResult,
    Tree,
    cgan_rrt_star_plan,
    rrt_plan,
    rrt_star_plan,
)
from .sampling import (
    Heatmap,
    SamplerConfig,
    SamplingDistribution,
    build_distribution,
    sample_hybrid,
    sample_nonuniform,
    sample_uniform_free,
)

__all__ = [
    "GridMap",
    "PlanningQuery",
    "WorldPoint",
    "decode_map_image",
    "encode_map_image",
    "generate_random_map",
    "is_free",
    "segment_obstacle_free",
    "Heatmap",
    "SamplerConfig",
    "SamplingDistribution",
    "build_distribution",
    "sample_hybrid",
    "sample_nonuniform",
    "sample_uniform_free",
    "PlannerConfig",
    "PlanPath",
    "PlanResult",
    "Tree",
    "cgan_rrt_star_plan",
    "rrt_plan",
    "rrt_star_plan",
]

__version__ = "0.1.0"
