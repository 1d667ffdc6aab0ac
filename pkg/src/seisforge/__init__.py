"""Synthetic seismic workbench.

Random layered velocity models with salt bodies, 2D acoustic forward
modeling, reverse-time migration, image-quality metrics, magnitude-based
weight pruning, and cell-search (relaxation/discretization) utilities, tied
together by a deterministic batch pipeline and CLI.
"""

from .velmodel import (
    ConvexPolygon,
    Grid2D,
    LayerConfig,
    SaltConfig,
    VelocityModel,
    convex_hull,
    generate_background,
    generate_model,
    insert_salt,
    rasterize_union,
)
from .wavesim import (
    Acquisition,
    DivergenceError,
    RickerSource,
    ShotGather,
    SpongeBoundary,
    StabilityError,
    WavefieldHistory,
    cfl_max_dt,
    forward_model,
    ricker,
    step,
)
from .rtm import (
    MigrationModel,
    RtmImage,
    laplacian_filter,
    rtm_shot,
    smooth_model,
    stack_images,
)
from .metrics import (
    FeatureExtractor,
    SsimConfig,
    Stage,
    combined_loss,
    feature_loss,
    pixel_loss,
    ssim,
)
from .pruner import apply_mask, level_prune, sparsity_of
from .nas import (
    BackboneConfig,
    CellSpec,
    Genotype,
    OPS,
    discretize,
    param_count,
    parse_genotype,
    relax,
    search_space_size,
    serialize_genotype,
)
from .config import AcquisitionPlan, ConfigError, PipelineConfig, load_config, parse_config
from .pipeline import fnv1a64, run_dataset
from .rng import Stream, mix

__version__ = "0.1.0"
