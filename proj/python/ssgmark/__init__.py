"""Python bindings for the ssgmark watermarking library."""

from ._ssgmark import (
    ConfigError,
    DegenerateWeights,
    DetectionReport,
    GenerationRecord,
    InvalidArgument,
    NGramModel,
    NoScorableTokens,
    ParseError,
    StepRecord,
    TooShort,
    WatermarkConfig,
    biased_green_mass,
    calibrate_threshold,
    detect,
    entropy,
    ewd_z,
    generate,
    kgw_partition,
    kgw_z,
    run_cli,
    softmax,
    ssg_partition,
    strength_bounds,
    sweet_z,
    tpr_f1_at_fpr,
    watermark_strength,
)

__version__ = "0.1.0"
