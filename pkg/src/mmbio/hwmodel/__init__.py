"""Fixed-point streaming backend: line-buffered operators, CORDIC, pipelining."""

from .chains import (
    HwParams,
    enhance_unwrapped,
    fingerprint_features,
    fingerprint_stages,
    fixed_enhance,
    iris_code_from_eye,
    iris_enhance_stages,
    match_fingerprint,
    to_polar_cordic,
)
from .cordic import cordic_polar, polar_float
from .fixed import (
    CORDIC_ACC_Q,
    CORDIC_INPUT_Q,
    CORDIC_OUT_Q,
    ENHANCE_WEIGHT_Q,
    PIXEL_WEIGHT_Q,
    FixedPoint,
    QFormat,
    saturate,
)
from .runner import PipelineRun, StageReport, run_chain, run_pipeline
from .stages import (
    BinarizeStage,
    BufferStage,
    ContrastDivideStage,
    DetailStage,
    GuidedLineStage,
    IsoBlurStage,
    MapStage,
    NormalizeStage,
    OrientationStage,
    Stage,
    ThinStage,
    build_offset_tables,
)

__all__ = [
    "HwParams",
    "FixedPoint",
    "QFormat",
    "saturate",
    "CORDIC_ACC_Q",
    "CORDIC_INPUT_Q",
    "CORDIC_OUT_Q",
    "ENHANCE_WEIGHT_Q",
    "PIXEL_WEIGHT_Q",
    "cordic_polar",
    "polar_float",
    "run_pipeline",
    "run_chain",
    "PipelineRun",
    "StageReport",
    "Stage",
    "MapStage",
    "BufferStage",
    "NormalizeStage",
    "OrientationStage",
    "IsoBlurStage",
    "GuidedLineStage",
    "BinarizeStage",
    "ThinStage",
    "DetailStage",
    "ContrastDivideStage",
    "build_offset_tables",
    "fingerprint_stages",
    "fingerprint_features",
    "iris_enhance_stages",
    "enhance_unwrapped",
    "fixed_enhance",
    "iris_code_from_eye",
    "to_polar_cordic",
    "match_fingerprint",
]
