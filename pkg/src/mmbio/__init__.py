"""Multimodal fingerprint + iris recognition with dual backends.

Reference backend: floating-point implementations of the published
algorithms.  Hardware-model backend: fixed-point, line-buffered, stage-
pipelined versions of the same pipeline.  The CLI harness measures
FAR/FRR/EER and cross-backend equivalence.
"""

from . import (
    config,
    evaluation,
    features,
    fp_enhance,
    fp_match,
    fp_minutiae,
    fusion,
    hwmodel,
    imgio,
    iris_code,
    iris_segment,
    synth,
)

__version__ = "0.1.0"

__all__ = [
    "config",
    "evaluation",
    "features",
    "fp_enhance",
    "fp_match",
    "fp_minutiae",
    "fusion",
    "hwmodel",
    "imgio",
    "iris_code",
    "iris_segment",
    "synth",
    "__version__",
]
