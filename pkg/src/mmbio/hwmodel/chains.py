"""Hardware-model feature pipelines built from the streaming stages.

The fingerprint chain mirrors the reference pipeline (normalize,
orientation, isotropic blur, guided line filter, binarize, thin) with
fixed-point windowed operators wherever the data flow is local.  The iris
chain reuses the reference segmentation (pupil search and unwrap need whole
frames buffered anyway) and runs the fixed-point enhancement stages.
Matching uses CORDIC polar conversion in place of library transcendentals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..fp_enhance import FilterParams
from ..fp_match import ElasticTolerances, PolarMinutia, elastic_match, rank_alignments
from ..fp_minutiae import MinutiaeSet, extract_minutiae
from ..fp_enhance import OrientationField
from ..iris_code import EnhancedIris, IrisCode, bitplane_slice
from ..iris_segment import UnwrappedIris, detect_pupil, find_limbic, unwrap
from .cordic import polar_float
from .runner import run_chain
from .stages import (
    BinarizeStage,
    ContrastDivideStage,
    DetailStage,
    GuidedLineStage,
    IsoBlurStage,
    NormalizeStage,
    OrientationStage,
    Stage,
    ThinStage,
)


@dataclass
class HwParams:
    cordic_iterations: int = 16
    angle_steps: int = 256       # quantized orientation codes over pi
    norm_scale: int = 64         # 8-bit re-centring gain of the normalize stage
    iris_enhance: str = "rms"    # "rms" tracks the reference; "gamma" is the
                                 # power-law/clip streaming design
    binarize_threshold: int = 128

    def __post_init__(self) -> None:
        if self.iris_enhance not in ("rms", "gamma"):
            raise ValueError(f"unknown iris_enhance variant {self.iris_enhance!r}")
        if not 1 <= self.cordic_iterations <= 24:
            raise ValueError("cordic_iterations must be in [1, 24]")


def fingerprint_stages(params: FilterParams, hw: HwParams) -> list[Stage]:
    return [
        NormalizeStage(params, scale=hw.norm_scale),
        OrientationStage(params, norm_scale=hw.norm_scale, angle_steps=hw.angle_steps),
        IsoBlurStage(params.sigma_y),
        GuidedLineStage(params, angle_steps=hw.angle_steps),
        BinarizeStage(hw.binarize_threshold),
        ThinStage(),
    ]


def iris_enhance_stages(sigma1: float, hw: HwParams) -> list[Stage]:
    return [
        DetailStage(sigma1),
        ContrastDivideStage(sigma1 / 2.0, variant=hw.iris_enhance),
    ]


def fingerprint_features(
    image: np.ndarray, params: FilterParams, hw: HwParams, border_margin: int = 12
) -> tuple[MinutiaeSet, np.ndarray, OrientationField]:
    """Fixed-point skeleton and minutiae of a fingerprint image.

    Returns (minutiae, skeleton, orientation field); the field carries the
    dequantized 8-bit angles the hardware would store.
    """
    stages = fingerprint_stages(params, hw)
    skeleton = run_chain(stages, image)
    orient = stages[1]
    assert isinstance(orient, OrientationStage)
    theta = orient.dequantized_theta()
    fld = OrientationField(theta=theta, coherence=np.ones_like(theta))
    minutiae = extract_minutiae(skeleton, fld, border_margin)
    return minutiae, skeleton, fld


def enhance_unwrapped(unwrapped: UnwrappedIris, sigma1: float, hw: HwParams) -> EnhancedIris:
    """Fixed-point enhancement of the iris rows inside the limbic boundary."""
    if unwrapped.limbic_row is None:
        raise ValueError("limbic row must be located before enhancement")
    rows = unwrapped.limbic_row
    sub = unwrapped.values[:rows]
    enhanced = run_chain(iris_enhance_stages(sigma1, hw), sub)
    return EnhancedIris(
        values=enhanced.astype(np.uint8),
        valid=unwrapped.valid[:rows].copy(),
        provenance="hardware-model",
    )


def fixed_enhance(values: np.ndarray, sigma1: float = 4.0,
                  variant: str = "gamma") -> np.ndarray:
    """Streaming fixed-point iris enhancement of a raw unwrapped raster.

    The default "gamma" variant is the hardware design: power-law (0.75)
    compressed local contrast, clipped to [50, 255], integer division,
    output re-centred on 128.
    """
    hw = HwParams(iris_enhance=variant)
    return run_chain(iris_enhance_stages(sigma1, hw), np.asarray(values))


def iris_code_from_eye(
    eye: np.ndarray,
    hw: HwParams,
    sigma1: float = 4.0,
    radial_samples: int = 64,
    angular_samples: int = 360,
    outer_multiple: float = 2.8,
    blur_sigma: float = 5.0,
    area_min: float = 300.0,
    area_frac_max: float = 0.25,
    ecc_max: float = 0.6,
) -> IrisCode:
    """Segment, unwrap, enhance (fixed point), and slice an eye image."""
    pupil = detect_pupil(eye, blur_sigma=blur_sigma, area_min=area_min,
                         area_frac_max=area_frac_max, ecc_max=ecc_max)
    unwrapped = unwrap(eye, pupil, radial_samples, angular_samples, outer_multiple)
    find_limbic(unwrapped)
    return bitplane_slice(enhance_unwrapped(unwrapped, sigma1, hw))


def to_polar_cordic(
    mset: MinutiaeSet, ref_index: int, dtheta: float = 0.0, iterations: int = 16
) -> list[PolarMinutia]:
    """CORDIC counterpart of the reference polar conversion."""
    ref = mset.minutiae[ref_index]
    bound = float(max(mset.source_width, mset.source_height, 1))
    out = []
    for m in mset.minutiae:
        ddx = float(m.x - ref.x)
        ddy = float(m.y - ref.y)
        if ddx == 0.0 and ddy == 0.0:
            out.append(PolarMinutia(r=0.0, theta=0.0, o=(m.angle - dtheta) % math.pi))
            continue
        r, theta = polar_float(ddx, ddy, iterations, magnitude_bound=bound)
        theta = -((-theta + dtheta + math.pi) % (2.0 * math.pi) - math.pi)
        out.append(PolarMinutia(r=r, theta=theta, o=(m.angle - dtheta) % math.pi))
    return out


def match_fingerprint(
    probe: MinutiaeSet,
    template: MinutiaeSet,
    tol: ElasticTolerances | None = None,
    neighbor_radius: float = 50.0,
    hypotheses: int = 3,
    iterations: int = 16,
) -> float:
    """Fingerprint match score with CORDIC polar conversion."""
    if tol is None:
        tol = ElasticTolerances()
    if len(probe) == 0 or len(template) == 0:
        return 0.0
    best = 0.0
    for hyp in rank_alignments(probe, template, neighbor_radius)[:hypotheses]:
        probe_polar = to_polar_cordic(probe, hyp.input_index, hyp.dtheta, iterations)
        tmpl_polar = to_polar_cordic(template, hyp.template_index, 0.0, iterations)
        probe_polar.sort(key=lambda p: p.theta)
        tmpl_polar.sort(key=lambda p: p.theta)
        best = max(best, elastic_match(probe_polar, tmpl_polar, tol))
    return best
