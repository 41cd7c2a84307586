"""Backend dispatch: full feature pipelines for both backends.

The reference backend composes the floating-point modules; the
hardware-model backend swaps in the fixed-point streaming stages and
CORDIC matching.  Scores come back as fusion.MatchScore values so the
harness treats both traits uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fp_enhance, fp_match, fp_minutiae, fusion, hwmodel, iris_code, iris_segment
from .config import RunConfig
from .errors import PipelineError
from .imgio import TemplateRecord


@dataclass
class FingerprintFeatures:
    minutiae: fp_minutiae.MinutiaeSet
    skeleton: np.ndarray
    enhanced: np.ndarray
    field: fp_enhance.OrientationField


def fingerprint_features(image: np.ndarray, cfg: RunConfig) -> FingerprintFeatures:
    params = cfg.fp_enhance
    if cfg.backend == "hardware-model":
        mset, skeleton, fld = hwmodel.fingerprint_features(
            image, params, cfg.hwmodel, cfg.fp_minutiae.border_margin
        )
        return FingerprintFeatures(
            minutiae=mset,
            skeleton=skeleton,
            enhanced=skeleton,
            field=fld,
        )
    norm = fp_enhance.normalize(image, params)
    fld = fp_enhance.estimate_orientation(norm, params)
    values = fp_enhance.oriented_filter_values(norm, fld, params)
    binary = fp_enhance.binarize_values(values)
    skeleton = fp_minutiae.thin(binary)
    mset = fp_minutiae.extract_minutiae(skeleton, fld, cfg.fp_minutiae.border_margin)
    return FingerprintFeatures(
        minutiae=mset,
        skeleton=skeleton,
        enhanced=fp_enhance.rescale_to_u8(values),
        field=fld,
    )


def iris_code_features(eye: np.ndarray, cfg: RunConfig) -> iris_code.IrisCode:
    p = cfg.iris
    if cfg.backend == "hardware-model":
        return hwmodel.iris_code_from_eye(
            eye,
            cfg.hwmodel,
            sigma1=p.sigma1,
            radial_samples=p.radial_samples,
            angular_samples=p.angular_samples,
            outer_multiple=p.outer_multiple,
            blur_sigma=p.blur_sigma,
            area_min=p.area_min,
            area_frac_max=p.area_frac_max,
            ecc_max=p.ecc_max,
        )
    pupil = iris_segment.detect_pupil(
        eye, blur_sigma=p.blur_sigma, area_min=p.area_min,
        area_frac_max=p.area_frac_max, ecc_max=p.ecc_max,
    )
    unwrapped = iris_segment.unwrap(
        eye, pupil, p.radial_samples, p.angular_samples, p.outer_multiple
    )
    iris_segment.find_limbic(unwrapped)
    enhanced = iris_code.enhance(unwrapped, sigma1=p.sigma1)
    return iris_code.bitplane_slice(enhanced)


def match_fingerprint_sets(
    probe: fp_minutiae.MinutiaeSet, template: fp_minutiae.MinutiaeSet, cfg: RunConfig
) -> float:
    mp = cfg.fp_match
    if cfg.backend == "hardware-model":
        return hwmodel.match_fingerprint(
            probe, template, mp.tolerances(), mp.neighbor_radius, mp.hypotheses,
            cfg.hwmodel.cordic_iterations,
        )
    return fp_match.match_fingerprint(
        probe, template, mp.tolerances(), mp.neighbor_radius, mp.hypotheses
    )


def match_iris_codes(
    probe: iris_code.IrisCode, template: iris_code.IrisCode, cfg: RunConfig
) -> iris_code.IrisScore:
    rows = min(probe.rows, template.rows)
    if rows < 1 or probe.cols != template.cols:
        raise PipelineError("iris codes have incompatible layouts")
    a = iris_code.truncate_rows(probe, rows)
    b = iris_code.truncate_rows(template, rows)
    return iris_code.hamming(a, b, cfg.iris.rotations)


@dataclass
class TrialScores:
    fingerprint: fusion.MatchScore
    iris: fusion.MatchScore
    decision: fusion.FusedDecision
    warnings: list[str]


def score_probe_pair(
    probe_fp: np.ndarray | None,
    probe_iris: np.ndarray | None,
    template: TemplateRecord,
    cfg: RunConfig,
) -> TrialScores:
    """Score one probe pair against a template.

    A trait whose pipeline fails contributes similarity 0 with a warning,
    and fusion still runs on the other trait (excluding failed trials would
    bias the error rates).
    """
    warnings = []
    fp_value = 0.0
    if probe_fp is None:
        warnings.append("fingerprint: probe unavailable")
    else:
        try:
            feats = fingerprint_features(probe_fp, cfg)
            fp_value = match_fingerprint_sets(feats.minutiae, template.fingerprint, cfg)
        except PipelineError as exc:
            warnings.append(f"fingerprint: {exc}")
    fp_score = fusion.MatchScore(value=fp_value, polarity=fusion.SIMILARITY,
                                 trait=fusion.FINGERPRINT)

    iris_hd = 1.0  # worst dissimilarity when the trait fails
    if probe_iris is None:
        warnings.append("iris: probe unavailable")
    else:
        try:
            code = iris_code_features(probe_iris, cfg)
            iris_hd = match_iris_codes(code, template.iris, cfg).hd
        except PipelineError as exc:
            warnings.append(f"iris: {exc}")
    iris_score = fusion.MatchScore(value=iris_hd, polarity=fusion.DISSIMILARITY,
                                   trait=fusion.IRIS)

    decision = fusion.fuse(fp_score, iris_score, cfg.fusion)
    return TrialScores(fingerprint=fp_score, iris=iris_score,
                       decision=decision, warnings=warnings)
