"""Score normalization, weighted sum-rule fusion, and the accept decision."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CalibrationError

SIMILARITY = "similarity"
DISSIMILARITY = "dissimilarity"

FINGERPRINT = "fingerprint"
IRIS = "iris"


@dataclass(frozen=True)
class MatchScore:
    value: float
    polarity: str  # SIMILARITY or DISSIMILARITY
    trait: str     # FINGERPRINT or IRIS

    def __post_init__(self) -> None:
        if not 0.0 <= self.value <= 1.0:
            raise ValueError("score value must lie in [0, 1]")
        if self.polarity not in (SIMILARITY, DISSIMILARITY):
            raise ValueError(f"unknown polarity {self.polarity!r}")
        if self.trait not in (FINGERPRINT, IRIS):
            raise ValueError(f"unknown trait {self.trait!r}")


@dataclass
class FusionParams:
    w_fp: float = 0.4
    w_iris: float = 0.6
    threshold: float = 0.5
    normalization: str = "min-max"  # or "none"
    # Calibration bounds per trait; the (0, 1) defaults make min-max a no-op
    # until the harness supplies dataset-specific genuine/impostor ranges.
    fp_lo: float = 0.0
    fp_hi: float = 1.0
    iris_lo: float = 0.0
    iris_hi: float = 1.0

    def __post_init__(self) -> None:
        if self.w_fp < 0 or self.w_iris < 0:
            raise ValueError("fusion weights must be nonnegative")
        if abs(self.w_fp + self.w_iris - 1.0) > 1e-9:
            raise ValueError("fusion weights must sum to 1")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.normalization not in ("min-max", "none"):
            raise ValueError(f"unknown normalization {self.normalization!r}")


@dataclass(frozen=True)
class FusedDecision:
    fused_score: float
    accept: bool
    component_scores: tuple[float, float]  # (fingerprint, iris) similarities


def to_similarity(score: MatchScore) -> float:
    """Similarity scores pass through; dissimilarities (iris HD) invert."""
    return score.value if score.polarity == SIMILARITY else 1.0 - score.value


def min_max_normalize(scores, lo: float, hi: float) -> list[float]:
    """Affine map of scores onto [0, 1], clamped at the calibration bounds."""
    if hi <= lo:
        raise CalibrationError("calibration bounds must satisfy hi > lo")
    return [min(max((s - lo) / (hi - lo), 0.0), 1.0) for s in scores]


def fuse(fp: MatchScore, iris: MatchScore, params: FusionParams) -> FusedDecision:
    """Weighted sum of the per-trait similarities, thresholded."""
    s_fp = to_similarity(fp)
    s_iris = to_similarity(iris)
    if params.normalization == "min-max":
        s_fp = min_max_normalize([s_fp], params.fp_lo, params.fp_hi)[0]
        s_iris = min_max_normalize([s_iris], params.iris_lo, params.iris_hi)[0]
    fused = params.w_fp * s_fp + params.w_iris * s_iris
    fused = min(max(fused, 0.0), 1.0)
    return FusedDecision(
        fused_score=fused,
        accept=fused >= params.threshold,
        component_scores=(s_fp, s_iris),
    )
