"""Fingerprint enhancement: local normalization, orientation field, oriented filtering.

The stages operate on intensities scaled to [0, 1] so the noise-suppression
parameter C (nominally in (0, 1]) is dimensionally meaningful.  The oriented
ridge filter is realized as a small isotropic blur followed by a per-pixel
1-D line kernel steered by the orientation field, which approximates a dense
anisotropic Gaussian while staying hardware-friendly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._filters import gaussian_blur, gaussian_gradients

# Floor applied to the local standard deviation before dividing; background
# pixels are already suppressed by the variance-driven mask, the floor only
# prevents overflow where variance is exactly zero.
EPS_STD = 1e-4


@dataclass
class FilterParams:
    """Tunables for enhancement; defaults follow the 500-dpi ridge scale."""

    sigma_x: float = 4.0          # along-ridge smoothing scale
    sigma_y: float = 1.5          # across-ridge (isotropic pass) scale
    window_length: int = 17       # taps of the steered line kernel, odd
    noise_c: float = 0.3          # background suppression knee, in (0, 1]
    sigma_grad: float = 0.5       # gradient kernel scale
    sigma_cov: float = 1.0        # gradient-product smoothing
    sigma_angle: float = 7.0      # doubled-angle smoothing
    stats_sigma: float = 4.0      # neighborhood for local mean/variance

    def __post_init__(self) -> None:
        if self.window_length % 2 != 1 or self.window_length < 3:
            raise ValueError("window_length must be odd and >= 3")
        for name in ("sigma_x", "sigma_y", "sigma_grad", "sigma_cov",
                     "sigma_angle", "stats_sigma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.noise_c <= 1.0:
            raise ValueError("noise_c must be in (0, 1]")

    @property
    def sigma_line(self) -> float:
        # Line-kernel scale of the separable decomposition: the isotropic and
        # line variances must add up to sigma_x^2 along the ridge direction.
        return math.sqrt(max(self.sigma_x**2 - self.sigma_y**2, 0.25))


@dataclass
class LocalStats:
    """Per-pixel Gaussian-weighted mean and variance on the [0, 1] scale."""

    mean: np.ndarray
    variance: np.ndarray


@dataclass
class NormalizedImage:
    """Zero-mean, contrast-equalized image with its background mask factor.

    ``values`` already include the multiplicative mask, i.e. background
    pixels are pulled toward zero.
    """

    values: np.ndarray
    mask: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass
class OrientationField:
    """Ridge orientation per pixel, radians in [0, pi); pi-periodic."""

    theta: np.ndarray
    coherence: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.coherence is None:
            self.coherence = np.ones_like(self.theta)


def local_stats(image: np.ndarray, neighborhood_sigma: float) -> LocalStats:
    """Gaussian-weighted local mean and variance of an 8-bit image.

    Both statistics are computed on intensities scaled to [0, 1] with
    replicate borders.  The variance is the weighted average of squared
    deviation about the weighted mean, i.e. E[v^2] - E[v]^2.
    """
    scaled = np.asarray(image, dtype=np.float64) / 255.0
    mean = gaussian_blur(scaled, neighborhood_sigma)
    var = gaussian_blur(scaled * scaled, neighborhood_sigma) - mean * mean
    np.clip(var, 0.0, None, out=var)
    return LocalStats(mean=mean, variance=var)


def noise_suppression_factor(variance: np.ndarray | float, c: float) -> np.ndarray:
    """Background mask 1 - exp(-variance / (2 c^2)), zero on flat regions."""
    return 1.0 - np.exp(-np.asarray(variance, dtype=np.float64) / (2.0 * c * c))


def normalize(image: np.ndarray, params: FilterParams) -> NormalizedImage:
    """Local mean/variance normalization with variance-driven background masking."""
    stats = local_stats(image, params.stats_sigma)
    scaled = np.asarray(image, dtype=np.float64) / 255.0
    std = np.maximum(np.sqrt(stats.variance), EPS_STD)
    mask = noise_suppression_factor(stats.variance, params.noise_c)
    values = (scaled - stats.mean) / std * mask
    return NormalizedImage(values=values, mask=mask)


def estimate_orientation(image: NormalizedImage, params: FilterParams) -> OrientationField:
    """Doubled-angle ridge orientation from smoothed gradient products."""
    v = image.values
    if v.shape[0] < 3 or v.shape[1] < 3:
        raise ValueError("image must be at least 3x3")
    gx, gy = gaussian_gradients(v, params.sigma_grad)
    gxx = gaussian_blur(gx * gx, params.sigma_cov)
    gxy = gaussian_blur(gx * gy, params.sigma_cov)
    gyy = gaussian_blur(gy * gy, params.sigma_cov)

    # Opposite gradients on the two ridge edges cancel in plain averaging;
    # the doubled-angle pair (gxx - gyy, 2 gxy) makes them reinforce.
    a = gaussian_blur(gxx - gyy, params.sigma_angle)
    b = gaussian_blur(2.0 * gxy, params.sigma_angle)
    energy = gaussian_blur(gxx + gyy, params.sigma_angle)

    theta = (0.5 * np.arctan2(b, a) + 0.5 * np.pi) % np.pi
    strength = np.hypot(a, b)
    coherence = np.where(energy > 1e-12, strength / np.maximum(energy, 1e-12), 0.0)
    np.clip(coherence, 0.0, 1.0, out=coherence)

    flat = strength <= 1e-12
    theta[flat] = 0.0
    coherence[flat] = 0.0
    return OrientationField(theta=theta, coherence=coherence)


def oriented_filter_values(
    image: NormalizedImage, fld: OrientationField, params: FilterParams
) -> np.ndarray:
    """Two-pass steerable ridge filter; returns unscaled float values.

    Pass 1 is an isotropic Gaussian.  Pass 2 walks the line of angle theta
    taking one nearest-neighbour sample per column for primarily-horizontal
    angles (|tan theta| <= 1) and one per row otherwise, over
    ``window_length`` taps; tap weights are the line Gaussian evaluated at
    the true arc-length distance and normalized per pixel.  Borders
    replicate.  The hardware backend runs the same geometry in fixed point.
    """
    if fld.theta.shape != image.values.shape:
        raise ValueError("orientation field does not match image dimensions")
    base = gaussian_blur(image.values, params.sigma_y)

    half = params.window_length // 2
    h, w = base.shape
    ys, xs = np.mgrid[0:h, 0:w]
    cos_t = np.cos(fld.theta)
    sin_t = np.sin(fld.theta)
    horiz = np.abs(sin_t) <= np.abs(cos_t)
    # slope of the line per unit step of the major axis
    slope = np.where(
        horiz,
        sin_t / np.where(np.abs(cos_t) < 1e-12, 1e-12, cos_t),
        cos_t / np.where(np.abs(sin_t) < 1e-12, 1e-12, sin_t),
    )
    # arc length per major-axis step: 1 / max(|cos|, |sin|)
    step = 1.0 / np.maximum(np.abs(cos_t), np.abs(sin_t))

    num = np.zeros_like(base)
    den = np.zeros_like(base)
    for t in range(-half, half + 1):
        wt = np.exp(-0.5 * ((t * step) / params.sigma_line) ** 2)
        minor = np.floor(t * slope + 0.5).astype(np.int64)
        px = np.where(horiz, xs + t, xs + minor)
        py = np.where(horiz, ys + minor, ys + t)
        np.clip(px, 0, w - 1, out=px)
        np.clip(py, 0, h - 1, out=py)
        num += wt * base[py, px]
        den += wt
    return num / den


def oriented_filter(
    image: NormalizedImage, fld: OrientationField, params: FilterParams
) -> np.ndarray:
    """Oriented ridge filter returning an 8-bit image (min-max rescaled)."""
    return rescale_to_u8(oriented_filter_values(image, fld, params))


def rescale_to_u8(values: np.ndarray) -> np.ndarray:
    """Affine min-max rescale to [0, 255]; a constant input maps to 128."""
    lo = float(values.min())
    hi = float(values.max())
    if hi - lo < 1e-12:
        return np.full(values.shape, 128, dtype=np.uint8)
    return np.rint((values - lo) / (hi - lo) * 255.0).astype(np.uint8)


def binarize(image: np.ndarray, threshold: float) -> np.ndarray:
    """Threshold to the ridge map convention: 0 = ridge, 1 = background.

    A pixel strictly below the threshold is ridge.
    """
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must be in [0, 255]")
    return (np.asarray(image) >= threshold).astype(np.uint8)


def binarize_values(values: np.ndarray) -> np.ndarray:
    """Sign-test binarization of zero-mean filtered values (0 = ridge)."""
    return (np.asarray(values) >= 0.0).astype(np.uint8)
