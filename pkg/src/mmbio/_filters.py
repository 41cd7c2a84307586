"""Separable Gaussian filtering with explicit, reproducible kernels.

All smoothing in the package goes through these helpers so that both the
algorithms and the test oracles agree on kernel sampling and truncation:
a 1-D kernel with standard deviation ``sigma`` has radius
``max(1, ceil(4 * sigma))`` and taps ``exp(-d^2 / (2 sigma^2))`` normalized
to unit sum.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage


def gaussian_kernel1d(sigma: float, radius: int | None = None) -> np.ndarray:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if radius is None:
        radius = max(1, math.ceil(4.0 * sigma))
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (d / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(
    arr: np.ndarray,
    sigma: float,
    mode: str | tuple[str, str] = "nearest",
) -> np.ndarray:
    """Separable Gaussian blur of a 2-D array.

    ``mode`` is a scipy boundary mode, or a (row-axis, column-axis) pair;
    "nearest" replicates edges, "wrap" makes the axis cyclic.
    """
    if isinstance(mode, str):
        mode = (mode, mode)
    k = gaussian_kernel1d(sigma)
    out = np.asarray(arr, dtype=np.float64)
    out = ndimage.convolve1d(out, k, axis=0, mode=mode[0])
    out = ndimage.convolve1d(out, k, axis=1, mode=mode[1])
    return out


def gaussian_gradients(arr: np.ndarray, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Derivative-of-Gaussian gradients (d/dx, d/dy) with replicated borders.

    x runs along columns, y along rows (y grows downward).
    """
    src = np.asarray(arr, dtype=np.float64)
    gx = ndimage.gaussian_filter(src, sigma, order=(0, 1), mode="nearest")
    gy = ndimage.gaussian_filter(src, sigma, order=(1, 0), mode="nearest")
    return gx, gy


def moving_average_cyclic(arr: np.ndarray, width: int, axis: int) -> np.ndarray:
    """Uniform moving average along one axis, treating it as cyclic."""
    return ndimage.uniform_filter1d(
        np.asarray(arr, dtype=np.float64), size=width, axis=axis, mode="wrap"
    )
