"""Independent oracles: direct dense implementations used only by tests.

Each oracle recomputes an expected result through a different code path
than the implementation under test (dense 2-D convolution instead of
separable passes, textbook parallel thinning instead of the confirmed
sequential variant, explicit transition counting instead of the closed
crossing-number formula).
"""

from __future__ import annotations

import math

import numpy as np


def dense_gaussian_blur(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Direct 2-D convolution with a sampled Gaussian, clamped indices."""
    radius = max(1, math.ceil(4.0 * sigma))
    d = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-0.5 * (d[:, None] ** 2 + d[None, :] ** 2) / sigma**2)
    kernel /= kernel.sum()
    src = np.asarray(arr, dtype=np.float64)
    h, w = src.shape
    out = np.zeros_like(src)
    for i, dy in enumerate(range(-radius, radius + 1)):
        ys = np.clip(np.arange(h) + dy, 0, h - 1)
        for j, dx in enumerate(range(-radius, radius + 1)):
            xs = np.clip(np.arange(w) + dx, 0, w - 1)
            out += kernel[i, j] * src[np.ix_(ys, xs)]
    return out


def dense_oriented_gaussian(
    values: np.ndarray,
    theta: np.ndarray,
    sigma_x: float,
    sigma_y: float,
    window: int,
) -> np.ndarray:
    """Dense per-pixel anisotropic Gaussian filter over a window x window
    neighbourhood, kernel normalized per pixel, replicate borders."""
    src = np.asarray(values, dtype=np.float64)
    h, w = src.shape
    half = window // 2
    num = np.zeros_like(src)
    den = np.zeros_like(src)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    for dy in range(-half, half + 1):
        ys = np.clip(np.arange(h) + dy, 0, h - 1)
        for dx in range(-half, half + 1):
            xs = np.clip(np.arange(w) + dx, 0, w - 1)
            along = dx * cos_t + dy * sin_t
            across = -dx * sin_t + dy * cos_t
            k = np.exp(-0.5 * ((along / sigma_x) ** 2 + (across / sigma_y) ** 2))
            num += k * src[np.ix_(ys, xs)]
            den += k
    return num / den


def zhang_suen_parallel(binary: np.ndarray) -> np.ndarray:
    """Textbook parallel Zhang-Suen thinning (ridge = 0 convention)."""
    ridge = (np.asarray(binary) == 0).astype(np.uint8)
    h, w = ridge.shape

    def neighbours(img, y, x):
        return [
            img[y - 1, x], img[y - 1, x + 1], img[y, x + 1], img[y + 1, x + 1],
            img[y + 1, x], img[y + 1, x - 1], img[y, x - 1], img[y - 1, x - 1],
        ]

    changed = True
    while changed:
        changed = False
        for subpass in (0, 1):
            marked = []
            for y in range(1, h - 1):
                for x in range(1, w - 1):
                    if not ridge[y, x]:
                        continue
                    nb = neighbours(ridge, y, x)
                    b = sum(nb)
                    if not 2 <= b <= 6:
                        continue
                    a = sum(
                        1 for k in range(8) if nb[k] == 0 and nb[(k + 1) % 8] == 1
                    )
                    if a != 1:
                        continue
                    p2, p4, p6, p8 = nb[0], nb[2], nb[4], nb[6]
                    if subpass == 0:
                        if p2 * p4 * p6 == 0 and p4 * p6 * p8 == 0:
                            marked.append((y, x))
                    else:
                        if p2 * p4 * p8 == 0 and p2 * p6 * p8 == 0:
                            marked.append((y, x))
            for y, x in marked:
                ridge[y, x] = 0
                changed = True
    return np.where(ridge == 1, 0, 1).astype(np.uint8)


def crossing_number_bruteforce(pattern: list[int]) -> int:
    """Transition count around the ring divided by two, walked explicitly."""
    transitions = 0
    for k in range(8):
        transitions += pattern[k] != pattern[(k + 1) % 8]
    return transitions // 2


def count_components(ridge_mask: np.ndarray) -> int:
    """8-connected component count by explicit flood fill."""
    mask = np.asarray(ridge_mask, dtype=bool).copy()
    h, w = mask.shape
    count = 0
    for sy in range(h):
        for sx in range(w):
            if not mask[sy, sx]:
                continue
            count += 1
            stack = [(sy, sx)]
            mask[sy, sx] = False
            while stack:
                y, x = stack.pop()
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx]:
                            mask[ny, nx] = False
                            stack.append((ny, nx))
    return count


def skeleton_is_thin(skeleton: np.ndarray) -> bool:
    """No 2x2 all-ridge block survives in a properly thinned map."""
    ridge = np.asarray(skeleton) == 0
    blocks = ridge[:-1, :-1] & ridge[1:, :-1] & ridge[:-1, 1:] & ridge[1:, 1:]
    return not blocks.any()


def minutiae_hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two minutiae sets, pixels."""
    if len(a.minutiae) == 0 and len(b.minutiae) == 0:
        return 0.0
    if len(a.minutiae) == 0 or len(b.minutiae) == 0:
        return float("inf")
    pa = np.array([(m.x, m.y) for m in a.minutiae], dtype=np.float64)
    pb = np.array([(m.x, m.y) for m in b.minutiae], dtype=np.float64)
    d = np.hypot(pa[:, None, 0] - pb[None, :, 0], pa[:, None, 1] - pb[None, :, 1])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))
