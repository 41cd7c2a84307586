"""Streaming stages: line-buffered windowed operators and wrapped whole-image ops.

A stage consumes one row per ``feed`` call and returns the rows it can emit
so far; ``finish`` flushes whatever needed bottom-edge replication.  Payload
rows are numpy 1-D arrays, or tuples of them when a stage forwards side
information (the orientation row rides along with the pixel row until the
guided filter consumes it).
"""

from __future__ import annotations

import numpy as np

from .._filters import gaussian_kernel1d
from ..fp_enhance import EPS_STD, FilterParams, estimate_orientation, NormalizedImage
from ..fp_minutiae import thin
from .fixed import (
    ENHANCE_WEIGHT_Q,
    PIXEL_WEIGHT_Q,
    div_round_signed,
    div_trunc_signed,
    isqrt_round,
    quantize_weights,
    round_half_up,
    shift_round,
    shift_round_signed,
)

GAMMA = 0.75
CONTRAST_CLIP_LO = 50
CONTRAST_CLIP_HI = 255


class Stage:
    """One pipeline operation; subclasses keep whatever line buffers they need."""

    name = "stage"

    def feed(self, row):
        raise NotImplementedError

    def finish(self):
        return []

    def reset(self) -> None:
        """Return to the pristine pre-stream state."""
        raise NotImplementedError


class MapStage(Stage):
    """Stateless per-row function; unit latency in rows."""

    def __init__(self, name, fn):
        self.name = name
        self._fn = fn

    def feed(self, row):
        return [self._fn(row)]

    def reset(self) -> None:
        pass


class BufferStage(Stage):
    """Whole-image operation: buffers the full stream, emits at finish.

    Models operations the streaming architecture itself must buffer
    (thinning, connected components, anything global).
    """

    def __init__(self, name, fn):
        self.name = name
        self._fn = fn
        self._rows = []

    def feed(self, row):
        self._rows.append(row)
        return []

    def finish(self):
        out = self._fn(np.stack(self._rows))
        self._rows = []
        return [out[i] for i in range(out.shape[0])]

    def reset(self) -> None:
        self._rows = []


class _LineBuffer:
    """Append-only row store with clamped window access."""

    def __init__(self):
        self.rows: list[np.ndarray] = []
        self.cursor = 0  # next output row index

    def push(self, row) -> None:
        self.rows.append(row)

    def ready(self, radius: int) -> bool:
        return len(self.rows) - 1 >= self.cursor + radius

    def window(self, center: int, radius: int) -> np.ndarray:
        n = len(self.rows)
        idx = np.clip(np.arange(center - radius, center + radius + 1), 0, n - 1)
        return np.stack([self.rows[i] for i in idx])

    def reset(self) -> None:
        self.rows = []
        self.cursor = 0


class NormalizeStage(Stage):
    """Streaming local normalization emitting Q8.8 re-centred values.

    Output is round((128 + scale * g) * 256) where g is the masked
    normalized value; thresholding the Q8.8 stream at raw 128 << 8
    downstream is then the sign test of the reference backend.
    """

    name = "normalize"

    def __init__(self, params: FilterParams, scale: int = 64):
        self._params = params
        self._scale = scale
        self._kernel = gaussian_kernel1d(params.stats_sigma)
        self._radius = len(self._kernel) // 2
        self.reset()

    def reset(self) -> None:
        self._raw = _LineBuffer()
        self._h1: list[np.ndarray] = []  # horizontally blurred intensities
        self._h2: list[np.ndarray] = []  # horizontally blurred squares

    def _hblur(self, row: np.ndarray) -> np.ndarray:
        from scipy.ndimage import convolve1d

        return convolve1d(row, self._kernel, mode="nearest")

    def _emit(self, center: int) -> np.ndarray:
        n = len(self._raw.rows)
        idx = np.clip(
            np.arange(center - self._radius, center + self._radius + 1), 0, n - 1
        )
        mean = np.zeros_like(self._h1[0])
        e2 = np.zeros_like(self._h1[0])
        for w, i in zip(self._kernel, idx):
            mean += w * self._h1[i]
            e2 += w * self._h2[i]
        var = np.clip(e2 - mean * mean, 0.0, None)
        p = self._params
        mask = 1.0 - np.exp(-var / (2.0 * p.noise_c**2))
        g = (self._raw.rows[center] / 255.0 - mean) / np.maximum(np.sqrt(var), EPS_STD)
        out = round_half_up((128.0 + self._scale * g * mask) * 256.0)
        return np.clip(out, 0, 65535).astype(np.int64)

    def feed(self, row):
        self._raw.push(np.asarray(row))
        scaled = np.asarray(row, dtype=np.float64) / 255.0
        self._h1.append(self._hblur(scaled))
        self._h2.append(self._hblur(scaled * scaled))
        out = []
        while self._raw.ready(self._radius):
            out.append(self._emit(self._raw.cursor))
            self._raw.cursor += 1
        return out

    def finish(self):
        out = []
        while self._raw.cursor < len(self._raw.rows):
            out.append(self._emit(self._raw.cursor))
            self._raw.cursor += 1
        return out


class OrientationStage(Stage):
    """Buffered orientation estimation; emits (pixel row, angle index row).

    Consumes the Q8.8 normalized stream.  Angles quantize to
    ``angle_steps`` codes over the pi-periodic range; the dequantized field
    stays available on the instance for minutiae angle lookup after the run.
    """

    name = "orientation"

    def __init__(self, params: FilterParams, norm_scale: int = 64,
                 angle_steps: int = 256):
        self._params = params
        self._norm_scale = norm_scale
        self._angle_steps = angle_steps
        self.reset()

    def reset(self) -> None:
        self._rows: list[np.ndarray] = []
        self.theta_indices: np.ndarray | None = None

    def feed(self, row):
        self._rows.append(np.asarray(row))
        return []

    def finish(self):
        img = np.stack(self._rows)
        values = (img.astype(np.float64) / 256.0 - 128.0) / self._norm_scale
        fld = estimate_orientation(
            NormalizedImage(values=values, mask=np.ones_like(values)), self._params
        )
        steps = self._angle_steps
        q = (round_half_up(fld.theta / np.pi * steps).astype(np.int64)) % steps
        self.theta_indices = q.astype(np.uint8 if steps <= 256 else np.uint16)
        out = [(img[i], self.theta_indices[i]) for i in range(img.shape[0])]
        self._rows = []
        return out

    def dequantized_theta(self) -> np.ndarray:
        if self.theta_indices is None:
            raise RuntimeError("orientation stage has not finished")
        return self.theta_indices.astype(np.float64) * np.pi / self._angle_steps


class IsoBlurStage(Stage):
    """Line-buffered separable isotropic blur: Q8.8 pixels, Q0.8 weights,
    24-bit accumulate.

    Payload: (Q8.8 pixel row, angle row) -> same pair with blurred pixels.
    """

    name = "iso-blur"

    def __init__(self, sigma: float):
        self._kernel = quantize_weights(gaussian_kernel1d(sigma), PIXEL_WEIGHT_Q)
        self._radius = len(self._kernel) // 2
        self.reset()

    def reset(self) -> None:
        self._h = _LineBuffer()
        self._theta: list[np.ndarray] = []

    def _emit(self, center: int) -> tuple[np.ndarray, np.ndarray]:
        win = self._h.window(center, self._radius)
        acc = (self._kernel[:, None] * win).sum(axis=0)  # <= 256 * 65535: 24 bits
        return shift_round(acc, 8), self._theta[center]

    def feed(self, payload):
        pixel, theta = payload
        hraw = np.convolve(
            np.pad(np.asarray(pixel, dtype=np.int64), self._radius, mode="edge"),
            self._kernel[::-1].astype(np.int64),
            mode="valid",
        )
        self._h.push(shift_round(hraw, 8))
        self._theta.append(theta)
        out = []
        while self._h.ready(self._radius):
            out.append(self._emit(self._h.cursor))
            self._h.cursor += 1
        return out

    def finish(self):
        out = []
        while self._h.cursor < len(self._h.rows):
            out.append(self._emit(self._h.cursor))
            self._h.cursor += 1
        return out


def build_offset_tables(window_length: int, angle_steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-neighbour tap offsets per quantized angle.

    Primarily-horizontal angles (|tan| <= 1, the hwind half) take one pixel
    per column: dx = t, dy = round(t tan).  The rest (vwind) take one pixel
    per row: dy = t, dx = round(t cot).  Rounding is half-up.
    """
    half = window_length // 2
    taps = np.arange(-half, half + 1, dtype=np.float64)
    dx = np.zeros((angle_steps, window_length), dtype=np.int64)
    dy = np.zeros_like(dx)
    for q in range(angle_steps):
        theta = q * np.pi / angle_steps
        c, s = np.cos(theta), np.sin(theta)
        if abs(s) <= abs(c):
            dx[q] = taps.astype(np.int64)
            dy[q] = round_half_up(taps * (s / c)).astype(np.int64)
        else:
            dy[q] = taps.astype(np.int64)
            dx[q] = round_half_up(taps * (c / s)).astype(np.int64)
    return dx, dy


class GuidedLineStage(Stage):
    """17-tap line Gaussian steered by the quantized angle row.

    Offsets and weights are looked up per quantized angle: one sample per
    column for primarily-horizontal lines, one per row otherwise, weighted
    by the line Gaussian at the tap's arc-length distance.  Weights are
    Q0.8 rows summing to exactly one; products accumulate in 24 bits and
    round to 8-bit pixels.  Payload: (pixel row, angle row) -> pixel row.
    """

    name = "guided-line"

    def __init__(self, params: FilterParams, angle_steps: int = 256,
                 output: str = "q88"):
        if output not in ("q88", "u8"):
            raise ValueError(f"unknown output mode {output!r}")
        self._window = params.window_length
        self._radius = self._window // 2
        self._output = output
        half = self._radius
        taps = np.arange(-half, half + 1, dtype=np.float64)
        self._dx, self._dy = build_offset_tables(self._window, angle_steps)
        self._weights = np.zeros((angle_steps, self._window), dtype=np.int64)
        for q in range(angle_steps):
            theta = q * np.pi / angle_steps
            step = 1.0 / max(abs(np.cos(theta)), abs(np.sin(theta)))
            w = np.exp(-0.5 * ((taps * step) / params.sigma_line) ** 2)
            self._weights[q] = quantize_weights(w / w.sum(), PIXEL_WEIGHT_Q)
        self.reset()

    def reset(self) -> None:
        self._buf = _LineBuffer()
        self._theta: list[np.ndarray] = []

    def _emit(self, center: int) -> np.ndarray:
        rows = self._buf.rows
        n = len(rows)
        width = rows[0].shape[0]
        lo = max(center - self._radius, 0)
        hi = min(center + self._radius, n - 1) + 1
        win = np.stack(rows[lo:hi]).astype(np.int64)
        q = self._theta[center].astype(np.int64)
        cols = np.arange(width, dtype=np.int64)
        acc = np.zeros(width, dtype=np.int64)
        for t in range(self._window):
            ry = np.clip(center + self._dy[q, t], lo, hi - 1) - lo
            rx = np.clip(cols + self._dx[q, t], 0, width - 1)
            # each product is <= 256 * 65535; pre-rounding to Q8.8 keeps the
            # running sum within the 24-bit accumulator
            acc += shift_round(self._weights[q, t] * win[ry, rx], 8)
        if self._output == "u8":
            return np.clip(shift_round(acc, 8), 0, 255).astype(np.uint8)
        return np.clip(acc, 0, 65535)

    def feed(self, payload):
        pixel, theta = payload
        self._buf.push(np.asarray(pixel))
        self._theta.append(np.asarray(theta))
        out = []
        while self._buf.ready(self._radius):
            out.append(self._emit(self._buf.cursor))
            self._buf.cursor += 1
        return out

    def finish(self):
        out = []
        while self._buf.cursor < len(self._buf.rows):
            out.append(self._emit(self._buf.cursor))
            self._buf.cursor += 1
        return out


class BinarizeStage(MapStage):
    """Threshold a Q8.8 stream to the ridge-map convention (0 = ridge).

    Thresholding the 16-bit stream at 128 << 8 realizes the reference
    backend's sign test at stream precision.
    """

    def __init__(self, threshold: int = 128, frac_bits: int = 8):
        raw = threshold << frac_bits
        super().__init__(
            "binarize", lambda row: (np.asarray(row) >= raw).astype(np.uint8)
        )


class ThinStage(BufferStage):
    def __init__(self):
        super().__init__("thin", thin)


# ---------------------------------------------------------------------------
# Iris enhancement stages (cyclic in the column/angle direction)


def _hblur_wrap(row: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    radius = len(kernel) // 2
    padded = np.concatenate([row[-radius:], row, row[:radius]])
    return np.convolve(padded.astype(np.int64), kernel[::-1], mode="valid")


class DetailStage(Stage):
    """Background removal: emits the Q8.8 detail (input minus local mean).

    Uses Q0.15 blur weights; the horizontally blurred rows are held at Q8.8
    in the line buffer.  Columns wrap, rows replicate.
    """

    name = "detail"

    def __init__(self, sigma: float):
        self._kernel = quantize_weights(gaussian_kernel1d(sigma), ENHANCE_WEIGHT_Q)
        self._radius = len(self._kernel) // 2
        self.reset()

    def reset(self) -> None:
        self._h = _LineBuffer()
        self._raw: list[np.ndarray] = []

    def _emit(self, center: int) -> np.ndarray:
        win = self._h.window(center, self._radius)
        acc = (self._kernel[:, None] * win).sum(axis=0)
        mean_q88 = shift_round(acc, 15)
        return (self._raw[center].astype(np.int64) << 8) - mean_q88

    def feed(self, row):
        row = np.asarray(row)
        self._raw.append(row)
        self._h.push(shift_round(_hblur_wrap(row, self._kernel), 7))
        out = []
        while self._h.ready(self._radius):
            out.append(self._emit(self._h.cursor))
            self._h.cursor += 1
        return out

    def finish(self):
        out = []
        while self._h.cursor < len(self._h.rows):
            out.append(self._emit(self._h.cursor))
            self._h.cursor += 1
        return out


class ContrastDivideStage(Stage):
    """Contrast estimation and division, emitting 8-bit enhanced rows.

    variant="rms": contrast is the root of the blurred squared detail with
    a one-level floor, mirroring the reference enhancement so the backends
    agree bit-for-bit on most pixels.

    variant="gamma": contrast is a 256-entry power-law lookup (gamma 0.75)
    of the blurred absolute detail, clipped to [50, 255], and the final
    scale uses plain integer division - the streaming-hardware design.
    """

    name = "contrast-divide"

    def __init__(self, sigma: float, variant: str = "rms"):
        if variant not in ("rms", "gamma"):
            raise ValueError(f"unknown enhance variant {variant!r}")
        self._variant = variant
        self._kernel = quantize_weights(gaussian_kernel1d(sigma), ENHANCE_WEIGHT_Q)
        self._radius = len(self._kernel) // 2
        if variant == "gamma":
            m = np.arange(256, dtype=np.float64)
            lut = round_half_up(255.0 ** (1.0 - GAMMA) * m**GAMMA)
            self._lut = np.clip(lut, CONTRAST_CLIP_LO, CONTRAST_CLIP_HI).astype(np.int64)
        self.reset()

    def reset(self) -> None:
        self._h = _LineBuffer()
        self._detail: list[np.ndarray] = []

    def _emit(self, center: int) -> np.ndarray:
        win = self._h.window(center, self._radius)
        acc = (self._kernel[:, None] * win).sum(axis=0)  # 40-bit accumulate
        blurred_q88 = shift_round(acc, 15)
        d_q88 = self._detail[center]
        if self._variant == "rms":
            # blurred is E[d^2] in Q8.8; contrast c in Q8.8 = sqrt(E << 8).
            c_q88 = np.maximum(isqrt_round(blurred_q88 << 8), 256)
            out = 128 + div_round_signed(128 * d_q88, c_q88)
        else:
            m = np.clip(shift_round(blurred_q88, 8), 0, 255)
            c = self._lut[m]
            d = shift_round_signed(d_q88, 8)
            out = 128 + div_trunc_signed(128 * d, c)
        return np.clip(out, 0, 255).astype(np.uint8)

    def feed(self, d_q88):
        d_q88 = np.asarray(d_q88, dtype=np.int64)
        self._detail.append(d_q88)
        if self._variant == "rms":
            stat_q88 = shift_round(d_q88 * d_q88, 8)  # d^2 in Q8.8
        else:
            stat_q88 = np.abs(d_q88)  # |d| in Q8.8
        self._h.push(shift_round(_hblur_wrap(stat_q88, self._kernel), 15))
        out = []
        while self._h.ready(self._radius):
            out.append(self._emit(self._h.cursor))
            self._h.cursor += 1
        return out

    def finish(self):
        out = []
        while self._h.cursor < len(self._h.rows):
            out.append(self._emit(self._h.cursor))
            self._h.cursor += 1
        return out
