"""Fixed-point formats and saturating helpers for the hardware-model backend.

Every Q-format used by the backend is declared here so width choices are
auditable in one place:

=================  ============  =======================================
constant           format        used for
=================  ============  =======================================
PIXEL_WEIGHT_Q     Q0.8 (u16)    guided-line / isotropic filter weights
ENHANCE_WEIGHT_Q   Q0.15 (u16)   iris-enhance blur weights
CORDIC_INPUT_Q     Q1.15 (16b)   CORDIC x/y inputs
CORDIC_ACC_Q       Q3.21 (24b)   CORDIC internal x/y/z accumulators
CORDIC_OUT_Q       Q4.20 (24b)   CORDIC radius and angle outputs
=================  ============  =======================================

Pixel filter accumulators are 24-bit; the iris-enhance path keeps its
statistics in Q8.8 between passes and accumulates in DSP-style 40-bit
registers.  All arithmetic saturates instead of wrapping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QFormat:
    total_bits: int
    frac_bits: int
    signed: bool = True

    @property
    def scale(self) -> int:
        return 1 << self.frac_bits

    @property
    def min_raw(self) -> int:
        return -(1 << (self.total_bits - 1)) if self.signed else 0

    @property
    def max_raw(self) -> int:
        if self.signed:
            return (1 << (self.total_bits - 1)) - 1
        return (1 << self.total_bits) - 1


PIXEL_WEIGHT_Q = QFormat(16, 8, signed=False)
ENHANCE_WEIGHT_Q = QFormat(16, 15, signed=False)
CORDIC_INPUT_Q = QFormat(16, 15)
CORDIC_ACC_Q = QFormat(24, 21)
CORDIC_OUT_Q = QFormat(24, 20)

PIXEL_ACC_BITS = 24
ENHANCE_ACC_BITS = 40


def saturate(raw: int, fmt: QFormat) -> int:
    return min(max(raw, fmt.min_raw), fmt.max_raw)


@dataclass(frozen=True)
class FixedPoint:
    raw: int
    fmt: QFormat

    @classmethod
    def from_float(cls, x: float, fmt: QFormat) -> "FixedPoint":
        return cls(raw=saturate(int(np.floor(x * fmt.scale + 0.5)), fmt), fmt=fmt)

    def to_float(self) -> float:
        return self.raw / self.fmt.scale


def round_half_up(x: np.ndarray | float) -> np.ndarray:
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def quantize_weights(weights: np.ndarray, fmt: QFormat) -> np.ndarray:
    """Quantize a unit-sum kernel so the raw taps sum to exactly fmt.scale.

    Largest-remainder apportionment: taps are floored and the residual
    units go to the largest fractional parts, so no tap errs by more than
    one LSB and constant inputs stay exactly constant through the filter.
    """
    exact = np.asarray(weights, dtype=np.float64) * fmt.scale
    raw = np.floor(exact).astype(np.int64)
    short = fmt.scale - int(raw.sum())
    if short < 0 or short > len(raw):
        raise ValueError("kernel is not normalized to unit sum")
    for idx in np.argsort(-(exact - raw))[:short]:
        raw[idx] += 1
    if raw.min() < 0 or raw.max() > fmt.max_raw:
        raise ValueError("kernel does not fit the weight format")
    return raw


def shift_round(acc: np.ndarray, bits: int) -> np.ndarray:
    """Drop ``bits`` fractional bits with round-half-up (nonnegative values)."""
    return (np.asarray(acc) + (1 << (bits - 1))) >> bits


def shift_round_signed(acc: np.ndarray, bits: int) -> np.ndarray:
    """Signed round-half-away-from-zero right shift."""
    acc = np.asarray(acc)
    mag = (np.abs(acc) + (1 << (bits - 1))) >> bits
    return np.sign(acc) * mag


def div_round_signed(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Signed division rounding half away from zero; den must be positive."""
    num = np.asarray(num, dtype=np.int64)
    den = np.asarray(den, dtype=np.int64)
    return np.sign(num) * ((np.abs(num) + den // 2) // den)


def div_trunc_signed(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Signed division truncating toward zero; den must be positive."""
    num = np.asarray(num, dtype=np.int64)
    den = np.asarray(den, dtype=np.int64)
    return np.sign(num) * (np.abs(num) // den)


def isqrt_round(values: np.ndarray) -> np.ndarray:
    """Integer square root rounded to nearest, elementwise.

    Exact for inputs below 2**52 (the float64 mantissa guards the floor).
    """
    v = np.asarray(values, dtype=np.int64)
    r = np.floor(np.sqrt(v.astype(np.float64))).astype(np.int64)
    r = np.where((r + 1) * (r + 1) <= v, r + 1, r)   # repair float slack
    r = np.where(r * r > v, r - 1, r)
    up = (v - r * r) > ((r + 1) * (r + 1) - v)
    return r + up.astype(np.int64)
