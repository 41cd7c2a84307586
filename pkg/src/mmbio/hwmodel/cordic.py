"""Vectoring-mode CORDIC: magnitude and angle by shift-and-add iterations.

Inputs are Q1.15; the iteration datapath runs in the 24-bit Q3.21
accumulator format and results are rounded to Q4.20.  Left-half-plane
inputs are pre-rotated by pi so the angle output covers (-pi, pi].
"""

from __future__ import annotations

import math

from .fixed import (
    CORDIC_ACC_Q,
    CORDIC_INPUT_Q,
    CORDIC_OUT_Q,
    FixedPoint,
    saturate,
)

_MAX_ITERATIONS = 24

# atan(2^-i) in the accumulator format.
_ATAN_RAW = [
    int(math.floor(math.atan(2.0**-i) * CORDIC_ACC_Q.scale + 0.5))
    for i in range(_MAX_ITERATIONS)
]

# Inverse pseudo-rotation gain 1/prod(sqrt(1 + 2^-2i)) per iteration count,
# as a Q1.22 multiplier constant.
_INV_GAIN_FRAC = 22


def _inv_gain_raw(iterations: int) -> int:
    gain = 1.0
    for i in range(iterations):
        gain *= math.sqrt(1.0 + 2.0 ** (-2 * i))
    return int(math.floor((1.0 / gain) * (1 << _INV_GAIN_FRAC) + 0.5))


_INV_GAIN_RAW = [_inv_gain_raw(n) for n in range(_MAX_ITERATIONS + 1)]

_PI_RAW = int(math.floor(math.pi * CORDIC_ACC_Q.scale + 0.5))


def cordic_polar(
    x: FixedPoint, y: FixedPoint, iterations: int = 16
) -> tuple[FixedPoint, FixedPoint]:
    """Polar conversion (r, theta) of a fixed-point vector.

    After 16 iterations the residual rotation is atan(2^-15), well inside
    the documented 2^-10 tolerance; (0, 0) maps to (0, 0) by convention.
    """
    if not 1 <= iterations <= _MAX_ITERATIONS:
        raise ValueError(f"iterations must be in [1, {_MAX_ITERATIONS}]")
    if x.raw == 0 and y.raw == 0:
        return FixedPoint(0, CORDIC_OUT_Q), FixedPoint(0, CORDIC_OUT_Q)

    shift_up = CORDIC_ACC_Q.frac_bits - x.fmt.frac_bits
    if shift_up < 0 or y.fmt.frac_bits != x.fmt.frac_bits:
        raise ValueError("inputs must share a format no finer than the accumulator")
    xa = x.raw << shift_up
    ya = y.raw << shift_up

    if xa < 0:  # pre-rotate by pi into the right half-plane
        z = _PI_RAW if ya >= 0 else -_PI_RAW
        xa, ya = -xa, -ya
    else:
        z = 0

    for i in range(iterations):
        if ya < 0:
            xa, ya = xa - (ya >> i), ya + (xa >> i)
            z -= _ATAN_RAW[i]
        else:
            xa, ya = xa + (ya >> i), ya - (xa >> i)
            z += _ATAN_RAW[i]

    r_acc = (xa * _INV_GAIN_RAW[iterations]) >> _INV_GAIN_FRAC

    down = CORDIC_ACC_Q.frac_bits - CORDIC_OUT_Q.frac_bits
    half = 1 << (down - 1)
    r_raw = saturate((r_acc + half) >> down, CORDIC_OUT_Q)
    sign = 1 if z >= 0 else -1
    theta_raw = saturate(sign * ((abs(z) + half) >> down), CORDIC_OUT_Q)
    return FixedPoint(r_raw, CORDIC_OUT_Q), FixedPoint(theta_raw, CORDIC_OUT_Q)


def polar_float(x: float, y: float, iterations: int = 16,
                magnitude_bound: float = 1.0) -> tuple[float, float]:
    """Convenience wrapper: floats in, floats out.

    Inputs are scaled by the next power of two above ``magnitude_bound`` so
    coordinates of any pixel range fit the Q1.15 CORDIC inputs; the radius
    is rescaled on the way out (an exact power-of-two shift).
    """
    bound = max(abs(x), abs(y), magnitude_bound, 1e-12)
    exp = math.ceil(math.log2(bound)) if bound > 1.0 else 0
    scale = float(1 << exp) if exp > 0 else 1.0
    fx = FixedPoint.from_float(x / scale, CORDIC_INPUT_Q)
    fy = FixedPoint.from_float(y / scale, CORDIC_INPUT_Q)
    r, theta = cordic_polar(fx, fy, iterations)
    return r.to_float() * scale, theta.to_float()
