"""Iris enhancement, bitplane-sliced codes, majority templates, Hamming matching.

An enhanced iris keeps only the rows inside the limbic boundary.  Its code
is the stack of bitplanes 1..6 of every sample (planes 0 and 7 carry almost
no iris texture), giving an M x 6 binary matrix plus a validity mask, and
two codes are compared by normalized Hamming distance over jointly valid
bits with an optional cyclic column-rotation search to absorb head tilt.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._filters import gaussian_blur
from .errors import IncomparableCodesError
from .iris_segment import UnwrappedIris

PLANES = 6  # bitplanes 1..6 of the 8-bit enhanced values

# Floor on the local contrast estimate, in intensity levels.
CONTRAST_FLOOR = 1.0


@dataclass
class EnhancedIris:
    values: np.ndarray   # (rows-kept, angular_samples) uint8
    valid: np.ndarray    # bool, propagated from the unwrap
    provenance: str = "reference"


@dataclass
class IrisScore:
    hd: float
    compared_bits: int


@dataclass
class IrisCode:
    bits: np.ndarray  # (M, 6) uint8, column k holds bitplane k+1
    mask: np.ndarray  # (M,) bool
    cols: int         # angular samples per row of the underlying raster

    @property
    def length(self) -> int:
        return self.bits.shape[0]

    @property
    def rows(self) -> int:
        return self.length // self.cols


def enhance(unwrapped: UnwrappedIris, sigma1: float = 4.0,
            provenance: str = "reference") -> EnhancedIris:
    """Two-phase local normalization of the unwrapped iris.

    Phase 1 removes the smooth background (subtract a sigma1 blur); phase 2
    equalizes contrast by the RMS of the detail over a sigma1/2 neighborhood.
    Columns wrap (the unwrap is cyclic in angle), rows replicate.  Output is
    re-centred on 128.
    """
    if unwrapped.limbic_row is None:
        raise ValueError("limbic row must be located before enhancement")
    rows = unwrapped.limbic_row
    sub = unwrapped.values[:rows].astype(np.float64)
    detail = sub - gaussian_blur(sub, sigma1, mode=("nearest", "wrap"))
    contrast = np.sqrt(
        np.clip(gaussian_blur(detail * detail, sigma1 / 2.0, mode=("nearest", "wrap")),
                0.0, None)
    )
    out = 128.0 + 128.0 * detail / np.maximum(contrast, CONTRAST_FLOOR)
    values = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return EnhancedIris(values=values, valid=unwrapped.valid[:rows].copy(),
                        provenance=provenance)


def bitplane_slice(enhanced: EnhancedIris) -> IrisCode:
    """Bitplanes 1..6 of the row-major flattened enhanced iris."""
    flat = enhanced.values.reshape(-1).astype(np.uint8)
    bits = np.stack([(flat >> k) & 1 for k in range(1, 7)], axis=1).astype(np.uint8)
    return IrisCode(bits=bits, mask=enhanced.valid.reshape(-1).copy(),
                    cols=enhanced.values.shape[1])


def majority_template(codes: list[IrisCode]) -> IrisCode:
    """Per-position majority vote over an odd number (>= 3) of codes."""
    n = len(codes)
    if n < 3 or n % 2 == 0:
        raise ValueError("majority voting needs an odd number of codes, at least 3")
    first = codes[0]
    for c in codes[1:]:
        if c.length != first.length or c.cols != first.cols:
            raise ValueError("codes must share dimensions for majority voting")
    need = n // 2 + 1
    bit_sum = np.zeros_like(first.bits, dtype=np.int64)
    mask_sum = np.zeros_like(first.mask, dtype=np.int64)
    for c in codes:
        bit_sum += c.bits
        mask_sum += c.mask
    return IrisCode(
        bits=(bit_sum >= need).astype(np.uint8),
        mask=mask_sum >= need,
        cols=first.cols,
    )


def truncate_rows(code: IrisCode, rows: int) -> IrisCode:
    """Keep the first ``rows`` raster rows; codes of unequal limbic depth
    are cut to a common length before comparison or enrollment."""
    if rows < 1 or rows > code.rows:
        raise ValueError("rows out of range")
    keep = rows * code.cols
    return replace(code, bits=code.bits[:keep].copy(), mask=code.mask[:keep].copy())


def _rotated(code: IrisCode, shift: int) -> tuple[np.ndarray, np.ndarray]:
    if shift == 0:
        return code.bits, code.mask
    bits3 = code.bits.reshape(code.rows, code.cols, PLANES)
    mask2 = code.mask.reshape(code.rows, code.cols)
    bits = np.roll(bits3, shift, axis=1).reshape(-1, PLANES)
    mask = np.roll(mask2, shift, axis=1).reshape(-1)
    return bits, mask


def hamming(a: IrisCode, b: IrisCode, rotations: int = 8) -> IrisScore:
    """Minimum normalized Hamming distance over cyclic column shifts.

    N counts the jointly valid bit positions across all 6 planes; shifts are
    tried in order 0, +1, -1, ... so ties keep the smallest |shift|.
    """
    if a.length != b.length:
        raise ValueError("iris codes differ in length")
    if rotations < 0:
        raise ValueError("rotations must be >= 0")
    if rotations > 0 and (a.cols != b.cols or a.length % a.cols != 0):
        raise ValueError("rotation search needs matching raster layouts")

    shifts = [0]
    for k in range(1, rotations + 1):
        shifts.extend((k, -k))

    best: IrisScore | None = None
    for shift in shifts:
        bits, mask = _rotated(a, shift)
        joint = mask & b.mask
        n = int(joint.sum()) * PLANES
        if n == 0:
            continue
        diff = int((bits[joint] ^ b.bits[joint]).sum())
        hd = diff / n
        if best is None or hd < best.hd:
            best = IrisScore(hd=hd, compared_bits=n)
    if best is None:
        raise IncomparableCodesError("no jointly valid bits at any rotation")
    return best
