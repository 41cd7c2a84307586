"""Pupil localization, single-interpolation polar unwrap, limbic boundary.

The pupil is found without any iterative transform: blur-residual
thresholding, a morphological opening, 8-connected labeling, and an
area/eccentricity filter with a darkest-region tie-break.  The iris annulus
is then resampled once, directly from the raw image, into a radius x angle
raster about the pupil centre; the outer (limbic) boundary is located on
that raster by the strongest dark-to-bright radial step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._filters import gaussian_blur, moving_average_cyclic
from .errors import PupilNotFoundError, UnwrapError

_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class PupilCircle:
    cx: float
    cy: float
    radius: float


@dataclass
class RegionCandidate:
    label: int
    area: float
    eccentricity: float
    centroid: tuple[float, float]  # (cx, cy)
    equivalent_radius: float
    mean_intensity: float


@dataclass
class UnwrappedIris:
    values: np.ndarray        # (radial_samples, angular_samples) uint8
    radial_scale: float       # pixels per radial sample
    valid: np.ndarray         # bool mask, False where the sample left the image
    limbic_row: int | None = None   # 1-indexed; rows beyond it are sclera
    limbic_warning: bool = False

    @property
    def radial_samples(self) -> int:
        return self.values.shape[0]

    @property
    def angular_samples(self) -> int:
        return self.values.shape[1]


def _region_candidates(labels: np.ndarray, count: int, image: np.ndarray) -> list[RegionCandidate]:
    out = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        comp = labels[sl] == lab
        area = float(comp.sum())
        ys, xs = np.nonzero(comp)
        ys = ys + sl[0].start
        xs = xs + sl[1].start
        cx = float(xs.mean())
        cy = float(ys.mean())
        mxx = float(((xs - cx) ** 2).mean())
        myy = float(((ys - cy) ** 2).mean())
        mxy = float(((xs - cx) * (ys - cy)).mean())
        spread = math.sqrt((mxx - myy) ** 2 + 4.0 * mxy * mxy)
        lam1 = (mxx + myy + spread) / 2.0
        lam2 = (mxx + myy - spread) / 2.0
        ecc = 0.0 if lam1 <= 0 else math.sqrt(max(1.0 - lam2 / lam1, 0.0))
        out.append(
            RegionCandidate(
                label=lab,
                area=area,
                eccentricity=ecc,
                centroid=(cx, cy),
                equivalent_radius=math.sqrt(area / math.pi),
                mean_intensity=float(image[ys, xs].mean()),
            )
        )
    return out


def detect_pupil(
    eye: np.ndarray,
    blur_sigma: float = 5.0,
    area_min: float = 300.0,
    area_frac_max: float = 0.25,
    ecc_max: float = 0.6,
) -> PupilCircle:
    """Region-property pupil localization.

    Pipeline: Gaussian blur, negative blur residual, 3x3 opening,
    8-connected labeling, area within [area_min, area_frac_max * image area],
    eccentricity <= ecc_max, darkest surviving region wins.
    """
    img = np.asarray(eye, dtype=np.float64)
    h, w = img.shape
    if h < 64 or w < 64:
        raise ValueError("eye image must be at least 64x64")

    residual = img - gaussian_blur(img, blur_sigma)
    binary = residual < 0.0
    opened = ndimage.binary_dilation(
        ndimage.binary_erosion(binary, np.ones((3, 3), dtype=bool)),
        np.ones((3, 3), dtype=bool),
    )
    labels, count = ndimage.label(opened, structure=_EIGHT_CONNECTED)

    area_max = area_frac_max * h * w
    survivors = []
    for cand in _region_candidates(labels, count, img):
        if not area_min <= cand.area <= area_max:
            continue
        if cand.eccentricity > ecc_max:
            continue
        cx, cy = cand.centroid
        r = cand.equivalent_radius
        if cx - r < 0 or cy - r < 0 or cx + r > w - 1 or cy + r > h - 1:
            continue
        survivors.append(cand)
    if not survivors:
        raise PupilNotFoundError("no region passed the pupil candidate filters")

    best = min(survivors, key=lambda c: (c.mean_intensity, c.label))
    return PupilCircle(cx=best.centroid[0], cy=best.centroid[1],
                       radius=best.equivalent_radius)


def unwrap(
    eye: np.ndarray,
    pupil: PupilCircle,
    radial_samples: int = 64,
    angular_samples: int = 360,
    outer_multiple: float = 2.8,
) -> UnwrappedIris:
    """Polar resampling of the annulus outside the pupillary boundary.

    Row i (1-based) holds samples at radius ``pupil.radius + i * scale``;
    the outermost row reaches min(outer_multiple * radius, distance to the
    nearest image edge).  Values come from one bilinear interpolation of the
    raw image; samples that leave the image are zero with ``valid`` False.
    """
    if radial_samples < 8 or angular_samples < 8:
        raise ValueError("radial_samples and angular_samples must be >= 8")
    img = np.asarray(eye, dtype=np.float64)
    h, w = img.shape

    edge_dist = min(pupil.cx, pupil.cy, (w - 1) - pupil.cx, (h - 1) - pupil.cy)
    rho_max = min(outer_multiple * pupil.radius, edge_dist)
    if rho_max <= pupil.radius:
        raise UnwrapError("pupil circle leaves no annulus inside the image")
    scale = (rho_max - pupil.radius) / radial_samples

    rho = pupil.radius + scale * np.arange(1, radial_samples + 1)
    alpha = 2.0 * np.pi * np.arange(angular_samples) / angular_samples
    px = pupil.cx + rho[:, None] * np.cos(alpha)[None, :]
    py = pupil.cy + rho[:, None] * np.sin(alpha)[None, :]

    valid = (px >= 0) & (px <= w - 1) & (py >= 0) & (py <= h - 1)
    x0 = np.clip(np.floor(px).astype(np.int64), 0, w - 1)
    y0 = np.clip(np.floor(py).astype(np.int64), 0, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = np.clip(px - x0, 0.0, 1.0)
    fy = np.clip(py - y0, 0.0, 1.0)

    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    sampled = top * (1 - fy) + bot * fy

    values = np.where(valid, np.rint(sampled), 0).astype(np.uint8)
    return UnwrappedIris(values=values, radial_scale=float(scale), valid=valid)


def find_limbic(unwrapped: UnwrappedIris) -> int:
    """Locate the iris-to-sclera transition row of an unwrapped iris.

    Rows are smoothed with a cyclic width-5 moving average along the angle;
    the limbic row is the 1-based row index maximizing the mean positive
    downward gradient within [R/4, R-1].  If no gradient is positive the
    full unwrap is kept (row R) and a warning flag is set.
    """
    r = unwrapped.radial_samples
    if r < 8:
        raise ValueError("need at least 8 radial samples")
    smoothed = moving_average_cyclic(unwrapped.values.astype(np.float64), 5, axis=1)
    grad = np.diff(smoothed, axis=0).mean(axis=1)  # grad[k] = row k+2 minus row k+1, 1-based

    lo = max(int(math.ceil(r / 4)) - 1, 0)  # 1-based row R/4 -> diff index
    window = grad[lo : r - 1]
    if window.size == 0 or window.max() <= 0.0:
        unwrapped.limbic_row = r
        unwrapped.limbic_warning = True
        return r
    row = lo + int(np.argmax(window)) + 1  # 1-based row before the step
    unwrapped.limbic_row = row
    unwrapped.limbic_warning = False
    return row
