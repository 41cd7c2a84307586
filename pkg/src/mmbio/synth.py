"""Synthetic multimodal data with known ground truth.

Fingerprints are rendered from an analytic ridge-phase field: a carrier
wave with a smooth random flow plus phase vortices, which create ridge
endings and bifurcations at known locations.  Impressions re-evaluate the
same field under a small rigid transform, so genuine pairs share their
minutiae constellation exactly up to that transform plus sensor noise.

Eyes are concentric: a dark pupil disk, an iris annulus textured by random
angular/radial harmonics anchored to the pupillary boundary, and a bright
sclera.  Impressions jitter the centre, rotate the texture, and add noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imgio import save_gray


# ---------------------------------------------------------------------------
# Fingerprints


@dataclass
class FingerSubject:
    period: float
    base_angle: float
    waves: list[tuple[float, float, float, float]]  # (amp cycles, ux, vy, phase)
    vortices: list[tuple[float, float, int]]        # (x, y, charge)
    size: tuple[int, int] = (192, 192)


def make_finger_subject(
    rng: np.random.Generator,
    size: tuple[int, int] = (192, 192),
    n_vortices: int = 14,
    vortex_margin: float = 30.0,
    vortex_spacing: float = 22.0,
    n_waves: int = 3,
    wave_amp: tuple[float, float] = (0.5, 1.5),
) -> FingerSubject:
    h, w = size
    waves = []
    for _ in range(n_waves):
        freq = rng.uniform(0.002, 0.006)
        ang = rng.uniform(0, 2 * math.pi)
        waves.append(
            (rng.uniform(*wave_amp), freq * math.cos(ang), freq * math.sin(ang),
             rng.uniform(0, 2 * math.pi))
        )
    vortices = []
    attempts = 0
    while len(vortices) < n_vortices and attempts < 400:
        attempts += 1
        x = rng.uniform(vortex_margin, w - vortex_margin)
        y = rng.uniform(vortex_margin, h - vortex_margin)
        if all((x - vx) ** 2 + (y - vy) ** 2 > vortex_spacing**2 for vx, vy, _ in vortices):
            vortices.append((x, y, int(rng.choice((-1, 1)))))
    return FingerSubject(
        period=float(rng.uniform(8.0, 10.0)),
        base_angle=float(rng.uniform(0, math.pi)),
        waves=waves,
        vortices=vortices,
        size=size,
    )


def equivalence_print_subject(rng: np.random.Generator) -> FingerSubject:
    """Clean full-contrast print used for cross-backend equivalence checks.

    A uniform-flow carrier with well-separated interior vortices keeps the
    ridge topology unambiguous, so backend disagreement measures
    quantization jitter rather than knife-edge tip reconnections (which the
    8-bit angle quantization alone can flip on adversarial flows).
    """
    return make_finger_subject(
        rng,
        n_vortices=10,
        vortex_margin=40.0,
        vortex_spacing=30.0,
        n_waves=0,
    )


def _ridge_phase(subject: FingerSubject, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    c, s = math.cos(subject.base_angle), math.sin(subject.base_angle)
    psi = (xs * c + ys * s) / subject.period
    for amp, ux, vy, ph in subject.waves:
        psi = psi + amp * np.cos(2 * math.pi * (ux * xs + vy * ys) + ph)
    for vx, vy, q in subject.vortices:
        psi = psi + q * np.arctan2(ys - vy, xs - vx) / (2 * math.pi)
    return psi


def render_fingerprint(
    subject: FingerSubject,
    rng: np.random.Generator,
    rotation: float = 0.0,
    shift: tuple[float, float] = (0.0, 0.0),
    noise: float = 6.0,
    amplitude: float = 95.0,
) -> np.ndarray:
    """One impression: the subject's field sampled under a rigid transform."""
    h, w = subject.size
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    cx, cy = w / 2.0, h / 2.0
    c, s = math.cos(rotation), math.sin(rotation)
    dx = xs - cx - shift[0]
    dy = ys - cy - shift[1]
    sx = cx + c * dx + s * dy
    sy = cy - s * dx + c * dy
    img = 127.5 - amplitude * np.cos(2 * math.pi * _ridge_phase(subject, sx, sy))
    img = img + rng.normal(0.0, noise, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def fingerprint_impression(subject: FingerSubject, rng: np.random.Generator) -> np.ndarray:
    return render_fingerprint(
        subject,
        rng,
        rotation=rng.uniform(-math.radians(4), math.radians(4)),
        shift=(rng.uniform(-5, 5), rng.uniform(-5, 5)),
    )


# ---------------------------------------------------------------------------
# Eyes


@dataclass
class EyeSubject:
    pupil_radius: float
    iris_width: float
    harmonics: list[tuple[float, int, int, float]]  # (amp, angular u, radial v, phase)
    pupil_level: float = 25.0
    iris_level: float = 120.0
    sclera_level: float = 215.0
    size: tuple[int, int] = (240, 240)


def make_eye_subject(rng: np.random.Generator, size: tuple[int, int] = (240, 240)) -> EyeSubject:
    # Pupil radius stays below the sigma=5 blur support (radius 20) so the
    # blur-residual sign test marks the whole pupil disk, and the limbic
    # ring stays inside the 2.8 x radius unwrap bound.
    pupil_radius = float(rng.uniform(15.0, 19.0))
    # Angular orders 8..40 put the texture wavelengths (9..45 raster
    # columns) inside the passband of the sigma=4 background-subtraction,
    # so the code bits ride on texture rather than sensor noise.
    harmonics = []
    for _ in range(14):
        harmonics.append(
            (
                float(rng.uniform(7.0, 14.0)),
                int(rng.integers(8, 41)),
                int(rng.integers(0, 5)),
                float(rng.uniform(0, 2 * math.pi)),
            )
        )
    return EyeSubject(
        pupil_radius=pupil_radius,
        iris_width=1.45 * pupil_radius,
        harmonics=harmonics,
        size=size,
    )


def _smoothstep(x: np.ndarray) -> np.ndarray:
    t = np.clip(x, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def render_eye(
    subject: EyeSubject,
    rng: np.random.Generator,
    center: tuple[float, float] | None = None,
    rotation: float = 0.0,
    noise: float = 2.0,
) -> np.ndarray:
    """One capture of the subject's eye.

    ``rotation`` rotates the iris texture about the pupil centre (head
    tilt); the pupillary and limbic radii stay put so genuine unwraps align
    row-for-row.
    """
    h, w = subject.size
    if center is None:
        cx = w / 2.0 + rng.uniform(-2, 2)
        cy = h / 2.0 + rng.uniform(-2, 2)
    else:
        cx, cy = center
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    rho = np.hypot(xs - cx, ys - cy)
    phi = np.arctan2(ys - cy, xs - cx)

    rp = subject.pupil_radius
    rl = rp + subject.iris_width
    rho_n = np.clip((rho - rp) / subject.iris_width, 0.0, 1.0)

    texture = np.zeros_like(rho)
    for amp, u, v, ph in subject.harmonics:
        texture += amp * np.cos(u * (phi - rotation) + 2 * math.pi * v * rho_n + ph)
    # Crypt-like patches: saturating the harmonic field keeps the local
    # contrast high everywhere, so bitplane codes are noise-stable instead
    # of flipping where the detail crosses zero.
    texture = 38.0 * np.tanh(texture / 15.0)
    # Smooth pupillary zone: full texture amplitude right at the boundary
    # would bridge the pupil blob into the iris during segmentation.
    texture *= 0.25 + 0.75 * _smoothstep(rho_n / 0.3)

    img = np.full((h, w), subject.sclera_level, dtype=np.float64)
    in_iris = _smoothstep((rl + 1.5 - rho) / 3.0)
    img = img * (1 - in_iris) + (subject.iris_level + texture) * in_iris
    in_pupil = _smoothstep((rp + 1.0 - rho) / 2.0)
    img = img * (1 - in_pupil) + subject.pupil_level * in_pupil
    img = img + rng.normal(0.0, noise, img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def eye_impression(subject: EyeSubject, rng: np.random.Generator) -> np.ndarray:
    return render_eye(
        subject,
        rng,
        rotation=rng.uniform(-1, 1) * math.radians(4.0),
    )


# ---------------------------------------------------------------------------
# Dataset writer


@dataclass
class SynthDataset:
    root: Path
    subject_ids: list[str] = field(default_factory=list)


def write_synth_dataset(
    root: str | Path,
    subjects: int = 10,
    fp_per_subject: int = 3,
    iris_per_subject: int = 5,
    seed: int = 20240501,
) -> SynthDataset:
    """Materialize a per-subject PGM dataset tree for the harness."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    ids = []
    master = np.random.default_rng(seed)
    for k in range(subjects):
        sid = f"s{k + 1:02d}"
        ids.append(sid)
        sub_dir = root / sid
        sub_dir.mkdir(exist_ok=True)
        subj_seed = master.integers(0, 2**63 - 1)
        gen_rng = np.random.default_rng(subj_seed)
        finger = make_finger_subject(gen_rng)
        eye = make_eye_subject(gen_rng)
        for i in range(fp_per_subject):
            save_gray(fingerprint_impression(finger, gen_rng), sub_dir / f"fp_{i + 1}.pgm")
        for i in range(iris_per_subject):
            save_gray(eye_impression(eye, gen_rng), sub_dir / f"iris_{i + 1}.pgm")
    return SynthDataset(root=root, subject_ids=ids)
