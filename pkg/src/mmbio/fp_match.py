"""Minutiae pre-alignment and adaptive elastic matching in polar coordinates.

Alignment searches for the best-corresponding minutia pair by comparing
local neighbour constellations; both sets are then expressed as
(radial distance, radial angle, relative orientation) triplets about the
chosen references, and paired greedily under radius-widening tolerances.
Scores are match ratios in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError
from .fp_minutiae import MinutiaeSet

SECTOR_COUNT = 8


@dataclass(frozen=True)
class PolarMinutia:
    r: float      # radial distance from the reference, pixels
    theta: float  # radial angle, radians in (-pi, pi]
    o: float      # relative orientation, radians in [0, pi)


@dataclass(frozen=True)
class AlignmentHypothesis:
    input_index: int
    template_index: int
    dx: float      # input position minus template position
    dy: float
    dtheta: float  # rotation carrying the template onto the input, radians


@dataclass
class ElasticTolerances:
    delta_r: float = 8.0
    delta_theta: float = math.radians(8.0)
    delta_o: float = math.radians(15.0)
    growth_per_100px: float = 0.5  # tolerance widening per 100 px of radius

    def __post_init__(self) -> None:
        for name in ("delta_r", "delta_theta", "delta_o", "growth_per_100px"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


def _wrap_pi(angle):
    """Wrap to (-pi, pi]."""
    return -((-np.asarray(angle) + np.pi) % (2.0 * np.pi) - np.pi)


def _wrap_half_pi(angle: float) -> float:
    """Wrap a pi-periodic orientation difference to [-pi/2, pi/2)."""
    return (angle + np.pi / 2) % np.pi - np.pi / 2


def _orientation_gap(a, b):
    """pi-periodic distance between two orientations."""
    d = np.abs(np.asarray(a) - np.asarray(b)) % np.pi
    return np.minimum(d, np.pi - d)


def _sector_histogram(bearings: np.ndarray, rotation: float) -> np.ndarray:
    sectors = np.floor(((bearings - rotation) % (2 * np.pi)) / (2 * np.pi / SECTOR_COUNT))
    return np.bincount(sectors.astype(np.int64), minlength=SECTOR_COUNT)


def rank_alignments(
    probe: MinutiaeSet, template: MinutiaeSet, neighbor_radius: float = 50.0
) -> list[AlignmentHypothesis]:
    """All same-kind reference pairs, best constellation agreement first.

    Each pair is scored by the histogram intersection of its neighbour
    counts in 8 angular sectors within ``neighbor_radius``, with the probe
    constellation rotated by the pair's candidate rotation.  Ties resolve
    to the smallest (template index, probe index).
    """
    if len(probe) == 0 or len(template) == 0:
        raise AlignmentError("cannot align an empty minutiae set")

    def local_geometry(mset: MinutiaeSet):
        xs = np.array([m.x for m in mset.minutiae], dtype=np.float64)
        ys = np.array([m.y for m in mset.minutiae], dtype=np.float64)
        bearings, dists = [], []
        for i in range(len(mset)):
            ddx = np.delete(xs - xs[i], i)
            ddy = np.delete(ys - ys[i], i)
            d = np.hypot(ddx, ddy)
            keep = d <= neighbor_radius
            bearings.append(np.arctan2(ddy[keep], ddx[keep]))
            dists.append(d[keep])
        return xs, ys, bearings

    pxs, pys, pbear = local_geometry(probe)
    txs, tys, tbear = local_geometry(template)
    thist = [_sector_histogram(b, 0.0) for b in tbear]

    scored = []
    for j, tm in enumerate(template.minutiae):
        for i, pm in enumerate(probe.minutiae):
            if pm.kind != tm.kind:
                continue
            dtheta = _wrap_half_pi(pm.angle - tm.angle)
            ph = _sector_histogram(pbear[i], dtheta)
            score = int(np.minimum(ph, thist[j]).sum())
            scored.append((-score, j, i, dtheta))
    if not scored:
        raise AlignmentError("no same-kind minutia pair exists between the sets")
    scored.sort()
    return [
        AlignmentHypothesis(
            input_index=i,
            template_index=j,
            dx=float(pxs[i] - txs[j]),
            dy=float(pys[i] - tys[j]),
            dtheta=float(dtheta),
        )
        for _, j, i, dtheta in scored
    ]


def find_best_pair(probe: MinutiaeSet, template: MinutiaeSet,
                   neighbor_radius: float = 50.0) -> AlignmentHypothesis:
    return rank_alignments(probe, template, neighbor_radius)[0]


def to_polar(mset: MinutiaeSet, ref_index: int, dtheta: float = 0.0) -> list[PolarMinutia]:
    """Express minutiae relative to a reference minutia, de-rotated by dtheta.

    The probe set passes its hypothesis rotation; the template passes 0.
    The reference itself maps to (0, 0) by convention.
    """
    ref = mset.minutiae[ref_index]
    out = []
    for m in mset.minutiae:
        ddx = m.x - ref.x
        ddy = m.y - ref.y
        r = math.hypot(ddx, ddy)
        theta = 0.0 if r == 0.0 else float(_wrap_pi(math.atan2(ddy, ddx) - dtheta))
        out.append(PolarMinutia(r=r, theta=theta, o=(m.angle - dtheta) % math.pi))
    return out


def elastic_match(
    probe_polar: list[PolarMinutia],
    template_polar: list[PolarMinutia],
    tol: ElasticTolerances,
) -> float:
    """Greedy one-to-one pairing under radius-widening tolerances.

    Feasible pairs are consumed in order of ascending combined residual;
    the score is matched count / max(set sizes).
    """
    n, m = len(probe_polar), len(template_polar)
    if n == 0 or m == 0:
        return 0.0

    pr = np.array([p.r for p in probe_polar])
    pt = np.array([p.theta for p in probe_polar])
    po = np.array([p.o for p in probe_polar])
    tr = np.array([t.r for t in template_polar])
    tt = np.array([t.theta for t in template_polar])
    to_ = np.array([t.o for t in template_polar])

    dr = np.abs(pr[:, None] - tr[None, :])
    dth = np.abs(_wrap_pi(pt[:, None] - tt[None, :]))
    do = _orientation_gap(po[:, None], to_[None, :])
    widen = 1.0 + tol.growth_per_100px * ((pr[:, None] + tr[None, :]) / 2.0) / 100.0

    feasible = (
        (dr <= tol.delta_r * widen)
        & (dth <= tol.delta_theta * widen)
        & (do <= tol.delta_o)
    )
    residual = (
        dr / (tol.delta_r * widen)
        + dth / (tol.delta_theta * widen)
        + do / tol.delta_o
    )

    order = sorted(
        ((residual[i, j], i, j) for i, j in zip(*np.nonzero(feasible))),
    )
    probe_used = np.zeros(n, dtype=bool)
    tmpl_used = np.zeros(m, dtype=bool)
    matched = 0
    for _, i, j in order:
        if not probe_used[i] and not tmpl_used[j]:
            probe_used[i] = tmpl_used[j] = True
            matched += 1
    return min(max(matched / max(n, m), 0.0), 1.0)


def match_fingerprint(
    probe: MinutiaeSet,
    template: MinutiaeSet,
    tol: ElasticTolerances | None = None,
    neighbor_radius: float = 50.0,
    hypotheses: int = 3,
) -> float:
    """Alignment search + polar conversion + elastic comparison.

    Retries the top alignment hypotheses and keeps the best score; an empty
    set on either side scores 0 rather than raising.
    """
    if tol is None:
        tol = ElasticTolerances()
    if len(probe) == 0 or len(template) == 0:
        return 0.0
    best = 0.0
    for hyp in rank_alignments(probe, template, neighbor_radius)[:hypotheses]:
        probe_polar = to_polar(probe, hyp.input_index, hyp.dtheta)
        tmpl_polar = to_polar(template, hyp.template_index, 0.0)
        probe_polar.sort(key=lambda p: p.theta)
        tmpl_polar.sort(key=lambda p: p.theta)
        best = max(best, elastic_match(probe_polar, tmpl_polar, tol))
    return best
