"""Skeletonization of the binary ridge map and crossing-number minutiae extraction.

Binary images follow the ridge-map convention of the rest of the pipeline:
pixel value 0 is ridge/foreground, 1 is background.  Internally this module
flips to ridge=1 once on entry, because every crossing-number identity is
stated for that polarity, and flips back on exit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fp_enhance import OrientationField

TERMINATION = "termination"
BIFURCATION = "bifurcation"

# Cyclic 8-neighbourhood offsets (dy, dx), starting north, clockwise.
_NEIGHBOURS = (
    (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1),
)


@dataclass(frozen=True)
class Minutia:
    x: int
    y: int
    angle: float  # ridge orientation at the point, radians in [0, pi)
    kind: str     # TERMINATION or BIFURCATION


@dataclass
class MinutiaeSet:
    minutiae: list[Minutia] = field(default_factory=list)
    source_width: int = 0
    source_height: int = 0

    def __len__(self) -> int:
        return len(self.minutiae)


def _neighbour_stack(ridge: np.ndarray) -> np.ndarray:
    """Stack of the 8 neighbour planes of a padded ridge mask, cyclic order."""
    padded = np.pad(ridge, 1, mode="constant", constant_values=False)
    h, w = ridge.shape
    planes = [
        padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        for dy, dx in _NEIGHBOURS
    ]
    return np.stack(planes)


def _candidates(ridge: np.ndarray, subpass: int) -> list[tuple[int, int]]:
    """Deletable-pixel candidates of one thinning subpass, row-major order."""
    nb = _neighbour_stack(ridge)
    count = nb.sum(axis=0)
    transitions = (nb != np.roll(nb, -1, axis=0)).sum(axis=0) // 2
    n, e, s, w = nb[0], nb[2], nb[4], nb[6]
    if subpass == 0:
        edge = (~(n & e & s)) & (~(e & s & w))
    else:
        edge = (~(n & e & w)) & (~(n & s & w))
    mask = ridge & (count >= 2) & (count <= 6) & (transitions == 1) & edge
    ys, xs = np.nonzero(mask)
    return list(zip(ys.tolist(), xs.tolist()))


def _deletable(ridge: np.ndarray, y: int, x: int, subpass: int) -> bool:
    """Re-check the subpass conditions against the live image."""
    h, w = ridge.shape
    nb = [
        bool(ridge[y + dy, x + dx]) if 0 <= y + dy < h and 0 <= x + dx < w else False
        for dy, dx in _NEIGHBOURS
    ]
    count = sum(nb)
    if not 2 <= count <= 6:
        return False
    transitions = sum(nb[i] != nb[(i + 1) % 8] for i in range(8)) // 2
    if transitions != 1:
        return False
    n, e, s, wst = nb[0], nb[2], nb[4], nb[6]
    if subpass == 0:
        return not (n and e and s) and not (e and s and wst)
    return not (n and e and wst) and not (n and s and wst)


def thin(binary: np.ndarray) -> np.ndarray:
    """Two-subpass thinning iterated to a fixpoint.

    Candidates are marked in parallel per subpass and then confirmed against
    the live image in scan order before deletion; confirmed deletions are
    always of simple pixels, so 8-connectivity of every ridge component is
    preserved and the result is stable under re-thinning.
    """
    arr = np.asarray(binary)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("thin expects a binary 0/1 image")
    ridge = arr == 0  # entry adapter: ridge becomes True
    changed = True
    while changed:
        changed = False
        for subpass in (0, 1):
            for y, x in _candidates(ridge, subpass):
                if _deletable(ridge, y, x, subpass):
                    ridge[y, x] = False
                    changed = True
    return np.where(ridge, 0, 1).astype(np.uint8)


def crossing_number(skeleton: np.ndarray, p: tuple[int, int]) -> int:
    """Half the number of ridge/background transitions around pixel p = (x, y).

    1 marks a ridge termination, 3 a bifurcation; 2 is a ridge interior.
    """
    x, y = p
    h, w = skeleton.shape
    if x <= 0 or y <= 0 or x >= w - 1 or y >= h - 1:
        raise ValueError("crossing number is undefined on the outer 1-pixel frame")
    vals = [1 if skeleton[y + dy, x + dx] == 0 else 0 for dy, dx in _NEIGHBOURS]
    return sum(abs(vals[i] - vals[(i + 1) % 8]) for i in range(8)) // 2


def _crossing_number_map(ridge: np.ndarray) -> np.ndarray:
    nb = _neighbour_stack(ridge).astype(np.int8)
    return (np.abs(nb - np.roll(nb, -1, axis=0)).sum(axis=0) // 2).astype(np.uint8)


def _is_border_artifact(ridge: np.ndarray, x: int, y: int, margin: int) -> bool:
    """True when a straight ray reaches the image edge with no ridge pixel
    within ``margin`` steps in one of the four axis directions."""
    h, w = ridge.shape
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        for step in range(1, margin + 1):
            nx, ny = x + step * dx, y + step * dy
            if not (0 <= nx < w and 0 <= ny < h):
                return True  # walked off the edge before meeting another ridge
            if ridge[ny, nx]:
                break  # covered: another ridge pixel shields this direction
        # margin exhausted strictly inside the image: not an edge artifact
    return False


def extract_minutiae(
    skeleton: np.ndarray, fld: OrientationField, border_margin: int = 12
) -> MinutiaeSet:
    """Crossing-number minutiae of a thinned ridge map.

    Interior skeleton pixels with crossing number 1 or 3 are candidates;
    candidates whose straight path to the image edge is shorter than
    ``border_margin`` and unobstructed by other ridge pixels are dropped as
    edge artifacts.  Angles are sampled from the orientation field.
    """
    if border_margin < 0:
        raise ValueError("border_margin must be >= 0")
    arr = np.asarray(skeleton)
    h, w = arr.shape
    ridge = arr == 0
    cn = _crossing_number_map(ridge)

    interior = np.zeros_like(ridge)
    interior[1:-1, 1:-1] = True
    candidate = ridge & interior & ((cn == 1) | (cn == 3))

    found: list[Minutia] = []
    for y, x in zip(*np.nonzero(candidate)):
        if _is_border_artifact(ridge, int(x), int(y), border_margin):
            continue
        kind = TERMINATION if cn[y, x] == 1 else BIFURCATION
        found.append(
            Minutia(x=int(x), y=int(y), angle=float(fld.theta[y, x]), kind=kind)
        )
    return MinutiaeSet(minutiae=found, source_width=w, source_height=h)
