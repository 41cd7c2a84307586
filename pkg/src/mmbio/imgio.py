"""Image ingestion/persistence, dataset layout, and template serialization.

Grayscale images are plain 2-D uint8 numpy arrays in row-major order;
pixel (x, y) is ``img[y, x]``.  The canonical interchange format is binary
P5 PGM with maxval 255; PNG is accepted on input only, with color converted
by BT.601 luminance and round-half-up so every backend sees identical bytes.

Templates are stored in a little-endian binary record::

    magic "MBIO" | version u16 | subject-id len u16 + utf-8 bytes
    | source-width u16 | source-height u16
    | minutiae count u16, each (x u16, y u16, angle-centidegrees u16, type u8)
    | iris rows u32 | iris cols u16 | rows bytes, one per sample:
      bits 0..5 = planes 1..6, bit 6 = validity, bit 7 = 0
    | crc32 u32 of all preceding bytes

Minutia type codes reuse the crossing numbers: 1 termination, 3 bifurcation.
"""

from __future__ import annotations

import math
import struct
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    ChecksumError,
    DataError,
    ImageFormatError,
    TemplateFormatError,
    VersionError,
)
from .fp_minutiae import BIFURCATION, TERMINATION, Minutia, MinutiaeSet
from .iris_code import IrisCode

TEMPLATE_MAGIC = b"MBIO"
TEMPLATE_VERSION = 1

_KIND_TO_CODE = {TERMINATION: 1, BIFURCATION: 3}
_CODE_TO_KIND = {1: TERMINATION, 3: BIFURCATION}

# Angles are stored as centidegrees of the [0, 180) orientation range.
_CENTIDEG_PER_RAD = 18000.0 / math.pi


@dataclass
class SubjectRecords:
    subject_id: str
    fingerprints: list[Path]
    irises: list[Path]


@dataclass
class DatasetIndex:
    root: Path
    subjects: list[SubjectRecords] = field(default_factory=list)

    def subject(self, subject_id: str) -> SubjectRecords:
        for s in self.subjects:
            if s.subject_id == subject_id:
                return s
        raise DataError(f"unknown subject {subject_id!r}")


@dataclass
class TemplateRecord:
    subject_id: str
    fingerprint: MinutiaeSet
    iris: IrisCode
    created_at: float = 0.0  # unix seconds; informational, not serialized


# ---------------------------------------------------------------------------
# Grayscale image I/O


def _read_pgm(data: bytes, path: Path) -> np.ndarray:
    # P5 header: whitespace-separated tokens, '#' starts a comment to EOL.
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            elif c.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PGM header")
        return data[start:pos]

    if next_token() != b"P5":
        raise ImageFormatError(f"{path}: not a binary (P5) PGM file")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise ImageFormatError(f"{path}: malformed PGM header") from exc
    if width < 1 or height < 1:
        raise ImageFormatError(f"{path}: zero-dimension image")
    if maxval != 255:
        raise ImageFormatError(f"{path}: only 8-bit PGM (maxval 255) is supported")
    pos += 1  # single whitespace byte after the header
    pixels = data[pos : pos + width * height]
    if len(pixels) != width * height:
        raise ImageFormatError(f"{path}: PGM payload is truncated")
    return np.frombuffer(pixels, dtype=np.uint8).reshape(height, width).copy()


def luminance_bt601(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luminance with round-half-up, uint8 output."""
    arr = rgb.astype(np.float64)
    y = 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]
    return np.floor(y + 0.5).astype(np.uint8)


def _read_png(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8)
        elif im.mode == "LA":
            arr = np.asarray(im.getchannel("L"), dtype=np.uint8)
        elif im.mode in ("RGB", "RGBA", "P"):
            rgb = np.asarray(im.convert("RGBA"), dtype=np.uint8)[..., :3]
            arr = luminance_bt601(rgb)
        else:
            raise ImageFormatError(f"{path}: unsupported PNG mode {im.mode!r}")
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ImageFormatError(f"{path}: zero-dimension image")
    return arr.copy()


def load_gray(path: str | Path) -> np.ndarray:
    """Load an 8-bit grayscale image from PGM (P5) or PNG."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(path)
    data = path.read_bytes()
    if data[:2] == b"P5":
        return _read_pgm(data, path)
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return _read_png(path)
    raise ImageFormatError(f"{path}: unsupported image format")


def save_gray(image: np.ndarray, path: str | Path) -> None:
    """Write a binary P5 PGM, losslessly round-trippable via load_gray."""
    arr = np.asarray(image)
    if arr.ndim != 2 or arr.dtype != np.uint8:
        raise ValueError("save_gray expects a 2-D uint8 array")
    h, w = arr.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(arr.tobytes())


# ---------------------------------------------------------------------------
# Dataset layout: <root>/<subject-id>/fp_<k>.pgm and iris_<k>.pgm


def _indexed(paths: list[Path]) -> list[Path]:
    def key(p: Path):
        stem = p.stem
        try:
            return (0, int(stem.split("_", 1)[1]), stem)
        except (IndexError, ValueError):
            return (1, 0, stem)

    return sorted(paths, key=key)


def load_dataset(root: str | Path) -> DatasetIndex:
    """Scan the per-subject directory layout into a DatasetIndex."""
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"dataset root {root} does not exist")
    subjects = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        fps = _indexed([p for p in sub.iterdir()
                        if p.is_file() and p.name.startswith("fp_")])
        irises = _indexed([p for p in sub.iterdir()
                           if p.is_file() and p.name.startswith("iris_")])
        subjects.append(SubjectRecords(sub.name, fps, irises))
    return DatasetIndex(root=root, subjects=subjects)


# ---------------------------------------------------------------------------
# Template serialization


def angle_to_centidegrees(angle: float) -> int:
    return int(round((angle % math.pi) * _CENTIDEG_PER_RAD)) % 18000


def centidegrees_to_angle(cd: int) -> float:
    return cd / _CENTIDEG_PER_RAD


def _pack_template(record: TemplateRecord) -> bytes:
    out = bytearray()
    out += TEMPLATE_MAGIC
    out += struct.pack("<H", TEMPLATE_VERSION)
    sid = record.subject_id.encode("utf-8")
    if len(sid) > 0xFFFF:
        raise ValueError("subject id too long")
    out += struct.pack("<H", len(sid))
    out += sid
    mset = record.fingerprint
    out += struct.pack("<HH", mset.source_width, mset.source_height)
    out += struct.pack("<H", len(mset.minutiae))
    for m in mset.minutiae:
        out += struct.pack(
            "<HHHB", m.x, m.y, angle_to_centidegrees(m.angle), _KIND_TO_CODE[m.kind]
        )
    code = record.iris
    out += struct.pack("<IH", code.length, code.cols)
    row_bytes = np.zeros(code.length, dtype=np.uint8)
    for k in range(6):
        row_bytes |= (code.bits[:, k].astype(np.uint8) & 1) << k
    row_bytes |= (code.mask.astype(np.uint8) & 1) << 6
    out += row_bytes.tobytes()
    out += struct.pack("<I", zlib.crc32(bytes(out)) & 0xFFFFFFFF)
    return bytes(out)


def write_template(record: TemplateRecord, path: str | Path) -> None:
    Path(path).write_bytes(_pack_template(record))


def read_template(path: str | Path) -> TemplateRecord:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 4 + 2 + 2 + 4:
        raise TemplateFormatError(f"{path}: truncated template file")
    if data[:4] != TEMPLATE_MAGIC:
        raise TemplateFormatError(f"{path}: bad magic, not a template file")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    if zlib.crc32(data[:-4]) & 0xFFFFFFFF != stored_crc:
        raise ChecksumError(f"{path}: checksum mismatch")

    pos = 4
    (version,) = struct.unpack_from("<H", data, pos)
    pos += 2
    if version != TEMPLATE_VERSION:
        raise VersionError(f"{path}: unsupported template version {version}")

    try:
        (sid_len,) = struct.unpack_from("<H", data, pos)
        pos += 2
        subject_id = data[pos : pos + sid_len].decode("utf-8")
        pos += sid_len
        width, height, count = struct.unpack_from("<HHH", data, pos)
        pos += 6
        minutiae = []
        for _ in range(count):
            x, y, cd, kind_code = struct.unpack_from("<HHHB", data, pos)
            pos += 7
            if kind_code not in _CODE_TO_KIND:
                raise TemplateFormatError(f"{path}: unknown minutia type {kind_code}")
            minutiae.append(
                Minutia(x=x, y=y, angle=centidegrees_to_angle(cd),
                        kind=_CODE_TO_KIND[kind_code])
            )
        rows, cols = struct.unpack_from("<IH", data, pos)
        pos += 6
        payload = data[pos : pos + rows]
        if len(payload) != rows:
            raise struct.error("iris payload short")
        pos += rows
    except struct.error as exc:
        raise TemplateFormatError(f"{path}: truncated template file") from exc
    if pos != len(data) - 4:
        raise TemplateFormatError(f"{path}: trailing bytes in template file")

    row_bytes = np.frombuffer(payload, dtype=np.uint8)
    bits = np.stack([(row_bytes >> k) & 1 for k in range(6)], axis=1).astype(np.uint8)
    mask = ((row_bytes >> 6) & 1).astype(bool)
    code = IrisCode(bits=bits, mask=mask, cols=cols)
    mset = MinutiaeSet(minutiae=minutiae, source_width=width, source_height=height)
    try:
        created = path.stat().st_mtime
    except OSError:
        created = time.time()
    return TemplateRecord(subject_id=subject_id, fingerprint=mset, iris=code,
                          created_at=created)
