import struct
import zlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from mmbio.errors import ChecksumError, ImageFormatError, TemplateFormatError, VersionError
from mmbio.fp_minutiae import BIFURCATION, TERMINATION, Minutia, MinutiaeSet
from mmbio.imgio import (
    TemplateRecord,
    centidegrees_to_angle,
    load_dataset,
    load_gray,
    luminance_bt601,
    read_template,
    save_gray,
    write_template,
)
from mmbio.iris_code import IrisCode


def test_pgm_p5_exact_bytes(tmp_path):
    path = tmp_path / "a.pgm"
    path.write_bytes(b"P5\n3 2\n255\n" + bytes([0, 128, 255, 1, 2, 3]))
    img = load_gray(path)
    assert img.shape == (2, 3)
    assert img.tolist() == [[0, 128, 255], [1, 2, 3]]


def test_pgm_single_pixel(tmp_path):
    path = tmp_path / "b.pgm"
    path.write_bytes(b"P5 1 1 255\n" + bytes([7]))
    assert load_gray(path).tolist() == [[7]]


def test_pgm_header_comments(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# a comment\n2 1\n# more\n255\n" + bytes([9, 10]))
    assert load_gray(path).tolist() == [[9, 10]]


def test_pgm_rejects_16bit(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n1 1\n65535\n" + bytes([0, 7]))
    with pytest.raises(ImageFormatError):
        load_gray(path)


def test_pgm_truncated_payload(tmp_path):
    path = tmp_path / "d.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + bytes(5))
    with pytest.raises(ImageFormatError):
        load_gray(path)


def test_pgm_zero_dimension(tmp_path):
    path = tmp_path / "e.pgm"
    path.write_bytes(b"P5\n0 5\n255\n")
    with pytest.raises(ImageFormatError):
        load_gray(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_gray(tmp_path / "nope.pgm")


def test_unknown_format(tmp_path):
    path = tmp_path / "f.bin"
    path.write_bytes(b"GIF89a....")
    with pytest.raises(ImageFormatError):
        load_gray(path)


def test_png_red_pixel_luminance(tmp_path):
    # round(0.299*255 + 0.587*0 + 0.114*0) computed by hand: 76.245 -> 76
    path = tmp_path / "red.png"
    Image.new("RGB", (1, 1), (255, 0, 0)).save(path)
    assert load_gray(path).tolist() == [[76]]


def test_png_grayscale_exact(tmp_path, rng):
    arr = rng.integers(0, 256, (9, 7), dtype=np.uint8)
    path = tmp_path / "g.png"
    Image.fromarray(arr, mode="L").save(path)
    assert np.array_equal(load_gray(path), arr)


def test_luminance_matches_oracle(rng):
    rgb = rng.integers(0, 256, (5, 4, 3), dtype=np.uint8)
    got = luminance_bt601(rgb)
    for y in range(5):
        for x in range(4):
            r, g, b = (int(v) for v in rgb[y, x])
            expect = int(np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5))
            assert got[y, x] == expect


def test_save_load_round_trip(tmp_path):
    img = np.array([[0, 128, 255], [1, 2, 3]], dtype=np.uint8)
    path = tmp_path / "rt.pgm"
    save_gray(img, path)
    assert np.array_equal(load_gray(path), img)


def test_save_all_zero_payload_bytes(tmp_path):
    path = tmp_path / "z.pgm"
    save_gray(np.zeros((4, 4), dtype=np.uint8), path)
    data = path.read_bytes()
    assert data.endswith(bytes(16))
    assert np.array_equal(load_gray(path), np.zeros((4, 4), dtype=np.uint8))


def test_save_all_255_round_trip(tmp_path):
    img = np.full((2, 2), 255, dtype=np.uint8)
    path = tmp_path / "w.pgm"
    save_gray(img, path)
    assert np.array_equal(load_gray(path), img)


@given(
    data=st.binary(min_size=0, max_size=64),
    w=st.integers(1, 9),
    h=st.integers(1, 9),
)
@settings(max_examples=60, deadline=None)
def test_pgm_round_trip_property(tmp_path_factory, data, w, h):
    pixels = (np.frombuffer((data * ((w * h) // max(len(data), 1) + 1))[: w * h], dtype=np.uint8)
              if data else np.zeros(w * h, dtype=np.uint8))
    img = pixels.reshape(h, w)
    path = tmp_path_factory.mktemp("pgm") / "p.pgm"
    save_gray(img, path)
    assert np.array_equal(load_gray(path), img)


# ---------------------------------------------------------------------------
# Templates


def make_record(subject="alice", n_minutiae=40, rows=32, cols=8, seed=0):
    rng = np.random.default_rng(seed)
    seen = set()
    minutiae = []
    while len(minutiae) < n_minutiae:
        x, y = int(rng.integers(0, 300)), int(rng.integers(0, 300))
        if (x, y) in seen:
            continue
        seen.add((x, y))
        minutiae.append(
            Minutia(
                x=x,
                y=y,
                angle=centidegrees_to_angle(int(rng.integers(0, 18000))),
                kind=TERMINATION if rng.integers(2) else BIFURCATION,
            )
        )
    code = IrisCode(
        bits=rng.integers(0, 2, (rows * cols, 6)).astype(np.uint8),
        mask=rng.integers(0, 2, rows * cols).astype(bool),
        cols=cols,
    )
    mset = MinutiaeSet(minutiae=minutiae, source_width=300, source_height=300)
    return TemplateRecord(subject_id=subject, fingerprint=mset, iris=code)


def assert_records_equal(a: TemplateRecord, b: TemplateRecord):
    assert a.subject_id == b.subject_id
    assert a.fingerprint.source_width == b.fingerprint.source_width
    assert a.fingerprint.source_height == b.fingerprint.source_height
    assert a.fingerprint.minutiae == b.fingerprint.minutiae
    assert a.iris.cols == b.iris.cols
    assert np.array_equal(a.iris.bits, b.iris.bits)
    assert np.array_equal(a.iris.mask, b.iris.mask)


def test_template_round_trip_empty(tmp_path):
    record = make_record(n_minutiae=0, rows=4, cols=2)
    record.iris.bits[:] = 0
    path = tmp_path / "t.mbio"
    write_template(record, path)
    assert_records_equal(read_template(path), record)


def test_template_round_trip_40_minutiae(tmp_path):
    record = make_record(n_minutiae=40)
    path = tmp_path / "t.mbio"
    write_template(record, path)
    assert_records_equal(read_template(path), record)


def test_template_corrupted_checksum(tmp_path):
    record = make_record()
    path = tmp_path / "t.mbio"
    write_template(record, path)
    data = bytearray(path.read_bytes())
    data[10] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(ChecksumError):
        read_template(path)


def test_template_bad_magic(tmp_path):
    path = tmp_path / "t.mbio"
    path.write_bytes(b"NOPE" + bytes(20))
    with pytest.raises(TemplateFormatError):
        read_template(path)


def test_template_truncated(tmp_path):
    record = make_record()
    path = tmp_path / "t.mbio"
    write_template(record, path)
    data = path.read_bytes()
    # keep the CRC consistent with the truncated body
    body = data[: len(data) // 2]
    path.write_bytes(body[:-4] + struct.pack("<I", zlib.crc32(body[:-4]) & 0xFFFFFFFF))
    with pytest.raises(TemplateFormatError):
        read_template(path)


def test_template_version_mismatch(tmp_path):
    record = make_record()
    path = tmp_path / "t.mbio"
    write_template(record, path)
    data = bytearray(path.read_bytes())
    struct.pack_into("<H", data, 4, 999)
    body = bytes(data[:-4])
    path.write_bytes(body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF))
    with pytest.raises(VersionError):
        read_template(path)


@given(
    n=st.integers(0, 25),
    rows=st.integers(1, 16),
    cols=st.integers(1, 12),
    seed=st.integers(0, 2**31),
    subject=st.text(min_size=1, max_size=12),
)
@settings(max_examples=40, deadline=None)
def test_template_round_trip_property(tmp_path_factory, n, rows, cols, seed, subject):
    record = make_record(subject=subject, n_minutiae=n, rows=rows, cols=cols, seed=seed)
    path = tmp_path_factory.mktemp("tpl") / "t.mbio"
    write_template(record, path)
    assert_records_equal(read_template(path), record)


def test_dataset_index_layout(tmp_path):
    root = tmp_path / "data"
    for sid in ("s2", "s1"):
        d = root / sid
        d.mkdir(parents=True)
        for k in (1, 2, 10):
            save_gray(np.zeros((8, 8), dtype=np.uint8), d / f"fp_{k}.pgm")
            save_gray(np.zeros((8, 8), dtype=np.uint8), d / f"iris_{k}.pgm")
    index = load_dataset(root)
    assert [s.subject_id for s in index.subjects] == ["s1", "s2"]
    names = [p.name for p in index.subjects[0].fingerprints]
    assert names == ["fp_1.pgm", "fp_2.pgm", "fp_10.pgm"]  # numeric order
    assert len(index.subject("s2").irises) == 3
