import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from deident.dicom import syntax
from deident.dicom.dataset import Element
from deident.dicom.tag import Tag
from deident.pixels import (Geometry, GeometryMismatch, TemplateError, UnsupportedPixelEncoding, fill_value,
                            load_templates, match_template, parse_templates, redact_pixels, redact_uncompressed,
                            sanitize_container, union_rectangles)
from deident.pixels.container import frames_of, build_fragments
from deident.synthetic import make_corpus_file, make_us_file

PIXEL_DATA = Tag(0x7FE0, 0x0010)

rects = st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30), st.integers(0, 12), st.integers(0, 12)),
                 max_size=8)


def painted(rs, size=48):
    m = np.zeros((size, size), dtype=int)
    for x, y, w, h in rs:
        m[y:y + h, x:x + w] += 1
    return m


@given(rects)
def test_union_is_exact_and_disjoint(rs):
    out = union_rectangles(rs)
    cover = painted(out)
    assert cover.max(initial=0) <= 1
    assert np.array_equal(cover > 0, painted(rs) > 0)


@settings(deadline=None)
@given(rects, st.sampled_from([1, 3]), st.sampled_from([8, 16]), st.integers(0, 1))
def test_redact_uncompressed_property(rs, samples, bits, planar):
    g = Geometry(40, 36, samples, bits, planar if samples == 3 else 0, 2,
                 "RGB" if samples == 3 else "MONOCHROME2")
    rng = np.random.default_rng(0)
    dtype = np.uint8 if bits == 8 else np.dtype("<u2")
    data = rng.integers(1, 200, size=g.expected_bytes // (bits // 8)).astype(dtype).tobytes()
    out = redact_uncompressed(data, g, rs, "BLACK")
    a = np.frombuffer(data, dtype=dtype).reshape(2, -1)
    b = np.frombuffer(out, dtype=dtype).reshape(2, -1)
    mask = painted(rs, 48)[:40, :36] > 0
    changed = (a != b).reshape(2, -1).sum(axis=1)
    assert (changed == mask.sum() * samples).all()
    assert (b[a != b] == 0).all()


def test_fill_values():
    assert fill_value("MIDGRAY", Geometry(1, 1, bits_allocated=16)) == 32768
    assert fill_value("BLACK", Geometry(1, 1, photometric="MONOCHROME1")) == 255
    assert fill_value("BLACK", Geometry(1, 1, bits_allocated=16, pixel_representation=1)) == -32768


def test_geometry_mismatch():
    with pytest.raises(GeometryMismatch):
        redact_uncompressed(b"\x00" * 10, Geometry(4, 4), [(0, 0, 1, 1)])


def test_template_parsing_and_matching():
    ts = load_templates()
    us = make_us_file(True)
    assert match_template(us.body, ts) == [(0, 0, 640, 40), (0, 440, 200, 40)]
    assert match_template(make_us_file(False).body, ts) == []
    with pytest.raises(TemplateError):
        parse_templates("t\tUS\t*\t*\t10\t10\tBLACK\t0,0,20,5\n")
    with pytest.raises(TemplateError):
        parse_templates("t\tUS\t*\t*\t10\t10\tPURPLE\t0,0,5,5\n")


def test_redact_pixels_native_counts_exactly():
    us = make_us_file(True)
    regions = match_template(us.body, load_templates())
    out, note = redact_pixels(us, regions, "BLACK")
    a = np.frombuffer(us.body[PIXEL_DATA].raw, np.uint8)
    b = np.frombuffer(out.body[PIXEL_DATA].raw, np.uint8)
    assert int((a != b).sum()) == 640 * 40 + 200 * 40
    assert "regions" in note
    same, _ = redact_pixels(us, [], "BLACK")
    assert same.body[PIXEL_DATA].raw == us.body[PIXEL_DATA].raw


def test_redact_pixels_jpeg_and_unsupported():
    sf = make_corpus_file(4, transfer_syntax=syntax.JPEG_BASELINE)
    out, _ = redact_pixels(sf.file, [(0, 0, 16, 8)], "BLACK")
    assert out.body[PIXEL_DATA].is_encapsulated
    rle = sf.file.copy()
    rle.transfer_syntax = syntax.RLE_LOSSLESS
    with pytest.raises(UnsupportedPixelEncoding):
        redact_pixels(rle, [(0, 0, 8, 8)])


def test_sanitize_container():
    sf = make_corpus_file(4, transfer_syntax=syntax.JPEG_BASELINE)
    out = sanitize_container(sf.file)
    assert out.preamble == b"\x00" * 128
    assert Tag(0xFFFC, 0xFFFC) not in out.body
    frames = frames_of(out.body[PIXEL_DATA].value, 1)
    assert all(b"\xff\xe1" not in f[:200] for f in frames)


def test_fragment_framing_round_trip():
    frames = [b"\xff\xd8" + bytes([i]) * (10 + i) + b"\xff\xd9" for i in range(3)]
    for offsets in (True, False):
        frags = build_fragments(frames, offsets)
        assert frames_of(frags, 3) == [f + (b"\x00" if len(f) % 2 else b"") for f in frames] or \
            frames_of(frags, 3) == frames
