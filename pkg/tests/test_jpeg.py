import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from PIL import Image

from deident.pixels.jpeg import APP1, APP11, COM, MalformedJpeg, MarkerPolicy, parse_jpeg, scrub_jpeg_bytes, \
    scrub_jpeg_markers
from deident.pixels.jpegcodec import UnsupportedJpegMode, block_redact_jpeg, encode_coefficients, optimal_table, \
    read_frame, write_frame
from deident.synthetic import baseline_jpeg_with_metadata


def decode(data: bytes) -> np.ndarray:
    img = Image.open(io.BytesIO(data))
    img.load()
    return np.asarray(img)


def pillow_jpeg(mode="L", size=(40, 24), **kw) -> bytes:
    rng = np.random.default_rng(3)
    shape = (size[1], size[0]) if mode == "L" else (size[1], size[0], 3)
    img = Image.fromarray(rng.integers(0, 256, size=shape, dtype=np.uint8), mode)
    buf = io.BytesIO()
    img.save(buf, "JPEG", **kw)
    return buf.getvalue()


def test_parse_is_byte_exact():
    for data in (baseline_jpeg_with_metadata(1), pillow_jpeg("RGB"), pillow_jpeg(progressive=True)):
        assert parse_jpeg(data).encode() == data


def test_scrub_removes_metadata_segments_only():
    data = baseline_jpeg_with_metadata(5)
    before = parse_jpeg(data).markers()
    assert {APP1, APP11, COM} <= set(before)
    out = scrub_jpeg_bytes(data)
    after = parse_jpeg(out).markers()
    assert not {APP1, APP11, COM} & set(after)
    assert b"EXIF0005" not in out and b"COMMENT0005" not in out
    assert np.array_equal(decode(out), decode(data))
    keep_all = scrub_jpeg_markers(data, MarkerPolicy(keep_app=frozenset(range(0xE0, 0xF0))))
    assert APP1 in keep_all.markers() and COM not in keep_all.markers()


def test_malformed():
    with pytest.raises(MalformedJpeg):
        parse_jpeg(b"\x00\x01")
    with pytest.raises(MalformedJpeg):
        parse_jpeg(baseline_jpeg_with_metadata(2)[:30])


@pytest.mark.parametrize("mode,kw", [("L", {}), ("RGB", {"subsampling": 0}), ("RGB", {"subsampling": 2}),
                                     ("L", {"optimize": True}), ("RGB", {"subsampling": 1})])
def test_recode_of_real_encoder_output_is_lossless(mode, kw):
    data = pillow_jpeg(mode, (53, 37), **kw)
    frame, stream = read_frame(data)
    again = write_frame(frame, stream).encode()
    assert np.array_equal(decode(again), decode(data))
    frame2, _ = read_frame(again)
    for a, b in zip(frame.components, frame2.components):
        assert np.array_equal(a.coef, b.coef)


def test_restart_intervals_round_trip():
    rng = np.random.default_rng(9)
    coef = rng.integers(-20, 20, size=(4, 6, 64)).astype(np.int32)
    coef[..., 10:] = 0
    data = encode_coefficients([coef], 48, 32, restart_interval=5)
    frame, _ = read_frame(data)
    assert frame.restart_interval == 5
    assert np.array_equal(frame.components[0].coef, coef)
    decode(data)


def test_progressive_is_rejected():
    with pytest.raises(UnsupportedJpegMode):
        read_frame(pillow_jpeg(progressive=True))


@given(st.dictionaries(st.integers(0, 255), st.integers(1, 10 ** 6), min_size=1, max_size=200))
def test_optimal_table_is_prefix_free_and_limited(freq):
    table = optimal_table(freq)
    codes = table.codes
    assert set(codes) == set(freq)
    lengths = [n for _, n in codes.values()]
    assert max(lengths) <= 16
    assert sum(2.0 ** -n for n in lengths) <= 1.0
    words = sorted(format(c, f"0{n}b") for c, n in codes.values())
    assert all(not b.startswith(a) for a, b in zip(words, words[1:]))
    # no code is all ones
    assert all(c != (1 << n) - 1 for c, n in codes.values())


def _controlled(seed, by=5, bx=7, comps=1):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(comps):
        c = np.zeros((by, bx, 64), dtype=np.int32)
        c[..., 0] = rng.integers(-40, 40, size=(by, bx))
        c[..., 1:10] = rng.integers(-6, 7, size=(by, bx, 9))
        out.append(c)
    return out


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 6), st.integers(0, 4), st.integers(1, 7), st.integers(1, 5),
       st.sampled_from(["BLACK", "MIDGRAY", 255]))
def test_block_redaction_property(seed, bx, by, bw, bh, fill):
    bw, bh = min(bw, 7 - bx), min(bh, 5 - by)
    data = encode_coefficients(_controlled(seed), 56, 40)
    region = (8 * bx, 8 * by, 8 * bw, 8 * bh)
    out = block_redact_jpeg(data, [region], fill).encode()
    a, b = decode(data).astype(int), decode(out).astype(int)
    inside = np.zeros_like(a, dtype=bool)
    inside[region[1]:region[1] + region[3], region[0]:region[0] + region[2]] = True
    assert np.array_equal(a[~inside], b[~inside])
    level = {"BLACK": 0, "MIDGRAY": 128, 255: 255}[fill]
    assert (b[inside] == level).all()


def test_unaligned_region_expands_to_blocks():
    data = encode_coefficients(_controlled(1), 56, 40)
    out = block_redact_jpeg(data, [(10, 10, 3, 3)], "BLACK").encode()
    b = decode(out)
    assert (b[8:16, 8:16] == 0).all()
    assert np.array_equal(decode(data)[16:, :], b[16:, :])


def test_colour_redaction_keeps_neutral_chroma():
    data = encode_coefficients(_controlled(4, comps=3), 56, 40)
    out = block_redact_jpeg(data, [(0, 0, 16, 16)], "MIDGRAY").encode()
    rgb = decode(out).astype(int)
    assert (abs(rgb[:16, :16] - 128) <= 1).all()
    assert np.array_equal(decode(data)[16:], decode(out)[16:])


def test_empty_regions_is_identity():
    data = baseline_jpeg_with_metadata(3)
    assert block_redact_jpeg(data, []).encode() == data
