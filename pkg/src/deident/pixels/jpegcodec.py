"""Baseline JPEG at the quantized-coefficient level.

Decoding stops at Huffman-decoded coefficients; no IDCT is ever run, so
blocks that are not edited keep their exact coefficients. Re-encoding writes
freshly optimized Huffman tables, which changes table bytes but not any
decoded sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .jpeg import DHT, DQT, DRI, EOI, SOI, SOS, JpegStream, MalformedJpeg, Segment, parse_jpeg

ZIGZAG = np.array([
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
])

_SEQUENTIAL_HUFFMAN = (0xC0, 0xC1)


class UnsupportedJpegMode(ValueError):
    pass


@dataclass
class Component:
    cid: int
    h: int
    v: int
    tq: int
    # quantized coefficients, zigzag order, shape (blocks_y, blocks_x, 64)
    coef: np.ndarray | None = None


@dataclass
class Scan:
    components: list[int]  # indices into Frame.components
    td: list[int]
    ta: list[int]
    header: bytes


@dataclass
class Frame:
    marker: int
    precision: int
    height: int
    width: int
    components: list[Component]
    scans: list[Scan] = field(default_factory=list)
    restart_interval: int = 0

    @property
    def hmax(self) -> int:
        return max(c.h for c in self.components)

    @property
    def vmax(self) -> int:
        return max(c.v for c in self.components)

    @property
    def mcus_x(self) -> int:
        return math.ceil(self.width / (8 * self.hmax))

    @property
    def mcus_y(self) -> int:
        return math.ceil(self.height / (8 * self.vmax))

    def component_blocks(self, c: Component) -> tuple[int, int]:
        """Blocks actually covering the component (non-interleaved scan extent)."""
        cw = math.ceil(self.width * c.h / self.hmax)
        ch = math.ceil(self.height * c.v / self.vmax)
        return math.ceil(ch / 8), math.ceil(cw / 8)


# -- Huffman tables -----------------------------------------------------------

@dataclass
class HuffTable:
    bits: list[int]  # counts for code lengths 1..16
    values: list[int]

    def __post_init__(self):
        self.lookup: dict[tuple[int, int], int] = {}
        self.codes: dict[int, tuple[int, int]] = {}
        code, k = 0, 0
        for length in range(1, 17):
            for _ in range(self.bits[length - 1]):
                self.lookup[(length, code)] = self.values[k]
                self.codes[self.values[k]] = (code, length)
                code += 1
                k += 1
            code <<= 1

    def payload(self, tc: int, th: int) -> bytes:
        return bytes([(tc << 4) | th]) + bytes(self.bits) + bytes(self.values)


def parse_dht(payload: bytes) -> list[tuple[int, int, HuffTable]]:
    out, pos = [], 0
    while pos < len(payload):
        if pos + 17 > len(payload):
            raise MalformedJpeg("truncated DHT")
        tc, th = payload[pos] >> 4, payload[pos] & 15
        bits = list(payload[pos + 1:pos + 17])
        n = sum(bits)
        values = list(payload[pos + 17:pos + 17 + n])
        if len(values) != n:
            raise MalformedJpeg("truncated DHT values")
        out.append((tc, th, HuffTable(bits, values)))
        pos += 17 + n
    return out


def optimal_table(freq: dict[int, int]) -> HuffTable:
    """Length-limited (16 bit) Huffman table from symbol frequencies."""
    freq = {s: f for s, f in freq.items() if f > 0}
    if not freq:
        freq = {0: 1}
    counts = [0] * 257
    for s, f in freq.items():
        counts[s] = f
    counts[256] = 1  # reserved so no code is all ones
    codesize = [0] * 257
    others = [-1] * 257
    while True:
        v1 = v2 = -1
        for i in range(257):
            if counts[i] and (v1 < 0 or counts[i] <= counts[v1]):
                v1 = i
        for i in range(257):
            if counts[i] and i != v1 and (v2 < 0 or counts[i] <= counts[v2]):
                v2 = i
        if v2 < 0:
            break
        counts[v1] += counts[v2]
        counts[v2] = 0
        codesize[v1] += 1
        while others[v1] >= 0:
            v1 = others[v1]
            codesize[v1] += 1
        others[v1] = v2
        codesize[v2] += 1
        while others[v2] >= 0:
            v2 = others[v2]
            codesize[v2] += 1
    bits = [0] * 33
    for i in range(257):
        if codesize[i]:
            bits[codesize[i]] += 1
    i = 32
    while i > 16:
        while bits[i] > 0:
            j = i - 2
            while bits[j] == 0:
                j -= 1
            bits[i] -= 2
            bits[i - 1] += 1
            bits[j + 1] += 2
            bits[j] -= 1
        i -= 1
    while bits[i] == 0:
        i -= 1
    bits[i] -= 1  # drop the reserved symbol
    values = sorted((s for s in range(256) if codesize[s]), key=lambda s: (codesize[s], s))
    return HuffTable(bits[1:17], values)


# -- bit I/O -------------------------------------------------------------------

class _BitReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.acc = 0
        self.n = 0

    def _fill(self) -> None:
        data = self.data
        while self.n <= 24:
            if self.pos < len(data):
                b = data[self.pos]
                if b == 0xFF:
                    nxt = data[self.pos + 1] if self.pos + 1 < len(data) else 0
                    if nxt == 0x00:
                        self.pos += 2
                    else:
                        b = 0  # marker reached; pad with zeros
                else:
                    self.pos += 1
            else:
                b = 0
            self.acc = (self.acc << 8) | b
            self.n += 8

    def bit(self) -> int:
        if self.n == 0:
            self._fill()
        self.n -= 1
        return (self.acc >> self.n) & 1

    def bits(self, count: int) -> int:
        if count == 0:
            return 0
        if self.n < count:
            self._fill()
        self.n -= count
        return (self.acc >> self.n) & ((1 << count) - 1)

    def decode(self, table: HuffTable) -> int:
        code = 0
        lookup = table.lookup
        for length in range(1, 17):
            code = (code << 1) | self.bit()
            hit = lookup.get((length, code))
            if hit is not None:
                return hit
        raise MalformedJpeg("invalid Huffman code")

    def restart(self) -> None:
        """Drop buffered bits and skip an RSTn marker."""
        self.acc = self.n = 0
        data = self.data
        while self.pos + 1 < len(data) and not (data[self.pos] == 0xFF and 0xD0 <= data[self.pos + 1] <= 0xD7):
            self.pos += 1
        if self.pos + 1 >= len(data):
            raise MalformedJpeg("missing restart marker")
        self.pos += 2


class _BitWriter:
    def __init__(self):
        self.out = bytearray()
        self.acc = 0
        self.n = 0

    def write(self, value: int, count: int) -> None:
        self.acc = (self.acc << count) | (value & ((1 << count) - 1))
        self.n += count
        while self.n >= 8:
            self.n -= 8
            b = (self.acc >> self.n) & 0xFF
            self.out.append(b)
            if b == 0xFF:
                self.out.append(0)
        self.acc &= (1 << self.n) - 1

    def flush(self) -> None:
        if self.n:
            self.write((1 << (8 - self.n)) - 1, 8 - self.n)


def _extend(v: int, t: int) -> int:
    return v - (1 << t) + 1 if t and v < (1 << (t - 1)) else v


def _category(v: int) -> int:
    return abs(v).bit_length()


def _magnitude_bits(v: int, size: int) -> int:
    return v if v >= 0 else v + (1 << size) - 1


# -- frame decode / encode --------------------------------------------------------

def _scan_units(frame: Frame, scan: Scan):
    """Yield (component index, block row, block col) in coding order, grouped per MCU."""
    if len(scan.components) == 1:
        ci = scan.components[0]
        by, bx = frame.component_blocks(frame.components[ci])
        for r in range(by):
            for c in range(bx):
                yield [(ci, r, c)]
        return
    for my in range(frame.mcus_y):
        for mx in range(frame.mcus_x):
            unit = []
            for ci in scan.components:
                comp = frame.components[ci]
                for v in range(comp.v):
                    for h in range(comp.h):
                        unit.append((ci, my * comp.v + v, mx * comp.h + h))
            yield unit


def read_frame(stream: JpegStream | bytes) -> tuple[Frame, JpegStream]:
    """Decode every scan of a sequential Huffman JPEG into quantized coefficients."""
    if isinstance(stream, (bytes, bytearray)):
        stream = parse_jpeg(bytes(stream))
    fm = stream.frame_marker
    if fm is None:
        raise MalformedJpeg("no frame header")
    if fm not in _SEQUENTIAL_HUFFMAN:
        raise UnsupportedJpegMode(f"frame type FF{fm:02X} is not baseline or extended Huffman")
    dc_tables: dict[int, HuffTable] = {}
    ac_tables: dict[int, HuffTable] = {}
    frame: Frame | None = None
    restart = 0
    segs = stream.segments
    i = 0
    while i < len(segs):
        seg = segs[i]
        if seg.marker == fm:
            p = seg.payload
            precision, height, width, nc = p[0], int.from_bytes(p[1:3], "big"), int.from_bytes(p[3:5], "big"), p[5]
            if precision != 8:
                raise UnsupportedJpegMode(f"{precision}-bit samples")
            if height == 0:
                raise UnsupportedJpegMode("height defined by DNL")
            comps = [Component(p[6 + 3 * k], p[7 + 3 * k] >> 4, p[7 + 3 * k] & 15, p[8 + 3 * k]) for k in range(nc)]
            frame = Frame(fm, precision, height, width, comps, restart_interval=restart)
            for c in comps:
                c.coef = np.zeros((frame.mcus_y * c.v, frame.mcus_x * c.h, 64), dtype=np.int32)
        elif seg.marker == DHT:
            for tc, th, table in parse_dht(seg.payload):
                (ac_tables if tc else dc_tables)[th] = table
        elif seg.marker == DRI:
            restart = int.from_bytes(seg.payload[:2], "big")
            if frame is not None:
                frame.restart_interval = restart
        elif seg.marker == SOS:
            if frame is None:
                raise MalformedJpeg("scan before frame header")
            p = seg.payload
            ns = p[0]
            ids = [c.cid for c in frame.components]
            comps, td, ta = [], [], []
            for k in range(ns):
                comps.append(ids.index(p[1 + 2 * k]))
                td.append(p[2 + 2 * k] >> 4)
                ta.append(p[2 + 2 * k] & 15)
            ss, se, a = p[1 + 2 * ns], p[2 + 2 * ns], p[3 + 2 * ns]
            if (ss, se, a) != (0, 63, 0):
                raise UnsupportedJpegMode("spectral selection or approximation in a sequential scan")
            scan = Scan(comps, td, ta, p)
            frame.scans.append(scan)
            data = b""
            if i + 1 < len(segs) and segs[i + 1].marker is None:
                data = segs[i + 1].payload
                i += 1
            _decode_scan(frame, scan, data, dc_tables, ac_tables)
        i += 1
    if frame is None:
        raise MalformedJpeg("no frame header")
    return frame, stream


def _decode_scan(frame, scan, data, dc_tables, ac_tables):
    reader = _BitReader(data)
    pred = {ci: 0 for ci in scan.components}
    dct = {ci: dc_tables[scan.td[k]] for k, ci in enumerate(scan.components)}
    act = {ci: ac_tables[scan.ta[k]] for k, ci in enumerate(scan.components)}
    ri = frame.restart_interval
    for n, unit in enumerate(_scan_units(frame, scan)):
        if ri and n and n % ri == 0:
            reader.restart()
            pred = {ci: 0 for ci in scan.components}
        for ci, r, c in unit:
            block = frame.components[ci].coef[r, c]
            t = reader.decode(dct[ci])
            diff = _extend(reader.bits(t), t)
            pred[ci] += diff
            block[0] = pred[ci]
            k = 1
            table = act[ci]
            while k < 64:
                rs = reader.decode(table)
                run, size = rs >> 4, rs & 15
                if size == 0:
                    if run == 15:
                        k += 16
                        continue
                    break
                k += run
                if k > 63:
                    raise MalformedJpeg("AC run past end of block")
                block[k] = _extend(reader.bits(size), size)
                k += 1


def _block_symbols(block, prev_dc):
    """(DC category, DC bits), then AC (run/size, value) pairs for one block."""
    diff = int(block[0]) - prev_dc
    size = _category(diff)
    ac = []
    run = 0
    nz = np.nonzero(block[1:])[0]
    last = int(nz[-1]) + 1 if len(nz) else 0
    for k in range(1, last + 1):
        v = int(block[k])
        if v == 0:
            run += 1
            continue
        while run > 15:
            ac.append((0xF0, 0, 0))
            run -= 16
        s = _category(v)
        ac.append(((run << 4) | s, v, s))
        run = 0
    if last < 63:
        ac.append((0x00, 0, 0))
    return (size, diff), ac


def _encode_scan(frame: Frame, scan: Scan, dc_codes, ac_codes) -> bytes:
    out = bytearray()
    w = _BitWriter()
    pred = {ci: 0 for ci in scan.components}
    ri = frame.restart_interval
    rst = 0
    for n, unit in enumerate(_scan_units(frame, scan)):
        if ri and n and n % ri == 0:
            w.flush()
            out += w.out + bytes((0xFF, 0xD0 + rst))
            rst = (rst + 1) % 8
            w = _BitWriter()
            pred = {ci: 0 for ci in scan.components}
        for ci, r, c in unit:
            block = frame.components[ci].coef[r, c]
            (size, diff), ac = _block_symbols(block, pred[ci])
            pred[ci] = int(block[0])
            code, length = dc_codes[ci].codes[size]
            w.write(code, length)
            if size:
                w.write(_magnitude_bits(diff, size), size)
            table = ac_codes[ci].codes
            for rs, v, s in ac:
                code, length = table[rs]
                w.write(code, length)
                if s:
                    w.write(_magnitude_bits(v, s), s)
    w.flush()
    out += w.out
    return bytes(out)


def _scan_frequencies(frame: Frame, scan: Scan):
    dc = {ci: {} for ci in scan.components}
    ac = {ci: {} for ci in scan.components}
    ri = frame.restart_interval
    pred = {ci: 0 for ci in scan.components}
    for n, unit in enumerate(_scan_units(frame, scan)):
        if ri and n and n % ri == 0:
            pred = {ci: 0 for ci in scan.components}
        for ci, r, c in unit:
            block = frame.components[ci].coef[r, c]
            (size, _), symbols = _block_symbols(block, pred[ci])
            pred[ci] = int(block[0])
            dc[ci][size] = dc[ci].get(size, 0) + 1
            for rs, _, _ in symbols:
                ac[ci][rs] = ac[ci].get(rs, 0) + 1
    return dc, ac


def write_frame(frame: Frame, template: JpegStream) -> JpegStream:
    """Re-encode ``frame`` into the segment layout of ``template``.

    Every DHT is replaced by tables built for the new coefficients (one DC and
    one AC table per component slot of each scan); all other segments are kept.
    """
    out: list[Segment] = []
    segs = template.segments
    scan_no = 0
    i = 0
    while i < len(segs):
        seg = segs[i]
        if seg.marker == DHT:
            i += 1
            continue
        if seg.marker == SOS:
            scan = frame.scans[scan_no]
            scan_no += 1
            dc_f, ac_f = _scan_frequencies(frame, scan)
            # baseline allows two tables per class: slot 0 for the first
            # component, slot 1 shared by the rest
            slots = {ci: (0 if k == 0 else 1) for k, ci in enumerate(scan.components)}
            merged_dc: dict = {0: {}, 1: {}}
            merged_ac: dict = {0: {}, 1: {}}
            for ci, slot in slots.items():
                for sym, f in dc_f[ci].items():
                    merged_dc[slot][sym] = merged_dc[slot].get(sym, 0) + f
                for sym, f in ac_f[ci].items():
                    merged_ac[slot][sym] = merged_ac[slot].get(sym, 0) + f
            used = sorted(set(slots.values()))
            dc_tab = {slot: optimal_table(merged_dc[slot]) for slot in used}
            ac_tab = {slot: optimal_table(merged_ac[slot]) for slot in used}
            tables = b"".join(dc_tab[s].payload(0, s) + ac_tab[s].payload(1, s) for s in used)
            dc_codes = {ci: dc_tab[slot] for ci, slot in slots.items()}
            ac_codes = {ci: ac_tab[slot] for ci, slot in slots.items()}
            header = bytearray(seg.payload)
            for k, ci in enumerate(scan.components):
                header[2 + 2 * k] = (slots[ci] << 4) | slots[ci]
            out.append(Segment(DHT, bytes(tables)))
            out.append(Segment(SOS, bytes(header)))
            out.append(Segment(None, _encode_scan(frame, scan, dc_codes, ac_codes)))
            if i + 1 < len(segs) and segs[i + 1].marker is None:
                i += 1
            i += 1
            continue
        out.append(seg)
        i += 1
    return JpegStream(out)


# -- synthetic streams ------------------------------------------------------------

_STD_LUMA_Q = [
    16, 11, 10, 16, 24, 40, 51, 61, 12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56, 14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77, 24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
]


def encode_coefficients(coefs: list[np.ndarray], width: int, height: int,
                        quant: list[int] | None = None, restart_interval: int = 0,
                        app_segments: list[Segment] = ()) -> bytes:
    """Baseline JPEG from quantized zigzag coefficients, one array per component.

    Each array has shape (ceil(height/8), ceil(width/8), 64); components are
    not subsampled. All components share one quantization table.
    """
    quant = quant or _STD_LUMA_Q
    nc = len(coefs)
    comps = [Component(k + 1, 1, 1, 0, np.asarray(c, dtype=np.int32).copy()) for k, c in enumerate(coefs)]
    frame = Frame(0xC0, 8, height, width, comps, restart_interval=restart_interval)
    for c in comps:
        if c.coef.shape != (frame.mcus_y, frame.mcus_x, 64):
            raise ValueError(f"coefficient array shape {c.coef.shape} does not fit {width}x{height}")
    natural_to_zz = bytes(quant[n] for n in ZIGZAG)
    sof = bytes([8]) + height.to_bytes(2, "big") + width.to_bytes(2, "big") + bytes([nc])
    sof += b"".join(bytes([c.cid, 0x11, 0]) for c in comps)
    sos = bytes([nc]) + b"".join(bytes([c.cid, 0]) for c in comps) + bytes([0, 63, 0])
    frame.scans.append(Scan(list(range(nc)), [0] * nc, [0] * nc, sos))
    segs = [Segment(SOI), Segment(0xE0, b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00")]
    segs += list(app_segments)
    segs.append(Segment(DQT, b"\x00" + natural_to_zz))
    segs.append(Segment(0xC0, sof))
    if restart_interval:
        segs.append(Segment(DRI, restart_interval.to_bytes(2, "big")))
    segs += [Segment(SOS, sos), Segment(EOI)]
    return write_frame(frame, JpegStream(segs)).encode()


def quant_tables(stream: JpegStream) -> dict[int, list[int]]:
    """Quantization tables by slot, in zigzag order."""
    out = {}
    for seg in stream.find(DQT):
        p, pos = seg.payload, 0
        while pos < len(p):
            pq, tq = p[pos] >> 4, p[pos] & 15
            size = 128 if pq else 64
            raw = p[pos + 1:pos + 1 + size]
            out[tq] = [int.from_bytes(raw[2 * k:2 * k + 2], "big") for k in range(64)] if pq else list(raw)
            pos += 1 + size
    return out


# -- block redaction ---------------------------------------------------------------

def covering_blocks(frame: Frame, regions) -> list[tuple[int, int, int, int]]:
    """Regions grown to whole MCUs: (x, y, w, h) in samples, clipped to the image.

    With no chroma subsampling an MCU is one 8x8 block.
    """
    bw, bh = 8 * frame.hmax, 8 * frame.vmax
    out = []
    for x, y, w, h in regions:
        if w <= 0 or h <= 0:
            continue
        x0, y0 = max(0, x) // bw * bw, max(0, y) // bh * bh
        x1 = min(frame.mcus_x * bw, math.ceil(min(x + w, frame.width) / bw) * bw)
        y1 = min(frame.mcus_y * bh, math.ceil(min(y + h, frame.height) / bh) * bh)
        if x1 > x0 and y1 > y0:
            out.append((x0, y0, x1 - x0, y1 - y0))
    return out


def _fill_dc(level: int, q0: int) -> int:
    """Quantized DC whose flat block decodes to ``level`` (clamped at the range ends)."""
    shifted = 8 * (level - 128)
    if level <= 0:
        return math.floor(shifted / q0)
    if level >= 255:
        return math.ceil(shifted / q0)
    return round(shifted / q0)


def block_redact_jpeg(stream: JpegStream | bytes, regions, fill: str | int = "MIDGRAY",
                      monochrome1: bool = False) -> JpegStream:
    """Replace the blocks covering ``regions`` by flat fill blocks.

    Only covered blocks change; the DC prediction chain is recomputed on
    re-encode, so every other block keeps its coefficients and decodes to the
    same samples.
    """
    frame, stream = read_frame(stream)
    regions = list(regions)
    if not regions:
        return JpegStream(list(stream.segments))
    if fill == "MIDGRAY":
        level = 128
    elif fill == "BLACK":
        level = 255 if monochrome1 else 0
    else:
        level = int(fill)
    qt = quant_tables(stream)
    for x, y, w, h in covering_blocks(frame, regions):
        for k, comp in enumerate(frame.components):
            sx, sy = frame.hmax // comp.h, frame.vmax // comp.v
            c0, c1 = x // sx // 8, (x + w) // sx // 8
            r0, r1 = y // sy // 8, (y + h) // sy // 8
            q0 = qt[comp.tq][0]
            # colour components go neutral; only the first carries the level
            dc = _fill_dc(level, q0) if k == 0 else 0
            comp.coef[r0:r1, c0:c1, :] = 0
            comp.coef[r0:r1, c0:c1, 0] = dc
    return write_frame(frame, stream)
