"""JPEG marker-segment parsing and metadata stripping without recompression."""

from __future__ import annotations

from dataclasses import dataclass, field

SOI, EOI, SOS, DHT, DQT, DRI, COM = 0xD8, 0xD9, 0xDA, 0xC4, 0xDB, 0xDD, 0xFE
APP0, APP1, APP11, APP14 = 0xE0, 0xE1, 0xEB, 0xEE
# markers that stand alone, without a length field
_STANDALONE = {0x01, SOI, EOI} | set(range(0xD0, 0xD8))


class MalformedJpeg(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    """One marker segment; ``marker`` None is a raw span (entropy data or fill)."""

    marker: int | None
    payload: bytes = b""

    def encode(self) -> bytes:
        if self.marker is None:
            return self.payload
        if self.marker in _STANDALONE:
            return bytes((0xFF, self.marker))
        return bytes((0xFF, self.marker)) + (len(self.payload) + 2).to_bytes(2, "big") + self.payload

    @property
    def is_app(self) -> bool:
        return self.marker is not None and 0xE0 <= self.marker <= 0xEF


@dataclass
class JpegStream:
    segments: list[Segment] = field(default_factory=list)

    @classmethod
    def parse(cls, data: bytes) -> "JpegStream":
        return parse_jpeg(data)

    def encode(self) -> bytes:
        return b"".join(s.encode() for s in self.segments)

    def markers(self) -> list[int]:
        return [s.marker for s in self.segments if s.marker is not None]

    def find(self, marker: int) -> list[Segment]:
        return [s for s in self.segments if s.marker == marker]

    @property
    def frame_marker(self) -> int | None:
        for s in self.segments:
            if s.marker is not None and 0xC0 <= s.marker <= 0xCF and s.marker not in (DHT, 0xC8, 0xCC):
                return s.marker
        return None


def _entropy_end(data: bytes, pos: int) -> int:
    """Index of the first marker after entropy-coded data (RSTn and stuffing skipped)."""
    n = len(data)
    while True:
        pos = data.find(b"\xff", pos)
        if pos < 0 or pos + 1 >= n:
            raise MalformedJpeg("entropy-coded data runs past end of stream")
        nxt = data[pos + 1]
        if nxt == 0x00 or 0xD0 <= nxt <= 0xD7:
            pos += 2
        elif nxt == 0xFF:
            # fill byte; the marker is whatever follows the run
            run = pos
            while run < n and data[run] == 0xFF:
                run += 1
            if run < n and data[run] == 0x00:
                pos = run + 1
                continue
            return pos
        else:
            return pos


def parse_jpeg(data: bytes) -> JpegStream:
    if data[:2] != b"\xff\xd8":
        raise MalformedJpeg("stream does not begin with SOI")
    segments = [Segment(SOI)]
    pos, n = 2, len(data)
    while True:
        if pos >= n:
            raise MalformedJpeg("stream ends without EOI")
        if data[pos] != 0xFF:
            raise MalformedJpeg(f"expected marker at offset {pos}")
        start = pos
        while pos < n and data[pos] == 0xFF:
            pos += 1
        if pos >= n:
            raise MalformedJpeg("truncated marker")
        if pos - start > 1:
            segments.append(Segment(None, data[start:pos - 1]))
        marker = data[pos]
        pos += 1
        if marker == 0x00:
            raise MalformedJpeg(f"stuffed byte outside entropy data at {pos - 2}")
        if marker in _STANDALONE:
            segments.append(Segment(marker))
            if marker == EOI:
                if pos < n:
                    segments.append(Segment(None, data[pos:]))
                return JpegStream(segments)
            continue
        if pos + 2 > n:
            raise MalformedJpeg("truncated segment length")
        length = int.from_bytes(data[pos:pos + 2], "big")
        if length < 2 or pos + length > n:
            raise MalformedJpeg(f"segment FF{marker:02X} length {length} is inconsistent")
        segments.append(Segment(marker, data[pos + 2:pos + length]))
        pos += length
        if marker == SOS:
            end = _entropy_end(data, pos)
            if end > pos:
                segments.append(Segment(None, data[pos:end]))
            pos = end


@dataclass(frozen=True)
class MarkerPolicy:
    """Which APPn segments survive; COM never does."""

    keep_app: frozenset = frozenset({APP0, APP14})

    def keeps(self, seg: Segment) -> bool:
        if seg.marker == COM:
            return False
        if seg.is_app:
            return seg.marker in self.keep_app
        return True


DEFAULT_POLICY = MarkerPolicy()


def scrub_jpeg_markers(stream: JpegStream | bytes, keep: MarkerPolicy = DEFAULT_POLICY) -> JpegStream:
    """Drop metadata segments; every other byte is carried over as is."""
    if isinstance(stream, (bytes, bytearray)):
        stream = parse_jpeg(bytes(stream))
    if not stream.segments or stream.segments[0].marker != SOI:
        raise MalformedJpeg("stream does not begin with SOI")
    if EOI not in stream.markers():
        raise MalformedJpeg("stream ends without EOI")
    return JpegStream([s for s in stream.segments if keep.keeps(s)])


def scrub_jpeg_bytes(data: bytes, keep: MarkerPolicy = DEFAULT_POLICY) -> bytes:
    return scrub_jpeg_markers(parse_jpeg(data), keep).encode()
