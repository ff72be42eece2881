"""Transfer syntaxes the codec accepts."""

from __future__ import annotations

from typing import NamedTuple


class Encoding(NamedTuple):
    explicit_vr: bool
    little_endian: bool
    encapsulated: bool


IMPLICIT_LE = "1.2.840.10008.1.2"
EXPLICIT_LE = "1.2.840.10008.1.2.1"
EXPLICIT_BE = "1.2.840.10008.1.2.2"
JPEG_BASELINE = "1.2.840.10008.1.2.4.50"
JPEG_EXTENDED = "1.2.840.10008.1.2.4.51"
JPEG_LOSSLESS = "1.2.840.10008.1.2.4.57"
JPEG_LOSSLESS_SV1 = "1.2.840.10008.1.2.4.70"
JPEG_LS_LOSSLESS = "1.2.840.10008.1.2.4.80"
JPEG_LS_NEAR = "1.2.840.10008.1.2.4.81"
RLE_LOSSLESS = "1.2.840.10008.1.2.5"

_NATIVE = {
    IMPLICIT_LE: Encoding(False, True, False),
    EXPLICIT_LE: Encoding(True, True, False),
    EXPLICIT_BE: Encoding(True, False, False),
}

# JPEG bitstreams whose marker segments can be scrubbed in place.
JPEG_FAMILY = frozenset({JPEG_BASELINE, JPEG_EXTENDED, JPEG_LOSSLESS, JPEG_LOSSLESS_SV1})
JPEG_LS_FAMILY = frozenset({JPEG_LS_LOSSLESS, JPEG_LS_NEAR})
ENCAPSULATED = JPEG_FAMILY | JPEG_LS_FAMILY | {RLE_LOSSLESS}

SUPPORTED = frozenset(_NATIVE) | ENCAPSULATED


def encoding(uid: str) -> Encoding | None:
    """Encoding for a supported transfer syntax, None otherwise."""
    if uid in _NATIVE:
        return _NATIVE[uid]
    if uid in ENCAPSULATED:
        return Encoding(True, True, True)
    return None
