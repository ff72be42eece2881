"""Value representation table.

Each VR carries its encoding class, explicit-VR length field width, padding
byte, maximum length and (for binary VRs) the size of one numeric item.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class VRSpec:
    code: str
    kind: str  # "text", "binary", "sequence", "bytes"
    long_length: bool  # 4-byte length field in explicit VR
    pad: bytes
    max_len: int | None = None  # per value, in characters
    item_size: int | None = None  # binary VRs
    struct_code: str | None = None
    multi_valued: bool = True  # backslash is a value delimiter


_SPECS = [
    VRSpec("AE", "text", False, b" ", 16),
    VRSpec("AS", "text", False, b" ", 4),
    VRSpec("CS", "text", False, b" ", 16),
    VRSpec("DA", "text", False, b" ", 8),
    VRSpec("DS", "text", False, b" ", 16),
    VRSpec("DT", "text", False, b" ", 26),
    VRSpec("IS", "text", False, b" ", 12),
    VRSpec("LO", "text", False, b" ", 64),
    VRSpec("LT", "text", False, b" ", 10240, multi_valued=False),
    VRSpec("PN", "text", False, b" ", 64 * 3),
    VRSpec("SH", "text", False, b" ", 16),
    VRSpec("ST", "text", False, b" ", 1024, multi_valued=False),
    VRSpec("TM", "text", False, b" ", 14),
    VRSpec("UC", "text", True, b" ", None),
    VRSpec("UI", "text", False, b"\x00", 64),
    VRSpec("UR", "text", True, b" ", None, multi_valued=False),
    VRSpec("UT", "text", True, b" ", 0xFFFFFFFE, multi_valued=False),
    VRSpec("AT", "binary", False, b"\x00", item_size=4, struct_code="H"),
    VRSpec("FL", "binary", False, b"\x00", item_size=4, struct_code="f"),
    VRSpec("FD", "binary", False, b"\x00", item_size=8, struct_code="d"),
    VRSpec("SL", "binary", False, b"\x00", item_size=4, struct_code="l"),
    VRSpec("SS", "binary", False, b"\x00", item_size=2, struct_code="h"),
    VRSpec("SV", "binary", True, b"\x00", item_size=8, struct_code="q"),
    VRSpec("UL", "binary", False, b"\x00", item_size=4, struct_code="L"),
    VRSpec("US", "binary", False, b"\x00", item_size=2, struct_code="H"),
    VRSpec("UV", "binary", True, b"\x00", item_size=8, struct_code="Q"),
    VRSpec("OB", "bytes", True, b"\x00", item_size=1),
    VRSpec("OD", "bytes", True, b"\x00", item_size=8),
    VRSpec("OF", "bytes", True, b"\x00", item_size=4),
    VRSpec("OL", "bytes", True, b"\x00", item_size=4),
    VRSpec("OV", "bytes", True, b"\x00", item_size=8),
    VRSpec("OW", "bytes", True, b"\x00", item_size=2),
    VRSpec("UN", "bytes", True, b"\x00", item_size=1),
    VRSpec("SQ", "sequence", True, b""),
]

VR_SPECS: dict[str, VRSpec] = {s.code: s for s in _SPECS}

TEXT_VRS = frozenset(c for c, s in VR_SPECS.items() if s.kind == "text")
# Free-text VRs eligible for the CLEAN action.
CLEANABLE_VRS = frozenset({"LO", "LT", "SH", "ST", "UT", "UC"})
TEMPORAL_VRS = frozenset({"DA", "TM", "DT"})

# Byte-swap unit for big-endian conversion; 1 means no swap.
SWAP_SIZE = {
    "AT": 2, "FL": 4, "FD": 8, "SL": 4, "SS": 2, "SV": 8, "UL": 4, "US": 2,
    "UV": 8, "OD": 8, "OF": 4, "OL": 4, "OV": 8, "OW": 2,
}


def spec(vr: str) -> VRSpec:
    try:
        return VR_SPECS[vr]
    except KeyError:
        raise KeyError(f"unknown VR {vr!r}") from None
