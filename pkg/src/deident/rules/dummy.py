"""Synthesized replacement values that satisfy their VR."""

from __future__ import annotations

import hashlib

from ..dicom.tag import Tag
from ..dicom.vr import VR_SPECS
from .errors import NoDummyForVR

_FIXED = {
    "DA": "19700101",
    "TM": "000000",
    "DT": "19700101000000",
    "DS": "0",
    "IS": "0",
    "AS": "000Y",
}


def synthesize_dummy(vr: str, tag: Tag, policy=None) -> str | bytes:
    """Dummy value for ``vr``: text as str, binary VRs as little-endian bytes.

    ``policy`` supplies ``dummy_pn``, ``dummy_text`` and ``dummy_uid_root``
    (a ProfileConfig will do); defaults apply when it is None.
    """
    spec = VR_SPECS.get(vr)
    if spec is None or spec.kind in ("sequence", "bytes"):
        raise NoDummyForVR(vr)
    pn = getattr(policy, "dummy_pn", "REMOVED^REMOVED")
    text = getattr(policy, "dummy_text", "REMOVED")
    root = getattr(policy, "dummy_uid_root", "2.25")
    if vr in _FIXED:
        return _FIXED[vr]
    if spec.kind == "binary":
        return b"\x00" * spec.item_size
    if vr == "PN":
        return pn
    if vr == "UI":
        digest = hashlib.sha256(f"dummy-uid {tag.group:04X}{tag.element:04X}".encode()).digest()
        value = f"{root}.{int.from_bytes(digest[:16], 'big')}"
        return value[:64]
    if vr == "CS":
        text = "".join(ch for ch in text.upper() if ch.isalnum() or ch in " _")
    if spec.max_len is not None:
        text = text[: spec.max_len]
    return text
