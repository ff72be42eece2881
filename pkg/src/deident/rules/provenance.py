"""Provenance attributes recording that and how de-identification happened."""

from __future__ import annotations

import hashlib

from .. import __version__
from ..dicom.dataset import DataSet, Element, encode_text, sequence_element, text_element
from ..dicom.tag import Tag
from .config import ProfileConfig

PATIENT_IDENTITY_REMOVED = Tag(0x0012, 0x0062)
DEIDENTIFICATION_METHOD = Tag(0x0012, 0x0063)
DEIDENTIFICATION_METHOD_CODES = Tag(0x0012, 0x0064)
LONGITUDINAL_MODIFIED = Tag(0x0028, 0x0303)
CONTRIBUTING_EQUIPMENT = Tag(0x0018, 0xA001)

IMPLEMENTATION_CLASS_UID = "2.25." + str(int.from_bytes(hashlib.sha256(b"deident implementation").digest()[:16], "big"))
IMPLEMENTATION_VERSION = "DEIDENT_" + __version__.replace(".", "_")
TOOL_NAME = "deident"

_TEMPORAL_FLAG = {"SHIFT": "MODIFIED", "RETAIN_FULL": "UNMODIFIED", "REMOVE_ALL": "REMOVED"}


def code_item(value: str, scheme: str, meaning: str) -> DataSet:
    return DataSet([
        text_element((0x0008, 0x0100), "SH", value),
        text_element((0x0008, 0x0102), "SH", scheme),
        text_element((0x0008, 0x0104), "LO", meaning),
    ])


def method_description(config: ProfileConfig, notes=()) -> list[str]:
    values = [f"{TOOL_NAME} {__version__} basic profile"]
    values += [f"option {o.value}" for o in sorted(config.options, key=lambda o: o.value)]
    values += list(notes)
    return [v[:64] for v in values]


def equipment_item() -> DataSet:
    return DataSet([
        text_element((0x0008, 0x0070), "LO", TOOL_NAME),
        text_element((0x0008, 0x1090), "LO", TOOL_NAME),
        text_element((0x0018, 0x1020), "LO", __version__),
        text_element((0x0018, 0xA003), "ST", "De-identification"),
        sequence_element((0x0040, 0xA170), [code_item("109104", "DCM", "De-identifying Equipment")]),
    ])


def stamp_provenance(ds: DataSet, config: ProfileConfig, notes=()) -> DataSet:
    """Return a copy carrying the identity-removed flag, method, codes and equipment."""
    out = ds.copy()
    out.add(text_element(PATIENT_IDENTITY_REMOVED, "CS", "YES"))
    out.add(text_element(DEIDENTIFICATION_METHOD, "LO", method_description(config, notes)))
    out.add(sequence_element(DEIDENTIFICATION_METHOD_CODES,
                             [code_item(*c) for c in config.method_codes]))
    out.add(text_element(LONGITUDINAL_MODIFIED, "CS", _TEMPORAL_FLAG[config.temporal_mode]))
    existing = out.get(CONTRIBUTING_EQUIPMENT)
    items = list(existing.items) if existing is not None and existing.is_sequence else []
    seq = Element(CONTRIBUTING_EQUIPMENT, "SQ", items + [equipment_item()],
                  undefined_length=bool(existing and existing.undefined_length))
    out.add(seq)
    return out
