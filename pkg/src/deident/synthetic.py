"""Synthetic DICOM files with planted identifiers, for tests and demos.

Every generator is deterministic in its seed. Planted tokens are returned
alongside each file so a byte-level search can prove they are gone.
"""

from __future__ import annotations

import random
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dicom import syntax
from .dicom.dataset import DataSet, Element, FileObject, Fragments, numeric_element, sequence_element, text_element
from .dicom.tag import Tag
from .dicom.writer import serialize
from .pixels.container import build_fragments
from .pixels.jpeg import Segment
from .pixels.jpegcodec import encode_coefficients

ORG_ROOT = "1.2.826.0.1.3680043.9.7134"

CT_IMAGE = "1.2.840.10008.5.1.4.1.1.2"
MR_IMAGE = "1.2.840.10008.5.1.4.1.1.4"
US_IMAGE = "1.2.840.10008.5.1.4.1.1.6.1"
PET_IMAGE = "1.2.840.10008.5.1.4.1.1.128"
SC_IMAGE = "1.2.840.10008.5.1.4.1.1.7"
ENCAPSULATED_PDF = "1.2.840.10008.5.1.4.1.1.104.1"

_SYLLABLES = ["ka", "vro", "lin", "tes", "sa", "ly", "mor", "du", "ven", "qui", "zar", "pel",
              "thu", "nix", "bor", "gal", "wen", "dra", "sko", "ful", "rim", "hax", "jo", "ple"]


def _name(rng: random.Random, syllables: int = 3) -> str:
    return "".join(rng.choice(_SYLLABLES) for _ in range(syllables)).capitalize() + rng.choice("QXZ")


def _digits(rng: random.Random, n: int) -> str:
    return str(rng.randrange(10 ** (n - 1), 10 ** n))


def uid(rng: random.Random) -> str:
    return f"{ORG_ROOT}.{rng.randrange(10 ** 8, 10 ** 9)}.{rng.randrange(10 ** 11, 10 ** 12)}"


@dataclass
class Patient:
    key: str
    family: str
    given: str
    mrn: str
    other_id: str
    birth_date: str
    sex: str
    age: str
    mother: str
    street: str
    phone: str
    email: str

    @property
    def pn(self) -> str:
        return f"{self.family}^{self.given}"

    def tokens(self) -> list[str]:
        return [self.family, self.given, self.mrn, self.other_id, self.mother, self.street, self.phone, self.email]


def make_patient(seed: int) -> Patient:
    rng = random.Random(f"patient-{seed}")
    y, m, d = rng.randrange(1930, 2000), rng.randrange(1, 13), rng.randrange(1, 29)
    family, given = _name(rng), _name(rng, 2)
    return Patient(
        key=str(seed), family=family, given=given, mrn="MRN" + _digits(rng, 8), other_id="OID" + _digits(rng, 7),
        birth_date=f"{y:04d}{m:02d}{d:02d}", sex=rng.choice("MF"), age=f"{2023 - y:03d}Y",
        mother=_name(rng), street=f"{_name(rng)} Lane {rng.randrange(10, 99)}",
        phone=f"555-{_digits(rng, 3)}-{_digits(rng, 4)}", email=f"{given.lower()}.{family.lower()}@mailhost.example",
    )


@dataclass
class SyntheticFile:
    name: str  # relative input path (deliberately identifying)
    file: FileObject
    tokens: list[str] = field(default_factory=list)
    patient: Patient | None = None
    modality: str = ""

    def encode(self) -> bytes:
        return serialize(self.file)


def _t(group, element, vr, value) -> Element:
    return text_element((group, element), vr, value)


def _meta(sop_class: str, sop_instance: str, ts: str) -> DataSet:
    meta = DataSet()
    meta.add(Element(Tag(0x0002, 0x0000), "UL", b"\0\0\0\0"))
    meta.add(Element(Tag(0x0002, 0x0001), "OB", b"\x00\x01"))
    meta.add(_t(0x0002, 0x0002, "UI", sop_class))
    meta.add(_t(0x0002, 0x0003, "UI", sop_instance))
    meta.add(_t(0x0002, 0x0010, "UI", ts))
    meta.add(_t(0x0002, 0x0012, "UI", ORG_ROOT + ".1"))
    meta.add(_t(0x0002, 0x0013, "SH", "SYNTH_1"))
    meta.add(_t(0x0002, 0x0016, "AE", "SCANNER01"))
    return meta


def _preamble(tokens) -> bytes:
    """TIFF-looking preamble with readable strings in it."""
    text = "|".join(tokens).encode("latin-1")
    return (b"II*\x00\x08\x00\x00\x00" + text)[:128].ljust(128, b"\x00")


def _private_block(group: int, block: int, creator: str, items: list[tuple[int, str, str]]) -> list[Element]:
    out = [_t(group, block, "LO", creator)]
    for low, vr, value in items:
        out.append(_t(group, (block << 8) | low, vr, value))
    return out


def _code_item(value: str, scheme: str, meaning: str) -> DataSet:
    return DataSet([_t(0x0008, 0x0100, "SH", value), _t(0x0008, 0x0102, "SH", scheme),
                    _t(0x0008, 0x0104, "LO", meaning)])


def _pixels(rng: np.random.Generator, rows: int, cols: int, bits: int, samples: int = 1) -> bytes:
    if bits == 16:
        arr = rng.integers(0, 4096, size=(rows, cols, samples), dtype=np.uint16)
        return arr.astype("<u2").tobytes()
    # never 0, so a black fill is visible in every sample it touches
    arr = rng.integers(1, 256, size=(rows, cols, samples), dtype=np.uint8)
    return arr.tobytes()


def _jpeg_frame(rng: np.random.Generator, rows: int, cols: int, tokens) -> bytes:
    by, bx = -(-rows // 8), -(-cols // 8)
    coef = np.zeros((by, bx, 64), dtype=np.int32)
    coef[..., 0] = rng.integers(-30, 30, size=(by, bx))
    coef[..., 1:6] = rng.integers(-4, 5, size=(by, bx, 5))
    app = [
        Segment(0xE1, b"Exif\x00\x00II*\x00" + " ".join(tokens[:2]).encode()),
        Segment(0xEB, b"JP\x00\x01" + tokens[2].encode()),
        Segment(0xFE, ("scanned by " + " ".join(tokens[3:])).encode()),
    ]
    return encode_coefficients([coef], cols, rows, app_segments=app)


def make_corpus_file(index: int, modality: str | None = None, patients: int = 40,
                     transfer_syntax: str | None = None) -> SyntheticFile:
    """One file with at least 30 planted tokens spread over every hiding place."""
    rng = random.Random(f"file-{index}")
    nprng = np.random.default_rng(index)
    patient = make_patient(index % patients)
    modality = modality or ("CT", "MR", "US", "PT")[index % 4]
    prng = random.Random(f"study-{patient.key}-{index // (patients * 4)}")
    study_uid = uid(prng)
    accession = "ACC" + _digits(prng, 8)
    study_id = "SID" + _digits(prng, 5)

    referring, performing, operator = _name(rng), _name(rng), _name(rng)
    institution = f"{_name(rng)} Memorial Hospital"
    inst_addr = f"{_name(rng)} Road {rng.randrange(100, 999)}"
    station = "ST" + _name(rng).upper()[:8]
    dept = f"{_name(rng)} Imaging"
    requester, reader = _name(rng), _name(rng)
    serial = "SN" + _digits(rng, 9)
    admission = "ADM" + _digits(rng, 7)
    protocol_note = _name(rng)
    mrn2 = "PMRN" + _digits(rng, 7)
    curve_note = _name(rng)
    overlay_note = _name(rng)
    trailing = "TRL" + _digits(rng, 8)
    sched_id = "SPS" + _digits(rng, 6)
    req_id = "RQP" + _digits(rng, 6)
    preamble_tok = "PRE" + _digits(rng, 8)
    nested_name = _name(rng)
    relocated = "REL" + _digits(rng, 7)
    un_token = "UNK" + _digits(rng, 7)
    tokens = patient.tokens() + [
        accession, study_id, referring, performing, operator, institution.split()[0], inst_addr.split()[0],
        station, dept.split()[0], requester, reader, serial, admission, protocol_note, mrn2, curve_note,
        overlay_note, trailing, sched_id, req_id, preamble_tok, nested_name, relocated, un_token,
    ]

    sop_class = {"CT": CT_IMAGE, "MR": MR_IMAGE, "US": US_IMAGE, "PT": PET_IMAGE}[modality]
    series_uid = uid(random.Random(f"series-{study_uid}-{modality}"))
    sop_uid = uid(rng)
    frame_uid = uid(random.Random(f"for-{study_uid}"))
    study_date = f"20{rng.randrange(10, 23):02d}{rng.randrange(1, 13):02d}{rng.randrange(1, 29):02d}"
    study_time = f"{rng.randrange(7, 18):02d}{rng.randrange(0, 60):02d}{rng.randrange(0, 60):02d}"

    if modality == "US":
        rows, cols, bits, manu, model = 480, 640, 8, "ACME Medical", "SONO 5000"
    elif modality == "PT":
        rows, cols, bits, manu, model = 32, 32, 16, "Positron Works", "PETRA"
    elif modality == "MR":
        rows, cols, bits, manu, model = 48, 48, 16, "SIEMENS", "Avanto"
    else:
        rows, cols, bits, manu, model = 48, 64, 16, "GE MEDICAL SYSTEMS", "LightSpeed"

    if transfer_syntax is None:
        transfer_syntax = {0: syntax.EXPLICIT_LE, 1: syntax.IMPLICIT_LE, 2: syntax.EXPLICIT_BE,
                           3: syntax.EXPLICIT_LE, 4: syntax.JPEG_BASELINE}[index % 5]
        if modality == "US" and transfer_syntax == syntax.JPEG_BASELINE:
            transfer_syntax = syntax.EXPLICIT_LE
    jpeg = transfer_syntax == syntax.JPEG_BASELINE
    if jpeg:
        bits = 8

    ds = DataSet()
    add = ds.add
    add(_t(0x0008, 0x0005, "CS", "ISO_IR 100"))
    add(_t(0x0008, 0x0008, "CS", ["ORIGINAL", "PRIMARY", "AXIAL"]))
    add(_t(0x0008, 0x0016, "UI", sop_class))
    add(_t(0x0008, 0x0018, "UI", sop_uid))
    add(_t(0x0008, 0x0020, "DA", study_date))
    add(_t(0x0008, 0x0021, "DA", study_date))
    add(_t(0x0008, 0x0023, "DA", study_date))
    add(_t(0x0008, 0x0030, "TM", study_time))
    add(_t(0x0008, 0x0031, "TM", study_time))
    add(_t(0x0008, 0x0033, "TM", study_time))
    add(_t(0x0008, 0x0050, "SH", accession))
    add(_t(0x0008, 0x0060, "CS", modality))
    add(_t(0x0008, 0x0070, "LO", manu))
    add(_t(0x0008, 0x0080, "LO", institution))
    add(_t(0x0008, 0x0081, "ST", inst_addr + ", Springfield"))
    add(_t(0x0008, 0x0090, "PN", f"{referring}^Alan"))
    add(_t(0x0008, 0x0092, "ST", f"{referring} office, {patient.phone}"))
    add(_t(0x0008, 0x1010, "SH", station))
    add(_t(0x0008, 0x1030, "LO", f"CHEST {patient.family}"))
    add(_t(0x0008, 0x103E, "LO", f"AXIAL for {patient.given}"))
    add(_t(0x0008, 0x1040, "LO", dept))
    add(_t(0x0008, 0x1048, "PN", f"{requester}^Beth"))
    add(_t(0x0008, 0x1050, "PN", f"{performing}^Carl"))
    add(_t(0x0008, 0x1060, "PN", f"{reader}^Dana"))
    add(_t(0x0008, 0x1070, "PN", f"{operator}^Eve"))
    add(_t(0x0008, 0x1090, "LO", model))
    add(sequence_element((0x0008, 0x1032), [_code_item("71020", "CPT4", "CHEST XRAY")]))
    add(sequence_element((0x0008, 0x1140), [DataSet([
        _t(0x0008, 0x1150, "UI", sop_class), _t(0x0008, 0x1155, "UI", uid(rng))])]))
    add(_t(0x0010, 0x0010, "PN", patient.pn))
    add(_t(0x0010, 0x0020, "LO", patient.mrn))
    add(_t(0x0010, 0x0021, "LO", "HOSP"))
    add(_t(0x0010, 0x0030, "DA", patient.birth_date))
    add(_t(0x0010, 0x0040, "CS", patient.sex))
    add(_t(0x0010, 0x1000, "LO", patient.other_id))
    add(sequence_element((0x0010, 0x1002), [DataSet([
        _t(0x0010, 0x0020, "LO", mrn2), _t(0x0010, 0x0021, "LO", "OTHERHOSP")])]))
    add(_t(0x0010, 0x1010, "AS", patient.age))
    add(_t(0x0010, 0x1040, "LO", patient.street))
    add(_t(0x0010, 0x1060, "PN", f"{patient.mother}^Mary"))
    add(_t(0x0010, 0x2154, "SH", patient.phone))
    add(_t(0x0010, 0x21B0, "LT", f"History per {patient.given} {patient.family}; contact {patient.email}"))
    add(_t(0x0010, 0x4000, "LT", f"MRN {patient.mrn} seen by {referring}"))
    add(_t(0x0018, 0x1000, "LO", serial))
    add(_t(0x0018, 0x1030, "LO", f"PROTO {protocol_note}"))
    add(_t(0x0020, 0x000D, "UI", study_uid))
    add(_t(0x0020, 0x000E, "UI", series_uid))
    add(_t(0x0020, 0x0010, "SH", study_id))
    add(_t(0x0020, 0x0011, "IS", str(index % 7 + 1)))
    add(_t(0x0020, 0x0013, "IS", str(index + 1)))
    add(_t(0x0020, 0x0052, "UI", frame_uid))
    add(_t(0x0020, 0x4000, "LT", f"Image of {patient.family} acquired by {operator}"))
    add(_t(0x0038, 0x0010, "LO", admission))
    add(sequence_element((0x0040, 0x0275), [DataSet([
        _t(0x0008, 0x0050, "SH", accession),
        _t(0x0032, 0x1032, "PN", f"{nested_name}^Fay"),
        _t(0x0040, 0x0009, "SH", sched_id),
        _t(0x0040, 0x1001, "SH", req_id),
    ])]))
    # a kept sequence whose items still hold identifying children
    add(sequence_element((0x0018, 0xA001), [DataSet([
        _t(0x0008, 0x0070, "LO", "Vendor"),
        _t(0x0008, 0x1070, "PN", f"{nested_name}^Gus"),
        _t(0x0008, 0x0080, "LO", institution),
    ])]))
    # curves and overlays
    add(_t(0x5000, 0x2500, "LO", f"curve {curve_note}"))
    add(_t(0x6000, 0x0022, "LO", f"overlay {overlay_note}"))

    # private blocks, one of them at a relocated block number
    block = 0x10 if index % 2 == 0 else 0x43
    for el in _private_block(0x0009, block, "ACME PRIVATE", [
            (0x01, "LO", patient.mrn), (0x02, "PN", patient.pn), (0x03, "LO", relocated)]):
        add(el)
    if modality == "MR":
        for el in _private_block(0x0019, 0x10, "SIEMENS MR HEADER", [
                (0x08, "CS", "IMAGE NUM 4"), (0x0B, "DS", "42.5"), (0x50, "LO", mrn2)]):
            add(el)
    add(Element(Tag(0x0029, 0x0010), "LO", b"UNKNOWNVEND "))
    add(Element(Tag(0x0029, 0x1001), "UN", un_token.encode() + b" "))
    # private element inside a kept sequence item
    ds[Tag(0x0008, 0x1140)].items[0].add(_t(0x0011, 0x0010, "LO", "ACME NESTED"))
    ds[Tag(0x0008, 0x1140)].items[0].add(_t(0x0011, 0x1001, "LO", patient.other_id))

    if modality == "PT":
        add(sequence_element((0x0054, 0x0016), [DataSet([
            _t(0x0018, 0x1072, "TM", "083000"),
            _t(0x0018, 0x1078, "DT", study_date + "083000"),
            _t(0x0018, 0x1074, "DS", "370000000"),
        ])]))
        add(_t(0x0054, 0x1001, "CS", "BQML"))

    # image pixel module
    samples = 1
    add(numeric_element((0x0028, 0x0002), "US", [samples]))
    add(_t(0x0028, 0x0004, "CS", "MONOCHROME2"))
    add(numeric_element((0x0028, 0x0010), "US", [rows]))
    add(numeric_element((0x0028, 0x0011), "US", [cols]))
    add(numeric_element((0x0028, 0x0100), "US", [bits]))
    add(numeric_element((0x0028, 0x0101), "US", [bits if bits == 8 else 12]))
    add(numeric_element((0x0028, 0x0102), "US", [bits - 1 if bits == 8 else 11]))
    add(numeric_element((0x0028, 0x0103), "US", [0]))
    if jpeg:
        frame = _jpeg_frame(nprng, rows, cols, [preamble_tok, trailing, relocated, patient.family, patient.mrn])
        add(Element(Tag(0x7FE0, 0x0010), "OB", build_fragments([frame], False), undefined_length=True))
    else:
        vr = "OW" if bits == 16 else "OB"
        add(Element(Tag(0x7FE0, 0x0010), vr, _pixels(nprng, rows, cols, bits, samples)))
    add(Element(Tag(0xFFFC, 0xFFFC), "OB", (trailing + " " + patient.mrn).encode().ljust(32, b"\x00")))

    fo = FileObject(preamble=_preamble([preamble_tok, patient.family, patient.mrn]),
                    meta=_meta(sop_class, sop_uid, transfer_syntax), body=ds, transfer_syntax=transfer_syntax)
    name = f"{patient.family}_{patient.mrn}/{modality}_{accession}_{index:04d}.dcm"
    return SyntheticFile(name, fo, sorted(set(tokens)), patient, modality)


def make_corpus(n: int = 200, patients: int = 40) -> list[SyntheticFile]:
    return [make_corpus_file(i, patients=patients) for i in range(n)]


def write_corpus(files: list[SyntheticFile], root: str | Path) -> list[Path]:
    root = Path(root)
    out = []
    for sf in files:
        path = root / sf.name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(sf.encode())
        out.append(path)
    return out


# -- fixtures for specific properties --------------------------------------------

def make_reference_study(seed: int = 0) -> tuple[list[FileObject], int]:
    """Localizer, three axials and a derived image with 12 cross-references.

    Returns the files and the number of references: 3 axial->localizer,
    3 localizer->axial, 2 derived->axial source images, 4 frame-of-reference
    memberships shared with the localizer.
    """
    rng = random.Random(f"refstudy-{seed}")
    study, frame = uid(rng), uid(rng)
    series_loc, series_ax, series_der = uid(rng), uid(rng), uid(rng)
    loc, axials, derived = uid(rng), [uid(rng) for _ in range(3)], uid(rng)
    patient = make_patient(1000 + seed)

    def base(sop, series, extra):
        ds = DataSet([
            _t(0x0008, 0x0016, "UI", CT_IMAGE), _t(0x0008, 0x0018, "UI", sop),
            _t(0x0008, 0x0060, "CS", "CT"),
            _t(0x0010, 0x0010, "PN", patient.pn), _t(0x0010, 0x0020, "LO", patient.mrn),
            _t(0x0020, 0x000D, "UI", study), _t(0x0020, 0x000E, "UI", series),
            _t(0x0020, 0x0052, "UI", frame),
        ])
        for el in extra:
            ds.add(el)
        return FileObject(b"\x00" * 128, _meta(CT_IMAGE, sop, syntax.EXPLICIT_LE), ds, syntax.EXPLICIT_LE)

    def refs(tag, uids):
        return sequence_element(tag, [DataSet([_t(0x0008, 0x1150, "UI", CT_IMAGE), _t(0x0008, 0x1155, "UI", u)])
                                      for u in uids])

    files = [base(loc, series_loc, [refs((0x0008, 0x1140), axials)])]
    files += [base(a, series_ax, [refs((0x0008, 0x1140), [loc])]) for a in axials]
    files.append(base(derived, series_der, [refs((0x0008, 0x2112), axials[:2])]))
    return files, 12


def make_midnight_fixture() -> DataSet:
    """Acquisition starting 23:59:00 and content at 00:01:00 the next day: 120 s apart."""
    return DataSet([
        _t(0x0008, 0x0022, "DA", "20200314"), _t(0x0008, 0x0032, "TM", "235900"),
        _t(0x0008, 0x0023, "DA", "20200315"), _t(0x0008, 0x0033, "TM", "000100"),
    ])


def make_pet_fixture() -> DataSet:
    """Injection at 08:30:15, series at 09:32:47 (3752 s later)."""
    return DataSet([
        _t(0x0008, 0x0021, "DA", "20210606"), _t(0x0008, 0x0031, "TM", "093247"),
        _t(0x0010, 0x0020, "LO", "PETPATIENT1"),
        sequence_element((0x0054, 0x0016), [DataSet([
            _t(0x0018, 0x1072, "TM", "083015"),
            _t(0x0018, 0x1078, "DT", "20210606083015"),
        ])]),
    ])


def make_us_file(matched: bool = True, seed: int = 0) -> FileObject:
    """8-bit 640x480 ultrasound; ``matched`` selects a vendor covered by a shipped template."""
    sf = make_corpus_file(4 * seed + 2, modality="US", transfer_syntax=syntax.EXPLICIT_LE)
    if not matched:
        sf.file.body[Tag(0x0008, 0x0070)] = _t(0x0008, 0x0070, "LO", "NOMATCH Ultrasonics")
    return sf.file


def quarantinable_pdf(seed: int = 0) -> FileObject:
    rng = random.Random(f"pdf-{seed}")
    sop = uid(rng)
    ds = DataSet([_t(0x0008, 0x0016, "UI", ENCAPSULATED_PDF), _t(0x0008, 0x0018, "UI", sop),
                  _t(0x0010, 0x0010, "PN", "Pdf^Patient"), _t(0x0010, 0x0020, "LO", "PDFMRN" + _digits(rng, 6)),
                  Element(Tag(0x0042, 0x0011), "OB", b"%PDF-1.4 fake\n")])
    return FileObject(b"\x00" * 128, _meta(ENCAPSULATED_PDF, sop, syntax.EXPLICIT_LE), ds, syntax.EXPLICIT_LE)


def baseline_jpeg_with_metadata(seed: int, rows: int = 32, cols: int = 48) -> bytes:
    """Coefficient-controlled baseline JPEG with APP1, APP11 and COM segments."""
    rng = np.random.default_rng(seed)
    tokens = [f"EXIF{seed:04d}", f"GPS{seed:04d}", f"JUMBF{seed:04d}", f"COMMENT{seed:04d}"]
    return _jpeg_frame(rng, rows, cols, tokens)


__all__ = [
    "Patient", "SyntheticFile", "baseline_jpeg_with_metadata", "make_corpus", "make_corpus_file",
    "make_midnight_fixture", "make_patient", "make_pet_fixture", "make_reference_study", "make_us_file",
    "quarantinable_pdf", "uid", "write_corpus",
]
