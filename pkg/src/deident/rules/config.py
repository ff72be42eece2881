"""Profile configuration read from an INI file."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple

from .actions import OptionId
from .errors import ConfigError


class CodedEntry(NamedTuple):
    value: str
    scheme: str
    meaning: str


OPTION_CODES = {
    OptionId.CleanPixelData: CodedEntry("113101", "DCM", "Clean Pixel Data Option"),
    OptionId.CleanGraphics: CodedEntry("113103", "DCM", "Clean Graphics Option"),
    OptionId.CleanDescriptors: CodedEntry("113105", "DCM", "Clean Descriptors Option"),
    OptionId.RetainLongitudinalFullDates: CodedEntry(
        "113106", "DCM", "Retain Longitudinal Temporal Information Full Dates Option"),
    OptionId.RetainLongitudinalModifiedDates: CodedEntry(
        "113107", "DCM", "Retain Longitudinal Temporal Information Modified Dates Option"),
    OptionId.RetainPatientCharacteristics: CodedEntry("113108", "DCM", "Retain Patient Characteristics Option"),
    OptionId.RetainDeviceIdentity: CodedEntry("113109", "DCM", "Retain Device Identity Option"),
    OptionId.RetainUIDs: CodedEntry("113110", "DCM", "Retain UIDs Option"),
    OptionId.RetainSafePrivate: CodedEntry("113111", "DCM", "Retain Safe Private Option"),
    OptionId.RetainInstitutionIdentity: CodedEntry("113112", "DCM", "Retain Institution Identity Option"),
}
BASIC_PROFILE = CodedEntry("113100", "DCM", "Basic Application Confidentiality Profile")

DEFAULT_QUARANTINE_SOP = (
    "1.2.840.10008.5.1.4.1.1.104.1",  # encapsulated PDF
    "1.2.840.10008.5.1.4.1.1.104.2",  # encapsulated CDA
    "1.2.840.10008.5.1.4.1.1.104.3",  # encapsulated STL
    "1.2.840.10008.5.1.4.1.1.104.4",  # encapsulated OBJ
    "1.2.840.10008.5.1.4.1.1.104.5",  # encapsulated MTL
    "1.2.840.10008.5.1.4.1.1.88.*",   # structured reports
)


@dataclass(frozen=True)
class ProfileConfig:
    options: frozenset = frozenset()
    pseudonym_policy: str = "PSEUDONYM"  # or DUMMY
    pseudonym_prefix: str = "ANON"
    dummy_pn: str = "REMOVED^REMOVED"
    dummy_text: str = "REMOVED"
    dummy_uid_root: str = "2.25"
    explicit_method_codes: tuple = ()
    quarantine_sop_classes: tuple = DEFAULT_QUARANTINE_SOP
    quarantine_conversion_types: frozenset = frozenset({"SD"})
    uid_mode: str = "MAP"
    uid_root: str = "2.25"
    uid_salt: bytes = b""
    offset_range_days: tuple = (-3650, -1)
    shift_times_too: bool = False
    age_topcode_years: int = 89
    age_bin: str = "NONE"
    text_mode: str = "REDACT_TOKEN"
    min_token_len: int = 3
    allowlist: frozenset = frozenset()
    # modality -> pass | quarantine | reject when no redaction template matches
    pixel_fallback: dict = field(default_factory=lambda: {"US": "quarantine", "SC": "quarantine", "*": "pass"})

    def __post_init__(self):
        opts = frozenset(OptionId(o) for o in self.options)
        object.__setattr__(self, "options", opts)
        if {OptionId.RetainLongitudinalFullDates, OptionId.RetainLongitudinalModifiedDates} <= opts:
            raise ConfigError("RetainLongitudinalFullDates and RetainLongitudinalModifiedDates are mutually exclusive")
        if self.uid_mode not in ("MAP", "HASH"):
            raise ConfigError(f"uid mode must be MAP or HASH, not {self.uid_mode!r}")
        if self.pseudonym_policy not in ("PSEUDONYM", "DUMMY"):
            raise ConfigError(f"unknown pseudonym policy {self.pseudonym_policy!r}")
        if self.text_mode not in ("REDACT_TOKEN", "DROP_VALUE"):
            raise ConfigError(f"unknown text mode {self.text_mode!r}")
        if self.age_bin not in ("NONE", "DECADE"):
            raise ConfigError(f"unknown age binning {self.age_bin!r}")
        lo, hi = self.offset_range_days
        if lo > hi:
            raise ConfigError("offset range minimum exceeds maximum")

    def has(self, option: OptionId) -> bool:
        return option in self.options

    @property
    def temporal_mode(self) -> str:
        if OptionId.RetainLongitudinalFullDates in self.options:
            return "RETAIN_FULL"
        if OptionId.RetainLongitudinalModifiedDates in self.options:
            return "SHIFT"
        return "REMOVE_ALL"

    @property
    def method_codes(self) -> tuple:
        if self.explicit_method_codes:
            return self.explicit_method_codes
        return (BASIC_PROFILE,) + tuple(OPTION_CODES[o] for o in OptionId if o in self.options and o in OPTION_CODES)

    def is_quarantined_sop(self, sop_class: str) -> bool:
        for entry in self.quarantine_sop_classes:
            if entry.endswith("*") and sop_class.startswith(entry[:-1]):
                return True
            if sop_class == entry:
                return True
        return False

    def fallback_for(self, modality: str, sop_class: str = "") -> str:
        if sop_class.startswith("1.2.840.10008.5.1.4.1.1.7") and "SC" in self.pixel_fallback:
            return self.pixel_fallback["SC"]
        return self.pixel_fallback.get(modality, self.pixel_fallback.get("*", "pass"))

    def replace(self, **changes) -> "ProfileConfig":
        from dataclasses import replace
        return replace(self, **changes)


def _list(value: str) -> list[str]:
    return [v.strip() for v in value.replace("\n", ",").split(",") if v.strip()]


def parse_config(text: str, base_dir: Path | None = None) -> ProfileConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep key case
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    kw: dict = {}
    try:
        if cp.has_section("profile"):
            sec = cp["profile"]
            if "options" in sec:
                try:
                    kw["options"] = frozenset(OptionId(o) for o in _list(sec["options"]))
                except ValueError as exc:
                    raise ConfigError(f"unknown option: {exc}") from None
            if "pseudonym_policy" in sec:
                kw["pseudonym_policy"] = sec["pseudonym_policy"].strip().upper()
            if "pseudonym_prefix" in sec:
                kw["pseudonym_prefix"] = sec["pseudonym_prefix"].strip()
        if cp.has_section("dummy"):
            sec = cp["dummy"]
            kw.update({k: sec[s].strip() for k, s in
                       (("dummy_pn", "pn"), ("dummy_text", "text"), ("dummy_uid_root", "uid_root")) if s in sec})
        if cp.has_section("uid"):
            sec = cp["uid"]
            if "mode" in sec:
                kw["uid_mode"] = sec["mode"].strip().upper()
            if "root" in sec:
                kw["uid_root"] = sec["root"].strip()
            if sec.get("salt", "").strip():
                kw["uid_salt"] = bytes.fromhex(sec["salt"].strip())
        if cp.has_section("temporal"):
            sec = cp["temporal"]
            lo = sec.getint("offset_min_days", -3650)
            hi = sec.getint("offset_max_days", -1)
            kw["offset_range_days"] = (lo, hi)
            kw["shift_times_too"] = sec.getboolean("shift_times", False)
            kw["age_topcode_years"] = sec.getint("age_topcode_years", 89)
            kw["age_bin"] = sec.get("age_bin", "NONE").strip().upper()
        if cp.has_section("text"):
            sec = cp["text"]
            kw["text_mode"] = sec.get("mode", "REDACT_TOKEN").strip().upper()
            kw["min_token_len"] = sec.getint("min_token_len", 3)
            path = sec.get("allowlist", "").strip()
            if path:
                p = Path(path)
                if not p.is_absolute() and base_dir is not None:
                    p = base_dir / p
                if not p.exists():
                    raise ConfigError(f"allowlist file not found: {p}")
                kw["allowlist"] = frozenset(
                    line.strip() for line in p.read_text().splitlines() if line.strip() and not line.startswith("#"))
        if cp.has_section("quarantine"):
            sec = cp["quarantine"]
            if "sop_classes" in sec:
                kw["quarantine_sop_classes"] = tuple(_list(sec["sop_classes"]))
            if "conversion_types" in sec:
                kw["quarantine_conversion_types"] = frozenset(_list(sec["conversion_types"]))
        if cp.has_section("pixels"):
            kw["pixel_fallback"] = {k: v.strip().lower() for k, v in cp["pixels"].items()}
            for v in kw["pixel_fallback"].values():
                if v not in ("pass", "quarantine", "reject"):
                    raise ConfigError(f"unknown pixel fallback {v!r}")
        if cp.has_section("method_codes"):
            codes = []
            for value, rest in cp["method_codes"].items():
                scheme, _, meaning = rest.partition("|")
                codes.append(CodedEntry(value.strip(), scheme.strip(), meaning.strip()))
            kw["explicit_method_codes"] = tuple(codes)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return ProfileConfig(**kw)


def load_config(path: str | Path | None = None) -> ProfileConfig:
    """Read a profile configuration; None gives the shipped defaults."""
    if path is None:
        text = resources.files("deident.rules").joinpath("data/default.ini").read_text()
        return parse_config(text)
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(), p.parent)
