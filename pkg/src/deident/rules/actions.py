from __future__ import annotations

from enum import Enum


class Action(str, Enum):
    REMOVE = "REMOVE"
    ZERO = "ZERO"
    DUMMY = "DUMMY"
    KEEP = "KEEP"
    CLEAN = "CLEAN"
    REMAP_UID = "REMAP_UID"
    TEMPORAL = "TEMPORAL"

    def __str__(self) -> str:
        return self.value


class OptionId(str, Enum):
    RetainLongitudinalFullDates = "RetainLongitudinalFullDates"
    RetainLongitudinalModifiedDates = "RetainLongitudinalModifiedDates"
    RetainPatientCharacteristics = "RetainPatientCharacteristics"
    RetainDeviceIdentity = "RetainDeviceIdentity"
    RetainInstitutionIdentity = "RetainInstitutionIdentity"
    RetainUIDs = "RetainUIDs"
    RetainSafePrivate = "RetainSafePrivate"
    CleanDescriptors = "CleanDescriptors"
    CleanPixelData = "CleanPixelData"
    CleanGraphics = "CleanGraphics"

    def __str__(self) -> str:
        return self.value


# Column order of the rule file; also the precedence among simultaneously
# active overrides on one row (first active column wins).
OPTION_ORDER = tuple(OptionId)
