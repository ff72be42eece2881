"""De-identification toolkit for DICOM collections."""

__version__ = "0.1.0"
