"""DICOM Part 10 codec: parse, model, walk, validate, serialize."""

from .dataset import DataSet, Element, FileObject, Fragments, numeric_element, sequence_element, text_element
from .errors import (
    BadMagic,
    DicomError,
    MalformedDataset,
    TruncatedStream,
    UnsupportedTransferSyntax,
    ValueTooLong,
)
from .parser import parse_file
from .tag import Tag, TagPattern
from .validate import Violation, is_valid_uid, validate_vr
from .walk import REMOVE, iter_elements, walk
from .writer import serialize

__all__ = [
    "BadMagic", "DataSet", "DicomError", "Element", "FileObject", "Fragments",
    "MalformedDataset", "REMOVE", "Tag", "TagPattern", "TruncatedStream",
    "UnsupportedTransferSyntax", "ValueTooLong", "Violation", "is_valid_uid",
    "iter_elements", "numeric_element", "parse_file", "sequence_element",
    "serialize", "text_element", "validate_vr", "walk",
]
