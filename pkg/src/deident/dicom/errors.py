class DicomError(Exception):
    """Base class for encoding and decoding failures."""


class TruncatedStream(DicomError):
    pass


class BadMagic(DicomError):
    pass


class UnsupportedTransferSyntax(DicomError):
    pass


class MalformedDataset(DicomError):
    pass


class ValueTooLong(DicomError):
    pass
