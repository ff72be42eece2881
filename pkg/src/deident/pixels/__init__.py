"""Pixel payload scrubbing."""

from .container import (UnsupportedPixelEncoding, build_fragments, frames_of, geometry_of, redact_pixels,
                        sanitize_container)
from .jpeg import (JpegStream, MalformedJpeg, MarkerPolicy, Segment, parse_jpeg, scrub_jpeg_bytes,
                   scrub_jpeg_markers)
from .jpegcodec import UnsupportedJpegMode, block_redact_jpeg, covering_blocks, encode_coefficients, read_frame
from .redact import Geometry, GeometryMismatch, fill_value, redact_uncompressed
from .templates import (RedactionTemplate, TemplateError, load_templates, match_template, matching_templates,
                        parse_templates, union_rectangles)

__all__ = [
    "Geometry", "GeometryMismatch", "JpegStream", "MalformedJpeg", "MarkerPolicy", "RedactionTemplate",
    "Segment", "TemplateError", "UnsupportedJpegMode", "UnsupportedPixelEncoding", "block_redact_jpeg",
    "build_fragments", "covering_blocks", "encode_coefficients", "fill_value", "frames_of", "geometry_of",
    "load_templates", "match_template", "matching_templates", "parse_jpeg", "parse_templates", "read_frame",
    "redact_pixels", "redact_uncompressed", "sanitize_container", "scrub_jpeg_bytes", "scrub_jpeg_markers",
    "union_rectangles",
]
