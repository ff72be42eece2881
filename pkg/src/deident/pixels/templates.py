"""Burned-in text templates keyed on modality, vendor, model and matrix size."""

from __future__ import annotations

from dataclasses import dataclass
from fnmatch import fnmatchcase
from importlib import resources
from pathlib import Path

from ..dicom.dataset import DataSet
from ..dicom.tag import Tag

Rect = tuple  # (x, y, w, h)

ROWS, COLUMNS = Tag(0x0028, 0x0010), Tag(0x0028, 0x0011)
MODALITY, MANUFACTURER, MODEL = Tag(0x0008, 0x0060), Tag(0x0008, 0x0070), Tag(0x0008, 0x1090)


class TemplateError(ValueError):
    pass


@dataclass(frozen=True)
class RedactionTemplate:
    modality: str
    manufacturer: str
    model: str
    rows: int
    columns: int
    regions: tuple
    fill: str = "BLACK"
    name: str = ""

    def __post_init__(self):
        if not self.regions:
            raise TemplateError(f"template {self.name or self.modality} has no regions")
        if self.fill not in ("BLACK", "MIDGRAY"):
            raise TemplateError(f"unknown fill {self.fill!r}")
        for x, y, w, h in self.regions:
            if x < 0 or y < 0 or w <= 0 or h <= 0 or x + w > self.columns or y + h > self.rows:
                raise TemplateError(f"region {(x, y, w, h)} outside {self.columns}x{self.rows}")

    def matches(self, modality: str, manufacturer: str, model: str, rows: int, columns: int) -> bool:
        return (self.modality == modality and rows == self.rows and columns == self.columns
                and fnmatchcase(manufacturer.upper(), self.manufacturer.upper())
                and fnmatchcase(model.upper(), self.model.upper()))


def parse_templates(text: str) -> list[RedactionTemplate]:
    """Tab-delimited: name modality manufacturer model rows columns fill regions.

    Regions are ``x,y,w,h`` joined by ``;``.
    """
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        fields = raw.split("\t")
        if len(fields) != 8:
            raise TemplateError(f"line {lineno}: expected 8 fields, got {len(fields)}")
        name, modality, manu, model, rows, cols, fill, regions = fields
        try:
            rects = tuple(tuple(int(v) for v in r.split(",")) for r in regions.split(";") if r.strip())
            out.append(RedactionTemplate(modality, manu, model, int(rows), int(cols), rects, fill, name))
        except ValueError as exc:
            raise TemplateError(f"line {lineno}: {exc}") from None
    return out


def load_templates(source: str | Path | None = None) -> list[RedactionTemplate]:
    if source is None:
        text = resources.files("deident.pixels").joinpath("data/templates.tsv").read_text()
    else:
        text = Path(source).read_text()
    return parse_templates(text)


def union_rectangles(rects) -> list[Rect]:
    """Disjoint rectangles covering exactly the union of ``rects``."""
    rects = [r for r in rects if r[2] > 0 and r[3] > 0]
    if not rects:
        return []
    ys = sorted({y for _, y, _, h in rects} | {y + h for _, y, _, h in rects})
    out: list[Rect] = []
    open_bands: dict[tuple[int, int], int] = {}  # (x0, x1) -> band start y
    for y0, y1 in zip(ys, ys[1:]):
        spans = sorted((x, x + w) for x, y, w, h in rects if y <= y0 and y + h >= y1)
        merged: list[list[int]] = []
        for a, b in spans:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        current = {(a, b) for a, b in merged}
        for key in list(open_bands):
            if key not in current:
                start = open_bands.pop(key)
                out.append((key[0], start, key[1] - key[0], y0 - start))
        for key in current:
            open_bands.setdefault(key, y0)
    for key, start in open_bands.items():
        out.append((key[0], start, key[1] - key[0], ys[-1] - start))
    return sorted(out, key=lambda r: (r[1], r[0]))


def matching_templates(ds: DataSet, templates) -> list[RedactionTemplate]:
    rows, cols = ds.number(ROWS), ds.number(COLUMNS)
    if rows is None or cols is None:
        return []
    args = (ds.text(MODALITY), ds.text(MANUFACTURER), ds.text(MODEL), int(rows), int(cols))
    return [t for t in templates if t.matches(*args)]


def match_template(ds: DataSet, templates) -> list[Rect]:
    """Union of the regions of every matching template; empty when none match."""
    hits = matching_templates(ds, templates)
    return union_rectangles([r for t in hits for r in t.regions])
