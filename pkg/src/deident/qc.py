"""Collection-wide pool of retained strings for human review."""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable

from .dicom.dataset import DataSet
from .dicom.vr import VR_SPECS
from .dicom.walk import iter_elements

HEADER = "# phrases: text values split on value boundaries and ^ / ; , (UI values excluded); count<TAB>phrase"
_SPLIT = re.compile(r"[\\^/;,]")


def phrases(value: str) -> list[str]:
    return [p.strip() for p in _SPLIT.split(value) if p.strip()]


def dataset_phrases(ds: DataSet) -> Counter:
    """Phrase multiset of one dataset; pooling is a plain Counter sum, so order never matters."""
    out: Counter = Counter()
    for _, el in iter_elements(ds):
        spec = VR_SPECS.get(el.vr)
        if spec is None or spec.kind != "text" or el.vr == "UI" or el.is_sequence:
            continue
        out.update(phrases(el.str_value))
    return out


def qc_string_pool(datasets: Iterable[DataSet]) -> list[tuple[int, str]]:
    """Sorted unique phrases with occurrence counts."""
    pool: Counter = Counter()
    for ds in datasets:
        pool.update(dataset_phrases(ds))
    return [(n, p) for p, n in sorted(pool.items())]


def format_pool(pool) -> str:
    return "\n".join([HEADER] + [f"{n}\t{p}" for n, p in pool]) + "\n"
