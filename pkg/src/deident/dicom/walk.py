"""Depth-first traversal with edit directives.

A path is a tuple alternating tags and item indices, ending with the tag of
the visited element: ``(Tag(0008,1140), 0, Tag(0008,1155))``.
"""

from __future__ import annotations

from typing import Callable, Iterator, Union

from .dataset import DataSet, Element
from .tag import Tag

Path = tuple


class _Remove:
    def __repr__(self) -> str:
        return "REMOVE"


REMOVE = _Remove()

Directive = Union[None, _Remove, Element]
Visitor = Callable[[Path, Element], Directive]


def walk(ds: DataSet, visitor: Visitor, copy: bool = True) -> DataSet:
    """Visit every element at every depth and apply the visitor's edits.

    Returning None keeps the element, ``REMOVE`` drops it (and its subtree),
    and an Element replaces it. Children of a kept or replaced sequence are
    visited after the sequence itself. The input is left untouched unless
    ``copy`` is False.
    """
    return _walk(ds.copy() if copy else ds, visitor, ())


def _walk(ds: DataSet, visitor: Visitor, prefix: Path) -> DataSet:
    out: list[Element] = []
    for el in ds:
        path = prefix + (el.tag,)
        result = visitor(path, el)
        if result is REMOVE:
            continue
        if result is not None:
            el = result
        if el.is_sequence:
            el.value = [_walk(item, visitor, path + (i,)) for i, item in enumerate(el.items)]
        out.append(el)
    result_ds = DataSet(undefined_length=ds.undefined_length)
    for el in sorted(out, key=lambda e: e.tag):
        result_ds.add(el)
    return result_ds


def iter_elements(ds: DataSet, prefix: Path = ()) -> Iterator[tuple[Path, Element]]:
    """Yield ``(path, element)`` for every element, pre-order."""
    for el in ds:
        path = prefix + (el.tag,)
        yield path, el
        if el.is_sequence:
            for i, item in enumerate(el.items):
                yield from iter_elements(item, path + (i,))


def format_path(path: Path) -> str:
    parts = []
    for p in path:
        if isinstance(p, Tag):
            parts.append(f"{p.group:04X},{p.element:04X}")
        else:
            parts[-1] += f"[{p}]"
    return "/".join(parts)
