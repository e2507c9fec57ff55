"""The standard test library of small groups."""

from __future__ import annotations

from typing import Iterator

from .groups import FiniteGroup, build
from .specs import parse_spec

LIBRARY = [
    *(f"cyclic({n})" for n in range(1, 13)),
    *(f"dihedral({n})" for n in range(3, 9)),
    "symmetric(3)", "symmetric(4)", "symmetric(5)",
    "alternating(4)", "alternating(5)", "alternating(6)",
    "quaternion8",
    "elementary_abelian(2, 2)", "elementary_abelian(2, 3)", "elementary_abelian(2, 4)",
    "elementary_abelian(3, 2)",
    "sl2(3)", "sl2(5)", "psl2(5)", "psl2(7)",
    "direct(cyclic(2), symmetric(3))", "direct(cyclic(3), symmetric(3))",
    "direct(symmetric(3), symmetric(3))", "direct(cyclic(2), alternating(4))",
    "direct(cyclic(2), quaternion8)", "direct(cyclic(2), alternating(5))",
    "direct(cyclic(6), alternating(5))",
    "wreath(cyclic(2), cyclic(2))", "wreath(cyclic(2), cyclic(3))", "wreath(cyclic(3), cyclic(2))",
    "wreath(cyclic(2), cyclic(4))", "wreath(symmetric(3), cyclic(2))",
    "perms(6; (0 1 2), (3 4 5), (0 3)(1 4)(2 5))",
]

_cache: dict[str, FiniteGroup] = {}


def library_group(spec: str) -> FiniteGroup:
    key = str(parse_spec(spec))
    if key not in _cache:
        _cache[key] = build(key)
    return _cache[key]


def library(max_order: int | None = None) -> Iterator[FiniteGroup]:
    for spec in LIBRARY:
        order = parse_spec(spec).order()
        if max_order is not None and order is not None and order > max_order:
            continue
        g = library_group(spec)
        if max_order is None or g.order <= max_order:
            yield g
