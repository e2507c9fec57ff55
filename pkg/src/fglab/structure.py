"""Structural invariants of tabled finite groups.

Series, soluble radical, socle, CSA, centralizer chains, Prüfer rank,
commutator width and related measurements.  Functions taking a group also
accept a :class:`SubgroupMask` where that makes sense, and treat it as a group
in its own right.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .groups import (
    DEFAULT_CAP, CapExceeded, FiniteGroup, SubgroupMask, center, centralizer,
    class_representatives, closure, conjugate_subgroup, element_orders, exponent,
    intersection, join, normal_closure, quotient,
)

PRUFER_EXACT_CAP = 256


def _as_mask(h: FiniteGroup | SubgroupMask) -> SubgroupMask:
    return h if isinstance(h, SubgroupMask) else SubgroupMask.full(h)


# series ---------------------------------------------------------------------


def commutator_subgroup(a: SubgroupMask, b: SubgroupMask, ambient: SubgroupMask) -> SubgroupMask:
    """``[A, B]``: normal closure in ``ambient = <A, B>`` of the generator commutators."""
    g = a.parent
    seed = [g.commutator(x, y) for x in a.generators for y in b.generators]
    return normal_closure(g, seed, within=ambient)


def derived_subgroup(h: FiniteGroup | SubgroupMask) -> SubgroupMask:
    h = _as_mask(h)
    return commutator_subgroup(h, h, h)


def derived_series(h: FiniteGroup | SubgroupMask) -> list[SubgroupMask]:
    """Terms ``H = H^(0) > H^(1) > ...`` down to the first repeated term."""
    cur = _as_mask(h)
    series = [cur]
    while True:
        nxt = derived_subgroup(cur)
        if nxt.size == cur.size:
            return series
        series.append(nxt)
        cur = nxt


def lower_central_series(h: FiniteGroup | SubgroupMask) -> list[SubgroupMask]:
    top = _as_mask(h)
    cur = top
    series = [cur]
    while True:
        nxt = commutator_subgroup(cur, top, top)
        if nxt.size == cur.size:
            return series
        series.append(nxt)
        cur = nxt


def is_soluble(h: FiniteGroup | SubgroupMask) -> bool:
    return derived_series(h)[-1].is_trivial


def derived_length(h: FiniteGroup | SubgroupMask) -> int | None:
    s = derived_series(h)
    return len(s) - 1 if s[-1].is_trivial else None


def nilpotency_class(h: FiniteGroup | SubgroupMask) -> int | None:
    s = lower_central_series(h)
    return len(s) - 1 if s[-1].is_trivial else None


def is_nilpotent(h: FiniteGroup | SubgroupMask) -> bool:
    return nilpotency_class(h) is not None


# normal structure -------------------------------------------------------------


def class_normal_closures(g: FiniteGroup) -> list[tuple[int, SubgroupMask]]:
    """``(rep, ncl(rep))`` for each conjugacy class representative."""
    cached = getattr(g, "_class_ncl", None)
    if cached is None:
        cached = [(x, normal_closure(g, [x])) for x in class_representatives(g)]
        g._class_ncl = cached
    return cached


def soluble_radical(g: FiniteGroup) -> SubgroupMask:
    """Largest soluble normal subgroup: the join of all soluble ``ncl(x)``."""
    g.require_table()
    parts = [n for _, n in class_normal_closures(g) if is_soluble(n)]
    return join(g, parts)


def normal_subgroups(g: FiniteGroup) -> list[SubgroupMask]:
    """All normal subgroups, as joins of single-class normal closures, by size."""
    found = {}
    for _, n in class_normal_closures(g):
        found.setdefault(n.key, n)
    frontier = list(found.values())
    base = list(frontier)
    while frontier:
        nxt = []
        for a in frontier:
            for b in base:
                if a <= b or b <= a:
                    continue
                j = join(g, [a, b])
                if j.key not in found:
                    found[j.key] = j
                    nxt.append(j)
        frontier = nxt
    return sorted(found.values(), key=lambda m: (m.size, m.ids.tolist()))


def minimal_normal_subgroups(g: FiniteGroup) -> list[SubgroupMask]:
    ncls = class_normal_closures(g)
    out: dict[bytes, SubgroupMask] = {}
    for x, n in ncls:
        if x == 0 or n.key in out:
            continue
        if all(m.key == n.key for y, m in ncls if y != 0 and y in n):
            out[n.key] = n
    return list(out.values())


def socle(g: FiniteGroup) -> SubgroupMask:
    return join(g, minimal_normal_subgroups(g))


def is_semisimple(g: FiniteGroup) -> bool:
    """No nontrivial abelian normal subgroup."""
    return all(not n.is_abelian for n in minimal_normal_subgroups(g))


@dataclass(frozen=True)
class CSAWitness:
    kind: str  # "nonabelian-centralizer" | "not-malnormal"
    x: int
    y: int | None = None


def csa_witness(g: FiniteGroup) -> CSAWitness | None:
    """First violation of: C(x) abelian and malnormal for every x != 1."""
    g.require_table()
    for x in class_representatives(g):
        if x == 0:
            continue
        c = centralizer(g, [x])
        if not c.is_abelian:
            return CSAWitness("nonabelian-centralizer", x)
        for y in np.flatnonzero(~c.members):
            if intersection(c, conjugate_subgroup(c, int(y))).size > 1:
                return CSAWitness("not-malnormal", x, int(y))
    return None


def is_csa(g: FiniteGroup) -> bool:
    return csa_witness(g) is None


def centralizer_subgroups(g: FiniteGroup) -> list[SubgroupMask]:
    """Centralizers of all subsets: element centralizers closed under intersection."""
    found = {}
    for x in range(g.order):
        c = centralizer(g, [x])
        found.setdefault(c.key, c)
    frontier = list(found.values())
    while frontier:
        nxt = []
        for a in frontier:
            for b in list(found.values()):
                c = intersection(a, b)
                if c.key not in found:
                    found[c.key] = c
                    nxt.append(c)
        frontier = nxt
    return list(found.values())


def c_dimension(g: FiniteGroup) -> int:
    """Number of strict steps in the longest chain of centralizers."""
    cents = sorted(centralizer_subgroups(g), key=lambda c: -c.size)
    longest = [0] * len(cents)
    for i, c in enumerate(cents):
        for j in range(i):
            if c < cents[j]:
                longest[i] = max(longest[i], longest[j] + 1)
    return max(longest)


# generation and rank ---------------------------------------------------------


def _classes_within(h: SubgroupMask) -> list[int]:
    g = h.parent
    T = g.table
    ids = h.ids
    seen = np.zeros(g.order, dtype=bool)
    reps = []
    for x in ids:
        if seen[x]:
            continue
        reps.append(int(x))
        seen[T[T[g.inverse[ids], x], ids]] = True
    return reps


def min_generators(h: FiniteGroup | SubgroupMask) -> int:
    """Least number of elements generating ``h``.

    Tuple sizes are tried in increasing order; the first generator runs over
    class representatives of ``h`` only, the rest over unordered choices.
    """
    h = _as_mask(h)
    g = h.parent
    if h.is_trivial:
        return 0
    if int(element_orders(g)[h.ids].max()) == h.size:
        return 1
    ids = h.ids.tolist()
    reps = _classes_within(h)
    for k in itertools.count(2):
        for first in reps:
            for rest in itertools.combinations(ids, k - 1):
                if closure(g, (first, *rest)).size == h.size:
                    return k


def subgroups_by_rank(g: FiniteGroup, cap: int = PRUFER_EXACT_CAP) -> dict[bytes, tuple[SubgroupMask, int]]:
    """Every subgroup with its minimal generating number.

    Breadth-first over one-element extensions from the trivial group: a
    subgroup first appears at depth ``d`` exactly when it needs ``d`` generators.
    """
    if g.order > cap:
        raise CapExceeded(f"subgroup enumeration of {g.description}", g.order, cap)
    T = g.require_table()
    triv = SubgroupMask.trivial(g)
    found = {triv.key: (triv, 0)}
    layer = [triv]
    depth = 0
    while layer:
        depth += 1
        nxt = []
        for k in layer:
            done = k.members.copy()
            kgens = k.generators
            for x in range(g.order):
                if done[x]:
                    continue
                done[T[k.ids, x]] = True  # <K, x> = <K, kx>
                s = closure(g, [*kgens, x])
                if s.key not in found:
                    found[s.key] = (s, depth)
                    nxt.append(s)
        layer = nxt
    return found


@dataclass(frozen=True)
class Measured:
    value: int
    exact: bool

    def to_json(self) -> dict[str, Any]:
        return {"value": self.value, "exact": self.exact}


def prufer_rank(g: FiniteGroup, mode: str = "exact", *, cap: int = PRUFER_EXACT_CAP,
                samples: int = 200, seed: int = 0) -> Measured:
    """Max over subgroups of the minimal generating number.

    ``sampled`` gives a lower bound from random subgroups (flagged inexact).
    """
    if mode == "exact":
        return Measured(max(d for _, d in subgroups_by_rank(g, cap).values()), True)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    rng = random.Random(seed)
    orders = element_orders(g)
    best = 0 if g.order == 1 else (1 if int(orders.max()) == g.order else 2)
    for _ in range(samples):
        t = rng.randint(1, 4)
        h = closure(g, [rng.randrange(g.order) for _ in range(t)])
        if h.size <= cap:
            best = max(best, min_generators(h))
    return Measured(best, False)


def max_k_generated(g: FiniteGroup, k: int, budget: int = 100_000, seed: int = 0) -> Measured:
    """Largest ``|<x_1..x_k>|``; exhaustive when the tuple count fits ``budget``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    reps = class_representatives(g)
    n = g.order
    count = len(reps) * math.comb(n + k - 2, k - 1)
    best = 1
    if count <= budget:
        for first in reps:
            for rest in itertools.combinations_with_replacement(range(n), k - 1):
                best = max(best, closure(g, (first, *rest)).size)
                if best == n:
                    return Measured(best, True)
        return Measured(best, True)
    rng = random.Random(seed)
    for _ in range(budget):
        best = max(best, closure(g, [rng.randrange(n) for _ in range(k)]).size)
        if best == n:
            break
    return Measured(best, best == n)


def all_commutators(g: FiniteGroup) -> np.ndarray:
    T = g.require_table()
    inv = g.inverse
    n = g.order
    seen = np.zeros(n, dtype=bool)
    allg = np.arange(n)
    step = max(1, 2_000_000 // max(n, 1))
    for start in range(0, n, step):
        xs = allg[start:start + step]
        c = T[T[np.ix_(inv[xs], inv)], T[xs]]
        seen[c.ravel()] = True
    return np.flatnonzero(seen)


def commutator_width(g: FiniteGroup) -> int:
    """Least w with every element of [G,G] a product of at most w commutators."""
    T = g.require_table()
    comms = all_commutators(g)
    d = derived_subgroup(g)
    if d.is_trivial:
        return 0
    reach = np.zeros(g.order, dtype=bool)
    reach[comms] = True
    w = 1
    while reach.sum() < d.size:
        reach[T[np.ix_(np.flatnonzero(reach), comms)].ravel()] = True
        w += 1
    return w


def nilpotent_by_abelian_by_index(g: FiniteGroup, c: int, f: int, cap: int = DEFAULT_CAP) -> bool:
    """Normal N <= M <= G with N of class <= c, M/N abelian, [G:M] <= f."""
    if g.order > cap:
        raise CapExceeded(f"normal subgroup scan of {g.description}", g.order, cap)
    for m in normal_subgroups(g):
        if g.order // m.size > f:
            continue
        cls = nilpotency_class(derived_subgroup(m))
        if cls is not None and cls <= c:
            return True
    return False


# report --------------------------------------------------------------------


def _mask_json(m: SubgroupMask) -> dict[str, Any]:
    return {"order": m.size, "ids": m.ids.tolist()}


@dataclass
class StructureReport:
    description: str
    order: int
    exponent: int
    is_abelian: bool
    is_nilpotent: bool
    is_soluble: bool
    nilpotency_class: int | None
    derived_length: int | None
    radical: SubgroupMask
    socle: SubgroupMask
    is_semisimple: bool
    is_csa: bool
    c_dimension: int
    min_generators: int
    prufer_rank: Measured
    commutator_width: int
    max_k_generated: dict[int, Measured] = field(default_factory=dict)
    radical_prufer_rank: Measured | None = None
    quotient_socle_index: int = 1

    def to_json(self) -> dict[str, Any]:
        return {
            "group": self.description,
            "order": self.order,
            "exponent": self.exponent,
            "is_abelian": self.is_abelian,
            "is_nilpotent": self.is_nilpotent,
            "is_soluble": self.is_soluble,
            "nilpotency_class": self.nilpotency_class,
            "derived_length": self.derived_length,
            "radical": _mask_json(self.radical),
            "socle": _mask_json(self.socle),
            "is_semisimple": self.is_semisimple,
            "is_csa": self.is_csa,
            "c_dimension": self.c_dimension,
            "min_generators": self.min_generators,
            "prufer_rank": self.prufer_rank.to_json(),
            "commutator_width": self.commutator_width,
            "max_k_generated": {str(k): v.to_json() for k, v in self.max_k_generated.items()},
            "radical_prufer_rank": None if self.radical_prufer_rank is None else self.radical_prufer_rank.to_json(),
            "quotient_socle_index": self.quotient_socle_index,
        }


def _subgroup_as_group(h: SubgroupMask) -> FiniteGroup:
    from .groups import from_table

    ids = h.ids
    index = np.full(h.parent.order, -1, dtype=np.int64)
    index[ids] = np.arange(ids.size)
    sub = index[h.parent.table[np.ix_(ids, ids)]]
    return from_table(sub, f"subgroup of {h.parent.description} (order {h.size})",
                      [int(index[x]) for x in h.generators])


def analyze(g: FiniteGroup, *, ks: tuple[int, ...] = (1, 2), budget: int = 20_000,
            prufer_cap: int = PRUFER_EXACT_CAP, seed: int = 0) -> StructureReport:
    g.require_table()
    rad = soluble_radical(g)
    mode = "exact" if g.order <= prufer_cap else "sampled"
    rad_group = _subgroup_as_group(rad)
    rad_mode = "exact" if rad.size <= prufer_cap else "sampled"
    top = quotient(g, rad)
    top_soc = socle(top)
    cls = nilpotency_class(g)
    return StructureReport(
        description=g.description,
        order=g.order,
        exponent=exponent(g),
        is_abelian=g.is_abelian,
        is_nilpotent=cls is not None,
        is_soluble=rad.is_full,
        nilpotency_class=cls,
        derived_length=derived_length(g),
        radical=rad,
        socle=socle(g),
        is_semisimple=is_semisimple(g),
        is_csa=is_csa(g),
        c_dimension=c_dimension(g),
        min_generators=min_generators(g),
        prufer_rank=prufer_rank(g, mode, cap=prufer_cap, seed=seed),
        commutator_width=commutator_width(g),
        max_k_generated={k: max_k_generated(g, k, budget, seed) for k in ks},
        radical_prufer_rank=prufer_rank(rad_group, rad_mode, cap=prufer_cap, seed=seed),
        quotient_socle_index=top.order // top_soc.size,
    )
