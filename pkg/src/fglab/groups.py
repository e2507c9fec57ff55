"""Concrete finite groups with dense element ids and subgroup masks.

Every tabled group numbers its elements ``0..order-1`` with ``0`` the identity
and keeps a full Cayley table, so products are single array lookups.  Large
symmetric and alternating groups are kept permutation-native instead: they
carry only generator permutations and support ball growth, nothing else.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Sequence

import numpy as np

from .perm import Permutation
from .specs import (
    PSL2, SL2, Alternating, Cyclic, Dihedral, Direct, ElementaryAbelian, GroupSpec,
    Perms, Quaternion8, SpecError, Symmetric, Wreath, parse_spec,
)

DEFAULT_CAP = 20_000
NATIVE_MIN_DEGREE = 8

TABLED = "cayley-table"
NATIVE = "permutation-native"


class CapExceeded(RuntimeError):
    """A construction or exact search would exceed its configured size cap."""

    def __init__(self, what: str, required: int | None, cap: int):
        self.required = required
        self.cap = cap
        need = "unknown" if required is None else str(required)
        super().__init__(f"{what}: required size {need} exceeds cap {cap}")


class NotNormal(ValueError):
    pass


class NeedsTable(TypeError):
    """Operation needs a Cayley table but the group is permutation-native."""


class FiniteGroup:
    def __init__(
        self,
        table: np.ndarray | None,
        generators: Sequence[Any],
        description: str,
        *,
        keys: Sequence[Hashable] | None = None,
        order: int | None = None,
        degree: int | None = None,
    ):
        self.description = description
        self.table = table
        self.keys = list(keys) if keys is not None else None
        self.degree = degree
        if table is None:
            # permutation-native: generators are Permutations
            self.backing = NATIVE
            self.order = int(order)
            self.generators = list(generators)
            self.inverse = None
            self._index = None
        else:
            self.backing = TABLED
            n = table.shape[0]
            self.order = n
            table.flags.writeable = False
            rows, cols = np.nonzero(table == 0)
            inv = np.empty(n, dtype=table.dtype)
            inv[rows] = cols
            inv.flags.writeable = False
            self.inverse = inv
            gens = sorted({int(x) for x in generators if int(x) != 0})
            self.generators = gens or [0]
            self._index = {k: i for i, k in enumerate(self.keys)} if self.keys is not None else None

    def __repr__(self) -> str:
        return f"<FiniteGroup {self.description} order={self.order} {self.backing}>"

    @property
    def is_tabled(self) -> bool:
        return self.backing == TABLED

    def require_table(self) -> np.ndarray:
        if self.table is None:
            raise NeedsTable(f"{self.description} is permutation-native; this needs a Cayley table")
        return self.table

    @property
    def identity(self) -> int:
        return 0

    def mul(self, a: int, b: int) -> int:
        return int(self.require_table()[a, b])

    def inv(self, a: int) -> int:
        self.require_table()
        return int(self.inverse[a])

    def elements(self) -> range:
        return range(self.order)

    def power(self, a: int, k: int) -> int:
        T = self.require_table()
        base = a if k >= 0 else int(self.inverse[a])
        out = 0
        for _ in range(abs(k)):
            out = int(T[out, base])
        return out

    def conj(self, a: int, g: int) -> int:
        """``g^-1 a g``."""
        T = self.require_table()
        return int(T[T[self.inverse[g], a], g])

    def commutator(self, a: int, b: int) -> int:
        """``[a, b] = a^-1 b^-1 a b``."""
        T = self.require_table()
        inv = self.inverse
        return int(T[T[inv[a], inv[b]], T[a, b]])

    @cached_property
    def is_abelian(self) -> bool:
        T = self.require_table()
        gens = self.generators
        return bool(np.array_equal(T[np.ix_(gens, gens)], T[np.ix_(gens, gens)].T))

    # element naming ---------------------------------------------------------

    def perm(self, a: int) -> Permutation:
        if self.degree is None or self.keys is None:
            raise TypeError(f"{self.description} has no permutation representation")
        return Permutation(self.keys[a])

    def id_of(self, key: Hashable) -> int:
        if isinstance(key, Permutation):
            key = key.images
        if self._index is None or key not in self._index:
            raise KeyError(f"{key!r} is not an element of {self.description}")
        return self._index[key]

    def format(self, a: int) -> str:
        if self.keys is None:
            return str(a)
        key = self.keys[a]
        if self.degree is not None:
            return str(Permutation(key))
        return str(key)

    def parse_element(self, text: str) -> Any:
        """An id (``"5"``) or, for permutation groups, cycle notation.

        Native groups return a :class:`Permutation`; tabled groups return an id.
        """
        text = text.strip()
        if text.lstrip("-").isdigit():
            if not self.is_tabled:
                raise ValueError("permutation-native groups take elements in cycle notation")
            a = int(text)
            if not 0 <= a < self.order:
                raise ValueError(f"element id {a} out of range for order {self.order}")
            return a
        if self.degree is None:
            raise ValueError(f"{self.description} elements are given by id")
        p = Permutation.parse(text, self.degree)
        if not self.is_tabled:
            return p
        return self.id_of(p)


def _tabulate(
    identity: Hashable,
    gens: Sequence[Hashable],
    mul: Callable[[Any, Any], Hashable],
    description: str,
    cap: int,
    degree: int | None = None,
) -> FiniteGroup:
    """Enumerate ``<gens>`` by breadth-first search and fill the Cayley table.

    Column ``j`` of the table is derived from its BFS parent: if
    ``k_j = k_p * s`` then ``x * k_j = (x * k_p) * s`` for every ``x``.
    """
    keys = [identity]
    index = {identity: 0}
    parent = [(-1, -1)]
    right: list[list[int]] = [[] for _ in gens]
    i = 0
    while i < len(keys):
        k = keys[i]
        for gi, s in enumerate(gens):
            prod = mul(k, s)
            j = index.get(prod)
            if j is None:
                j = len(keys)
                if j >= cap:
                    raise CapExceeded(f"enumerating {description}", None, cap)
                index[prod] = j
                keys.append(prod)
                parent.append((i, gi))
            right[gi].append(j)
        i += 1
    n = len(keys)
    dtype = np.int16 if n < 2**15 else np.int32
    rmaps = [np.asarray(r, dtype=dtype) for r in right]
    table = np.empty((n, n), dtype=dtype)
    table[:, 0] = np.arange(n, dtype=dtype)
    for j in range(1, n):
        p, gi = parent[j]
        table[:, j] = rmaps[gi][table[:, p]]
    gen_ids = [index[s] for s in gens]
    return FiniteGroup(table, gen_ids, description, keys=keys, degree=degree)


def _perm_mul(p: tuple[int, ...], q: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(q[i] for i in p)


def _cycle(degree: int, pts: Sequence[int]) -> tuple[int, ...]:
    return Permutation.from_cycles(degree, [pts]).images


def symmetric_generators(n: int) -> list[Permutation]:
    if n < 2:
        return [Permutation.identity(n)]
    gens = [Permutation(_cycle(n, [0, 1]))]
    if n > 2:
        gens.append(Permutation(_cycle(n, list(range(n)))))
    return gens


def alternating_generators(n: int) -> list[Permutation]:
    if n < 3:
        return [Permutation.identity(n)]
    gens = [Permutation(_cycle(n, [0, 1, 2]))]
    if n > 3:
        long = list(range(n)) if n % 2 else list(range(1, n))
        gens.append(Permutation(_cycle(n, long)))
    return gens


def _psl2_generators(p: int) -> list[tuple[int, ...]]:
    inf = p
    shift = tuple(list((x + 1) % p for x in range(p)) + [inf])
    flip = []
    for x in range(p):
        flip.append(inf if x == 0 else (-pow(x, -1, p)) % p)
    flip.append(0)
    return [shift, tuple(flip)]


def _quat_mul(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    return (
        a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
        a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
        a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
        a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
    )


def build(spec: GroupSpec | str, cap: int = DEFAULT_CAP, *, native: bool | None = None) -> FiniteGroup:
    """Realize a construction expression as a concrete group.

    ``native=None`` keeps symmetric/alternating groups of degree >= 8
    permutation-native; ``True``/``False`` forces the choice for those kinds.
    """
    if isinstance(spec, str):
        spec = parse_spec(spec)
    spec.validate()
    desc = str(spec)

    if isinstance(spec, (Symmetric, Alternating)):
        n = spec.n
        gens = symmetric_generators(n) if isinstance(spec, Symmetric) else alternating_generators(n)
        use_native = native if native is not None else n >= NATIVE_MIN_DEGREE
        if use_native:
            return FiniteGroup(None, gens, desc, order=spec.order(), degree=n)
        _check_cap(spec, cap)
        return _tabulate(tuple(range(n)), [g.images for g in gens], _perm_mul, desc, cap, degree=n)

    _check_cap(spec, cap)
    if isinstance(spec, Cyclic):
        n = spec.n
        return _tabulate(0, [1 % n], lambda a, b: (a + b) % n, desc, cap)
    if isinstance(spec, Dihedral):
        n = spec.n

        def dmul(a, b):
            (r1, s1), (r2, s2) = a, b
            return ((r1 + (r2 if s1 == 0 else -r2)) % n, s1 ^ s2)

        return _tabulate((0, 0), [(1 % n, 0), (0, 1)], dmul, desc, cap)
    if isinstance(spec, ElementaryAbelian):
        p, k = spec.p, spec.k
        units = [tuple(int(i == j) for i in range(k)) for j in range(k)]
        return _tabulate((0,) * k, units, lambda a, b: tuple((x + y) % p for x, y in zip(a, b)), desc, cap)
    if isinstance(spec, Quaternion8):
        return _tabulate((1, 0, 0, 0), [(0, 1, 0, 0), (0, 0, 1, 0)], _quat_mul, desc, cap)
    if isinstance(spec, PSL2):
        p = spec.p
        return _tabulate(tuple(range(p + 1)), _psl2_generators(p), _perm_mul, desc, cap, degree=p + 1)
    if isinstance(spec, SL2):
        p = spec.p

        def mmul(a, b):
            return ((a[0] * b[0] + a[1] * b[2]) % p, (a[0] * b[1] + a[1] * b[3]) % p,
                    (a[2] * b[0] + a[3] * b[2]) % p, (a[2] * b[1] + a[3] * b[3]) % p)

        return _tabulate((1, 0, 0, 1), [(1, 1, 0, 1), (0, p - 1, 1, 0)], mmul, desc, cap)
    if isinstance(spec, Perms):
        d = spec.degree
        gens = [g.images for g in spec.gens] or [tuple(range(d))]
        return _tabulate(tuple(range(d)), gens, _perm_mul, desc, cap, degree=d)
    if isinstance(spec, Direct):
        A = build(spec.left, cap, native=False)
        B = build(spec.right, cap, native=False)
        TA, TB = A.table, B.table
        gens = [(g, 0) for g in A.generators] + [(0, h) for h in B.generators]
        return _tabulate((0, 0), gens, lambda a, b: (int(TA[a[0], b[0]]), int(TB[a[1], b[1]])), desc, cap)
    if isinstance(spec, Wreath):
        A = build(spec.base, cap, native=False)
        B = build(spec.top, cap, native=False)
        TA, TB = A.table, B.table
        m = B.order

        def wmul(a, b):
            # (f, s)(g, t) = (x -> f(x) g(xs), st)
            f, s = a
            g, t = b
            shifted = TB[:, s]
            return (tuple(int(TA[f[x], g[shifted[x]]]) for x in range(m)), int(TB[s, t]))

        zero = (0,) * m
        gens = [(tuple(a if x == 0 else 0 for x in range(m)), 0) for a in A.generators]
        gens += [(zero, t) for t in B.generators]
        return _tabulate((zero, 0), gens, wmul, desc, cap)
    raise SpecError(f"cannot build {spec!r}")


def _check_cap(spec: GroupSpec, cap: int) -> None:
    order = spec.order()
    if order is not None and order > cap:
        raise CapExceeded(f"building {spec}", order, cap)


def from_table(table: Sequence[Sequence[int]] | np.ndarray, description: str = "table",
               generators: Sequence[int] | None = None) -> FiniteGroup:
    T = np.array(table)
    n = T.shape[0]
    dtype = np.int16 if n < 2**15 else np.int32
    T = T.astype(dtype)
    if generators is None:
        generators = list(range(1, n))
    return FiniteGroup(T, generators, description)


# subgroups ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SubgroupMask:
    parent: FiniteGroup
    members: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        self.members.flags.writeable = False

    @classmethod
    def from_ids(cls, parent: FiniteGroup, ids: Iterable[int]) -> SubgroupMask:
        m = np.zeros(parent.order, dtype=bool)
        m[np.fromiter(ids, dtype=np.int64)] = True
        return cls(parent, m)

    @classmethod
    def trivial(cls, parent: FiniteGroup) -> SubgroupMask:
        return cls.from_ids(parent, [0])

    @classmethod
    def full(cls, parent: FiniteGroup) -> SubgroupMask:
        return cls(parent, np.ones(parent.order, dtype=bool))

    @cached_property
    def size(self) -> int:
        return int(self.members.sum())

    def __len__(self) -> int:
        return self.size

    @cached_property
    def ids(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    def __contains__(self, a: int) -> bool:
        return bool(self.members[a])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubgroupMask):
            return NotImplemented
        return other.parent is self.parent and np.array_equal(self.members, other.members)

    def __hash__(self) -> int:
        return hash(self.key)

    @cached_property
    def key(self) -> bytes:
        return np.packbits(self.members).tobytes()

    def __le__(self, other: SubgroupMask) -> bool:
        return bool(np.all(other.members[self.members]))

    def __lt__(self, other: SubgroupMask) -> bool:
        return self <= other and self.size < other.size

    @property
    def is_trivial(self) -> bool:
        return self.size == 1

    @property
    def is_full(self) -> bool:
        return self.size == self.parent.order

    @cached_property
    def generators(self) -> list[int]:
        return generators_of(self)

    @cached_property
    def is_abelian(self) -> bool:
        T = self.parent.table
        g = self.generators
        sub = T[np.ix_(g, g)]
        return bool(np.array_equal(sub, sub.T))

    def __repr__(self) -> str:
        return f"<SubgroupMask of {self.parent.description} size={self.size}>"


def closure(parent: FiniteGroup, seed: Iterable[int]) -> SubgroupMask:
    """Smallest subgroup containing ``seed``."""
    T = parent.require_table()
    gens = np.unique(np.fromiter((int(s) for s in seed), dtype=np.int64))
    gens = gens[gens != 0]
    mask = np.zeros(parent.order, dtype=bool)
    mask[0] = True
    if gens.size == 0:
        return SubgroupMask(parent, mask)
    frontier = np.array([0])
    while frontier.size:
        prod = T[np.ix_(frontier, gens)].ravel()
        new = np.unique(prod[~mask[prod]])
        mask[new] = True
        frontier = new
    return SubgroupMask(parent, mask)


def generators_of(h: SubgroupMask) -> list[int]:
    """A small generating set, picked greedily from elements of large order."""
    g = h.parent
    if h.is_trivial:
        return []
    orders = element_orders(g)
    cand = sorted(h.ids.tolist(), key=lambda x: (-int(orders[x]), x))
    gens: list[int] = []
    cur = SubgroupMask.trivial(g)
    for x in cand:
        if x in cur:
            continue
        gens.append(x)
        cur = closure(g, gens)
        if cur.size == h.size:
            break
    return gens


def normal_closure(parent: FiniteGroup, seed: Iterable[int], within: SubgroupMask | None = None) -> SubgroupMask:
    """Smallest subgroup containing ``seed`` normalized by ``within`` (default: the whole group)."""
    T = parent.require_table()
    inv = parent.inverse
    conjugators = np.asarray(parent.generators if within is None else within.generators or [0])
    gens = sorted({int(s) for s in seed} - {0})
    n = closure(parent, gens)
    while True:
        s = np.asarray(gens or [0])
        conj = T[T[np.ix_(inv[conjugators], s)], conjugators[:, None]].ravel()
        new = np.unique(conj[~n.members[conj]])
        if new.size == 0:
            return n
        gens.extend(int(x) for x in new)
        n = closure(parent, gens)


def join(parent: FiniteGroup, subgroups: Iterable[SubgroupMask]) -> SubgroupMask:
    seed: list[int] = []
    for h in subgroups:
        seed.extend(h.generators)
    return closure(parent, seed)


def intersection(a: SubgroupMask, b: SubgroupMask) -> SubgroupMask:
    return SubgroupMask(a.parent, a.members & b.members)


def is_normal(h: SubgroupMask) -> bool:
    g = h.parent
    T = g.require_table()
    conj = conjugate_ids(g, np.asarray(h.generators or [0]), np.asarray(g.generators))
    return bool(h.members[conj].all())


def conjugate_ids(g: FiniteGroup, xs: np.ndarray, by: np.ndarray) -> np.ndarray:
    """All ``c^-1 x c`` for x in ``xs``, c in ``by``; shape (len(by), len(xs))."""
    T = g.table
    return T[T[np.ix_(g.inverse[by], xs)], by[:, None]]


def conjugate_subgroup(h: SubgroupMask, y: int) -> SubgroupMask:
    """``y^-1 H y``."""
    g = h.parent
    ids = conjugate_ids(g, h.ids, np.asarray([y])).ravel()
    return SubgroupMask.from_ids(g, ids)


def quotient_map(parent: FiniteGroup, n: SubgroupMask) -> tuple[FiniteGroup, np.ndarray]:
    """The factor group and the projection array ``id -> coset id``."""
    T = parent.require_table()
    if not is_normal(n):
        raise NotNormal(f"subgroup of order {n.size} is not normal in {parent.description}")
    reps_of = T[:, n.ids].min(axis=1)
    reps = np.unique(reps_of)
    index = np.full(parent.order, -1, dtype=np.int64)
    index[reps] = np.arange(reps.size)
    proj = index[reps_of]
    qtable = proj[T[np.ix_(reps, reps)]]
    gens = sorted({int(proj[x]) for x in parent.generators})
    q = from_table(qtable, f"quotient({parent.description}; normal subgroup of order {n.size})", gens)
    proj.flags.writeable = False
    return q, proj


def quotient(parent: FiniteGroup, n: SubgroupMask) -> FiniteGroup:
    return quotient_map(parent, n)[0]


def centralizer(parent: FiniteGroup, s: Iterable[int]) -> SubgroupMask:
    T = parent.require_table()
    s = np.asarray(sorted({int(x) for x in s}), dtype=np.int64)
    if s.size == 0:
        return SubgroupMask.full(parent)
    mask = np.all(T[:, s] == T[s, :].T, axis=1)
    return SubgroupMask(parent, mask)


def center(parent: FiniteGroup) -> SubgroupMask:
    return centralizer(parent, parent.generators)


def conjugacy_classes(parent: FiniteGroup) -> list[np.ndarray]:
    """Classes as sorted id arrays, ordered by smallest member."""
    T = parent.require_table()
    n = parent.order
    assigned = np.zeros(n, dtype=bool)
    allg = np.arange(n)
    out = []
    for x in range(n):
        if assigned[x]:
            continue
        cls = np.unique(T[T[parent.inverse, x], allg])
        assigned[cls] = True
        out.append(cls)
    return out


def class_representatives(parent: FiniteGroup) -> list[int]:
    return [int(c[0]) for c in conjugacy_classes(parent)]


def element_orders(parent: FiniteGroup) -> np.ndarray:
    cached = getattr(parent, "_element_orders", None)
    if cached is not None:
        return cached
    T = parent.require_table()
    n = parent.order
    orders = np.zeros(n, dtype=np.int64)
    allg = np.arange(n)
    cur = allg.copy()
    k = 1
    while True:
        hit = (cur == 0) & (orders == 0)
        orders[hit] = k
        if orders.all():
            break
        cur = T[cur, allg]
        k += 1
    orders.flags.writeable = False
    parent._element_orders = orders
    return orders


def element_order(parent: FiniteGroup, a: int) -> int:
    return int(element_orders(parent)[a])


def exponent(parent: FiniteGroup) -> int:
    return math.lcm(*np.unique(element_orders(parent)).tolist())
