"""Finite approximation experiments: LEF embeddings, sofic scoring, Følner sets.

All distances and ratios are exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .groups import CapExceeded, FiniteGroup
from .perm import Permutation

FOLNER_EXACT_CAP = 16


def as_fraction(x: Fraction | int | float | str) -> Fraction:
    """Exact rational; floats go through their shortest decimal form (0.1 -> 1/10)."""
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class PartialStructure:
    """A finite set of labels with a partial product; optionally an identity label."""

    labels: tuple[str, ...]
    products: Mapping[tuple[str, str], str]
    identity: str | None = None

    def __post_init__(self) -> None:
        known = set(self.labels)
        if len(known) != len(self.labels):
            raise ValueError("labels must be distinct")
        if self.identity is not None and self.identity not in known:
            raise ValueError(f"identity {self.identity!r} is not a label")
        for (u, v), w in self.products.items():
            if not {u, v, w} <= known:
                raise ValueError(f"product {u}*{v}={w} uses an unknown label")
            if self.identity is not None:
                if u == self.identity and w != v or v == self.identity and w != u:
                    raise ValueError(f"product {u}*{v}={w} contradicts the identity label")

    def all_products(self) -> dict[tuple[str, str], str]:
        """Defined products plus those forced by the identity label."""
        out = dict(self.products)
        e = self.identity
        if e is not None:
            for a in self.labels:
                out[(e, a)] = a
                out[(a, e)] = a
        return out

    @classmethod
    def from_json(cls, obj: Mapping[str, Any] | str) -> PartialStructure:
        if isinstance(obj, str):
            obj = json.loads(obj)
        products = {}
        for key, val in obj.get("products", {}).items():
            u, v = (s.strip() for s in key.split(","))
            products[(u, v)] = str(val)
        return cls(tuple(str(x) for x in obj["labels"]), products, obj.get("identity"))

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"labels": list(self.labels)}
        if self.identity is not None:
            out["identity"] = self.identity
        out["products"] = {f"{u},{v}": w for (u, v), w in self.products.items()}
        return out


def integer_window(radius: int) -> PartialStructure:
    """``{-r..r}`` under addition, products defined when the sum stays in the window."""
    labels = tuple(str(i) for i in range(-radius, radius + 1))
    products = {
        (str(i), str(j)): str(i + j)
        for i in range(-radius, radius + 1)
        for j in range(-radius, radius + 1)
        if abs(i + j) <= radius
    }
    return PartialStructure(labels, products, "0")


def lef_embed(p: PartialStructure, g: FiniteGroup) -> dict[str, int] | None:
    """Injective map preserving every defined product, or None if none exists.

    Complete backtracking: whenever two labels of a product constraint are
    assigned, the third is forced and assigned immediately (or the branch fails).
    """
    T = g.require_table()
    inv = g.inverse
    labels = list(p.labels)
    if len(labels) > g.order:
        return None
    index = {lab: i for i, lab in enumerate(labels)}
    cons = [(index[u], index[v], index[w]) for (u, v), w in p.all_products().items()]
    touching: list[list[int]] = [[] for _ in labels]
    for ci, (u, v, w) in enumerate(cons):
        for x in {u, v, w}:
            touching[x].append(ci)

    value = [-1] * len(labels)
    owner = [-1] * g.order

    def assign(x: int, val: int, trail: list[int]) -> bool:
        queue = [(x, val)]
        while queue:
            x, val = queue.pop()
            if value[x] != -1:
                if value[x] != val:
                    return False
                continue
            if owner[val] != -1:
                return False
            value[x] = val
            owner[val] = x
            trail.append(x)
            for ci in touching[x]:
                u, v, w = cons[ci]
                vu, vv, vw = value[u], value[v], value[w]
                if vu != -1 and vv != -1:
                    need = int(T[vu, vv])
                    if vw == -1:
                        queue.append((w, need))
                    elif vw != need:
                        return False
                elif vu != -1 and vw != -1:
                    queue.append((v, int(T[inv[vu], vw])))
                elif vv != -1 and vw != -1:
                    queue.append((u, int(T[vw, inv[vv]])))
        return True

    def undo(trail: list[int]) -> None:
        for x in trail:
            owner[value[x]] = -1
            value[x] = -1

    # u*u = u forces the identity
    forced = []
    for u, v, w in cons:
        if u == v == w and not assign(u, 0, forced):
            return None
    order = sorted(range(len(labels)), key=lambda x: -len(touching[x]))

    def search() -> bool:
        x = next((y for y in order if value[y] == -1), None)
        if x is None:
            return True
        for val in range(g.order):
            if owner[val] != -1:
                continue
            trail: list[int] = []
            if assign(x, val, trail) and search():
                return True
            undo(trail)
        return False

    if not search():
        return None
    return {lab: value[i] for i, lab in enumerate(labels)}


def check_embedding(p: PartialStructure, g: FiniteGroup, xi: Mapping[str, int]) -> bool:
    if len(set(xi.values())) != len(p.labels):
        return False
    return all(g.mul(xi[u], xi[v]) == xi[w] for (u, v), w in p.all_products().items())


# sofic ------------------------------------------------------------------------


def hamming(p: Permutation, q: Permutation) -> Fraction:
    """Normalized Hamming distance: the fraction of points where p and q differ."""
    if p.degree != q.degree:
        raise ValueError(f"degree mismatch: {p.degree} vs {q.degree}")
    if p.degree == 0:
        return Fraction(0)
    return Fraction(sum(1 for i, j in zip(p.images, q.images) if i != j), p.degree)


@dataclass
class SoficMap:
    domain: PartialStructure
    n: int
    images: dict[str, Permutation]

    def __post_init__(self) -> None:
        for lab in self.domain.labels:
            if lab not in self.images:
                raise ValueError(f"no image for label {lab!r}")
            if self.images[lab].degree != self.n:
                raise ValueError(f"image of {lab!r} has degree {self.images[lab].degree}, expected {self.n}")


def sofic_defect(m: SoficMap) -> tuple[Fraction, Fraction]:
    """(max multiplicativity defect, min distance of a nonidentity label from id)."""
    defect = Fraction(0)
    for (u, v), w in m.domain.all_products().items():
        defect = max(defect, hamming(m.images[w], m.images[u] * m.images[v]))
    ident = Permutation.identity(m.n)
    sep = Fraction(1)
    for lab in m.domain.labels:
        if lab != m.domain.identity:
            sep = min(sep, hamming(ident, m.images[lab]))
    return defect, sep


@dataclass
class SoficSearchResult:
    map: SoficMap
    defect: Fraction
    separation: Fraction
    iterations: int
    heuristic: bool = True


def sofic_search(p: PartialStructure, n: int, iterations: int = 2000, seed: int = 0) -> SoficSearchResult:
    """Randomized hill climb for a map with small defect and large separation.

    Heuristic: the result is an upper bound on the best achievable defect.
    """
    rng = random.Random(seed)
    free = [lab for lab in p.labels if lab != p.identity]

    def rand_perm() -> Permutation:
        img = list(range(n))
        rng.shuffle(img)
        return Permutation(tuple(img))

    images = {lab: rand_perm() for lab in free}
    if p.identity is not None:
        images[p.identity] = Permutation.identity(n)

    def score(imgs: dict[str, Permutation]) -> tuple[Fraction, Fraction]:
        d, s = sofic_defect(SoficMap(p, n, imgs))
        return d - s, d

    best = score(images)
    for _ in range(iterations if free and n > 1 else 0):
        lab = rng.choice(free)
        trial = dict(images)
        if rng.random() < 0.1:
            # occasional jump out of a swap-local optimum
            trial.update({x: rand_perm() for x in free})
        else:
            i, j = rng.sample(range(n), 2)
            img = list(images[lab].images)
            img[i], img[j] = img[j], img[i]
            trial[lab] = Permutation(tuple(img))
        s = score(trial)
        if s <= best:
            images, best = trial, s
    m = SoficMap(p, n, images)
    d, s = sofic_defect(m)
    return SoficSearchResult(m, d, s, iterations)


# Følner sets -------------------------------------------------------------------


@dataclass(frozen=True)
class FolnerQuery:
    group: FiniteGroup
    window: tuple[int, ...]
    epsilon: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "window", tuple(sorted(set(int(a) for a in self.window))))
        object.__setattr__(self, "epsilon", as_fraction(self.epsilon))
        if not self.window:
            raise ValueError("the window A must be nonempty")
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")


@dataclass
class FolnerResult:
    V: list[int]
    av_size: int
    epsilon: Fraction
    mode: str
    exact: bool

    @property
    def size(self) -> int:
        return len(self.V)

    @property
    def holds(self) -> bool:
        return self.av_size < (1 + self.epsilon) * len(self.V)

    def certificate(self) -> dict[str, Any]:
        return {"V": self.V, "|V|": len(self.V), "|AV|": self.av_size,
                "epsilon": str(self.epsilon), "bound": str((1 + self.epsilon) * len(self.V)),
                "holds": self.holds, "mode": self.mode, "exact": self.exact}


def product_set(g: FiniteGroup, A: Iterable[int], V: Iterable[int]) -> set[int]:
    T = g.require_table()
    return {int(T[a, v]) for a in A for v in V}


def _left_masks(g: FiniteGroup, A: Sequence[int]) -> list[int]:
    """Bitmask of ``A v`` for every element v."""
    T = g.table
    out = []
    for v in range(g.order):
        m = 0
        for a in A:
            m |= 1 << int(T[a, v])
        out.append(m)
    return out


def folner_search(q: FolnerQuery, mode: str = "exact", exact_cap: int = FOLNER_EXACT_CAP) -> FolnerResult:
    """A set V with ``|AV| < (1 + eps)|V|``.

    ``exact`` returns a minimum-size V (identity included without loss of
    generality, as right translation preserves both sizes); ``greedy`` grows V
    from the identity and gives an upper bound on the minimum.
    """
    g, A, eps = q.group, q.window, q.epsilon
    cols = _left_masks(g, A)
    n = g.order
    if mode == "greedy":
        V = [0]
        acc = cols[0]
        while not acc.bit_count() < (1 + eps) * len(V):
            best = None
            for x in range(n):
                if x in V:
                    continue
                r = Fraction((acc | cols[x]).bit_count(), len(V) + 1)
                if best is None or r < best[0]:
                    best = (r, x)
            V.append(best[1])
            acc |= cols[best[1]]
        return FolnerResult(sorted(V), acc.bit_count(), eps, "greedy", False)
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if n > exact_cap:
        raise CapExceeded(f"exact Følner search in {g.description}", n, exact_cap)
    others = list(range(1, n))
    for k in range(1, n + 1):
        # largest allowed |AV| for |V| = k
        limit = math.ceil((1 + eps) * k) - 1
        found = _dfs(cols, others, k - 1, 0, cols[0], limit, [0])
        if found is not None:
            V, acc = found
            return FolnerResult(V, acc.bit_count(), eps, "exact", True)
    raise AssertionError("V = G always satisfies the inequality")


def _dfs(cols: list[int], others: list[int], need: int, start: int, acc: int, limit: int,
         chosen: list[int]) -> tuple[list[int], int] | None:
    if acc.bit_count() > limit:
        return None
    if need == 0:
        return list(chosen), acc
    for i in range(start, len(others) - need + 1):
        x = others[i]
        chosen.append(x)
        hit = _dfs(cols, others, need - 1, i + 1, acc | cols[x], limit, chosen)
        chosen.pop()
        if hit is not None:
            return hit
    return None


@dataclass
class AmenabilityRow:
    epsilon: Fraction
    n: int
    alpha: int
    windows: int
    all_windows: bool
    exact_search: bool

    def to_json(self) -> dict[str, Any]:
        return {"epsilon": str(self.epsilon), "n": self.n, "alpha": self.alpha,
                "windows": self.windows, "all_windows": self.all_windows,
                "exact_search": self.exact_search}


def amenability_profile(g: FiniteGroup, n: int, epsilons: Iterable[Fraction | str | float],
                        samples: int = 500, seed: int = 0,
                        exact_cap: int = FOLNER_EXACT_CAP) -> list[AmenabilityRow]:
    """Empirical ``alpha(eps, n)``: the largest minimal |V| over windows A with |A| = n."""
    if not 1 <= n <= g.order:
        raise ValueError(f"window size {n} out of range for order {g.order}")
    total = math.comb(g.order, n)
    if total <= samples:
        windows = list(itertools.combinations(range(g.order), n))
        all_windows = True
    else:
        rng = random.Random(seed)
        seen: set[tuple[int, ...]] = set()
        while len(seen) < samples:
            seen.add(tuple(sorted(rng.sample(range(g.order), n))))
        windows = sorted(seen)
        all_windows = False
    mode = "exact" if g.order <= exact_cap else "greedy"
    rows = []
    for eps in epsilons:
        eps = as_fraction(eps)
        alpha = max(folner_search(FolnerQuery(g, A, eps), mode, exact_cap).size for A in windows)
        rows.append(AmenabilityRow(eps, n, alpha, len(windows), all_windows, mode == "exact"))
    return rows
