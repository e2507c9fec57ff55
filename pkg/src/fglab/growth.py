"""Cayley ball growth and approximations to free groups and semigroups.

``symmetric=True`` uses the alphabet {a, b, a^-1, b^-1} and compares with the
free group F2; ``symmetric=False`` uses {a, b} and compares with the free
monoid on two letters (the M2 variant).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .groups import FiniteGroup, class_representatives, element_orders
from .perm import Permutation

DEFAULT_STORE_CAP = 10_000_000


class BudgetExceeded(RuntimeError):
    pass


def free_ball_size(n: int, symmetric: bool = True) -> int:
    if n < 0:
        raise ValueError("radius must be >= 0")
    if symmetric:
        return 1 if n == 0 else 2 * 3**n - 1
    return 2 ** (n + 1) - 1


@dataclass
class BallProfile:
    sizes: list[int]
    pair: tuple[Any, Any]
    symmetric: bool

    @property
    def radius(self) -> int:
        return len(self.sizes) - 1

    def degree(self) -> int:
        """Largest r with ball(r) equal to the free ball (prefix of equal radii)."""
        d = 0
        for r, s in enumerate(self.sizes):
            if s != free_ball_size(r, self.symmetric):
                break
            d = r
        return d

    def rows(self) -> list[dict[str, Any]]:
        out = []
        for r, s in enumerate(self.sizes):
            free = free_ball_size(r, self.symmetric)
            out.append({"radius": r, "ball": s, "free": free, "ratio": f"{s / free:.6f}"})
        return out


def _native_alphabet(a: Permutation, b: Permutation, symmetric: bool) -> list[np.ndarray]:
    gens = [a, b] + ([a.inverse(), b.inverse()] if symmetric else [])
    return [np.asarray(p.images, dtype=np.int16) for p in gens]


def ball_profile(g: FiniteGroup, a: Any, b: Any, n: int, symmetric: bool = True, *,
                 store_cap: int = DEFAULT_STORE_CAP, stop_below_free: bool = False) -> BallProfile:
    """Cumulative ball sizes |B(0)|, ..., |B(n)| by breadth-first search.

    Tabled groups take ids; permutation-native groups take Permutations.  With
    ``stop_below_free`` the search ends at the first radius short of the free ball.
    """
    sizes = [1]
    if g.is_tabled:
        T = g.table
        alpha = [a, b] + ([int(g.inverse[a]), int(g.inverse[b])] if symmetric else [])
        alpha = np.asarray(alpha)
        seen = np.zeros(g.order, dtype=bool)
        seen[0] = True
        frontier = np.array([0])
        for r in range(1, n + 1):
            prod = T[np.ix_(frontier, alpha)].ravel()
            frontier = np.unique(prod[~seen[prod]])
            seen[frontier] = True
            sizes.append(sizes[-1] + int(frontier.size))
            assert sizes[-1] <= free_ball_size(r, symmetric)
            if stop_below_free and sizes[-1] < free_ball_size(r, symmetric):
                break
        return BallProfile(sizes, (a, b), symmetric)

    alpha = _native_alphabet(a, b, symmetric)
    deg = len(alpha[0])
    ident = np.arange(deg, dtype=np.int16)
    seen = {ident.tobytes()}
    frontier = ident[None, :]
    for r in range(1, n + 1):
        new = []
        for s in alpha:
            prod = s[frontier]  # apply frontier element first, then s
            for row in prod:
                key = row.tobytes()
                if key not in seen:
                    seen.add(key)
                    new.append(row)
            if len(seen) > store_cap:
                raise BudgetExceeded(f"ball store exceeded {store_cap} elements at radius {r}")
        frontier = np.array(new, dtype=np.int16).reshape(-1, deg)
        sizes.append(len(seen))
        assert sizes[-1] <= free_ball_size(r, symmetric)
        if stop_below_free and sizes[-1] < free_ball_size(r, symmetric):
            break
    return BallProfile(sizes, (a, b), symmetric)


@dataclass
class ApproxReport:
    description: str
    symmetric: bool
    degree: int
    pair: tuple[Any, Any] | None
    pairs_tried: int
    exhaustive: bool
    budget_exceeded: bool = False
    profile: list[int] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        pair = None if self.pair is None else [str(x) for x in self.pair]
        return {"group": self.description, "alphabet": "sym" if self.symmetric else "pos",
                "degree": self.degree, "pair": pair, "pairs_tried": self.pairs_tried,
                "exhaustive": self.exhaustive, "budget_exceeded": self.budget_exceeded,
                "profile": self.profile}


def _random_perm(rng: random.Random, degree: int, even: bool) -> Permutation:
    while True:
        img = list(range(degree))
        rng.shuffle(img)
        p = Permutation(tuple(img))
        if not even or p.parity() == 0:
            return p


def approx_degree(g: FiniteGroup, n_max: int, symmetric: bool = True, budget: int = 10_000,
                  seed: int = 0, store_cap: int = DEFAULT_STORE_CAP) -> ApproxReport:
    """Best degree ``n <= n_max`` with some pair's ball equal to the free ball.

    Tabled groups scan pairs with ``a`` over class representatives (ball sizes
    are conjugation invariant), highest element order first; native groups
    draw seeded random pairs.  Per pair, the free-ball property is
    prefix-closed, so each BFS stops at the first radius short of the free
    count.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if g.is_tabled:
        orders = element_orders(g)
        reps = sorted(class_representatives(g), key=lambda x: (-int(orders[x]), x))
        total = len(reps) * g.order
        pairs = itertools.product(reps, range(g.order))
        exhaustive = total <= budget
    else:
        rng = random.Random(seed)
        even = g.description.startswith("alternating")
        pairs = ((_random_perm(rng, g.degree, even), _random_perm(rng, g.degree, even)) for _ in itertools.count())
        exhaustive = False
    best = ApproxReport(g.description, symmetric, 0, None, 0, exhaustive)
    tried = 0
    for a, b in pairs:
        if tried >= budget:
            best.budget_exceeded = True
            break
        tried += 1
        prof = ball_profile(g, a, b, n_max, symmetric, store_cap=store_cap, stop_below_free=True)
        d = prof.degree()
        if best.pair is None or d > best.degree:
            best.degree, best.pair, best.profile = d, (a, b), prof.sizes
            if d >= n_max:
                break
    best.pairs_tried = tried
    return best
