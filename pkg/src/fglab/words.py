"""Two-variable free group words, identities and Milnor words.

Letters are stored as ints: ``1 = x``, ``-1 = x^-1``, ``2 = y``, ``-2 = y^-1``.
Commutators follow ``[u, v] = u^-1 v^-1 u v`` throughout.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .groups import FiniteGroup, class_representatives, closure, element_order
from .structure import derived_subgroup

_CHARS = {1: "x", -1: "X", 2: "y", -2: "Y"}
_LETTERS = {v: k for k, v in _CHARS.items()}


def _reduce(letters: Iterable[int]) -> tuple[int, ...]:
    stack: list[int] = []
    for a in letters:
        if stack and stack[-1] == -a:
            stack.pop()
        else:
            stack.append(a)
    return tuple(stack)


@dataclass(frozen=True)
class FreeWord:
    """A reduced word in x, y and their inverses."""

    letters: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if any(a not in _CHARS for a in self.letters):
            raise ValueError(f"bad letters {self.letters}")
        object.__setattr__(self, "letters", _reduce(self.letters))

    @classmethod
    def parse(cls, text: str) -> FreeWord:
        return parse_word(text)

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __mul__(self, other: FreeWord) -> FreeWord:
        return FreeWord(self.letters + other.letters)

    def inverse(self) -> FreeWord:
        return FreeWord(tuple(-a for a in reversed(self.letters)))

    def __pow__(self, k: int) -> FreeWord:
        base = self if k >= 0 else self.inverse()
        return FreeWord(base.letters * abs(k))

    def __str__(self) -> str:
        return "".join(_CHARS[a] for a in self.letters) or "1"


X = FreeWord((1,))
Y = FreeWord((2,))
EMPTY = FreeWord()


def reduce(w: FreeWord | Sequence[int]) -> FreeWord:
    return FreeWord(tuple(w.letters if isinstance(w, FreeWord) else w))


def free_mul(u: FreeWord, v: FreeWord) -> FreeWord:
    return u * v


def free_commutator(u: FreeWord, v: FreeWord) -> FreeWord:
    return u.inverse() * v.inverse() * u * v


# parsing ---------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\[)|(\])|(\()|(\))|(,)|(\^\s*-?\d+)|([xXyY])|(1))")


def parse_word(text: str) -> FreeWord:
    """Parse ``x y X Y`` letters with ``(..)``, ``[u,v]``, ``^k`` and ``1`` for the empty word."""
    tokens = []
    pos = 0
    text = text.strip()
    if not text:
        raise ValueError("empty word literal; write 1 for the identity")
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse word {text!r} at position {pos}")
        tokens.append(m.group(0).strip().replace(" ", ""))
        pos = m.end()
    pos = 0

    def product(stop: set[str]) -> FreeWord:
        nonlocal pos
        out = EMPTY
        while pos < len(tokens) and tokens[pos] not in stop:
            out = out * factor()
        return out

    def factor() -> FreeWord:
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok in _LETTERS:
            base = FreeWord((_LETTERS[tok],))
        elif tok == "1":
            base = EMPTY
        elif tok == "(":
            base = product({")"})
            expect(")")
        elif tok == "[":
            u = product({","})
            expect(",")
            v = product({"]"})
            expect("]")
            base = free_commutator(u, v)
        else:
            raise ValueError(f"unexpected {tok!r} in word {text!r}")
        while pos < len(tokens) and tokens[pos].startswith("^"):
            base = base ** int(tokens[pos][1:])
            pos += 1
        return base

    def expect(tok: str) -> None:
        nonlocal pos
        if pos >= len(tokens) or tokens[pos] != tok:
            raise ValueError(f"expected {tok!r} in word {text!r}")
        pos += 1

    w = product(set())
    if pos != len(tokens):
        raise ValueError(f"trailing input in word {text!r}")
    return w


# evaluation ----------------------------------------------------------------


def evaluate(w: FreeWord, g: FiniteGroup, a: int, b: int) -> int:
    T = g.require_table()
    vals = {1: a, -1: int(g.inverse[a]), 2: b, -2: int(g.inverse[b])}
    cur = 0
    for letter in w.letters:
        cur = int(T[cur, vals[letter]])
    return cur


def evaluate_many(w: FreeWord, g: FiniteGroup, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized :func:`evaluate` over aligned arrays of ``a`` and ``b``."""
    T = g.require_table()
    a = np.asarray(a)
    b = np.asarray(b)
    vals = {1: a, -1: g.inverse[a], 2: b, -2: g.inverse[b]}
    cur = np.zeros(np.broadcast(a, b).shape, dtype=T.dtype)
    for letter in w.letters:
        cur = T[cur, vals[letter]]
    return cur


def _all_pairs(g: FiniteGroup, reps_only: bool) -> tuple[np.ndarray, np.ndarray]:
    firsts = np.asarray(class_representatives(g) if reps_only else range(g.order))
    a = np.repeat(firsts, g.order)
    b = np.tile(np.arange(g.order), firsts.size)
    return a, b


def satisfies_identity(g: FiniteGroup, w: FreeWord) -> tuple[bool, tuple[int, int] | None]:
    """Whether ``w(a, b) = 1`` for all a, b; otherwise the first failing pair.

    The first variable runs over class representatives, since
    ``w(a^g, b^g) = w(a, b)^g``.
    """
    a, b = _all_pairs(g, reps_only=True)
    vals = evaluate_many(w, g, a, b)
    bad = np.flatnonzero(vals != 0)
    if bad.size == 0:
        return True, None
    i = int(bad[0])
    return False, (int(a[i]), int(b[i]))


def disjunction_holds(g: FiniteGroup, words: Sequence[FreeWord]) -> bool:
    """Whether every pair satisfies at least one of ``w = 1``."""
    a, b = _all_pairs(g, reps_only=True)
    ok = np.zeros(a.shape, dtype=bool)
    for w in words:
        ok |= evaluate_many(w, g, a, b) == 0
    return bool(ok.all())


# combining identities --------------------------------------------------------


def root_and_exponent(w: FreeWord) -> tuple[FreeWord, int]:
    """``(r, k)`` with ``w = r^k``, ``r`` not a proper power, ``k > 0``."""
    if not w:
        raise ValueError("the empty word has no root")
    s = w.letters
    i = 0
    while i < len(s) - 1 - i and s[i] == -s[len(s) - 1 - i]:
        i += 1
    conj, core = s[:i], s[i:len(s) - i]
    n = len(core)
    for d in range(1, n + 1):
        if n % d == 0 and core[:d] * (n // d) == core:
            r = FreeWord(conj + core[:d] + tuple(-a for a in reversed(conj)))
            return r, n // d
    raise AssertionError("unreachable")


def combine_identities(t1: FreeWord, t2: FreeWord) -> FreeWord:
    """One nontrivial word implied by the pointwise disjunction ``t1 = 1 or t2 = 1``.

    Noncommuting words give ``[t1, t2]``; commuting ones are powers of a common
    root ``t`` and give ``t^(z1 z2)``.
    """
    if not t1 or not t2:
        raise ValueError("combine_identities needs two nontrivial words")
    c = free_commutator(t1, t2)
    if c:
        return c
    r1, z1 = root_and_exponent(t1)
    r2, z2 = root_and_exponent(t2)
    if r2 == r1.inverse():
        z2 = -z2
    elif r2 != r1:
        raise AssertionError("commuting words without a common root")
    return r1 ** (z1 * z2)


# Milnor words ----------------------------------------------------------------


@dataclass(frozen=True)
class MilnorSpec:
    """Exponents ``(m_0, ..., m_l)`` of ``prod_i y^i x^(m_i) y^-i``."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        c = tuple(int(m) for m in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if len(c) < 2:
            raise ValueError("a Milnor spec needs degree >= 1 (at least two coefficients)")
        if math.gcd(*c) != 1:
            raise ValueError(f"coefficients {c} must have gcd 1")

    @classmethod
    def parse(cls, text: str) -> MilnorSpec:
        return cls(tuple(int(t) for t in re.findall(r"-?\d+", text)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def weight(self) -> int:
        return sum(abs(m) for m in self.coeffs)

    def word(self) -> FreeWord:
        w = EMPTY
        for i, m in enumerate(self.coeffs):
            w = w * (Y**i) * (X**m) * (Y**-i)
        return w

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.coeffs)) + ")"


@dataclass(frozen=True)
class PolynomialVec:
    """Integer polynomial, ``coeffs[i]`` the coefficient of ``X^i``."""

    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        c = list(int(a) for a in self.coeffs)
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    def __mul__(self, other: PolynomialVec) -> PolynomialVec:
        if not self.coeffs or not other.coeffs:
            return PolynomialVec(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return PolynomialVec(tuple(out))

    def __str__(self) -> str:
        terms = []
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            mono = "" if i == 0 else ("X" if i == 1 else f"X^{i}")
            if mono and abs(a) == 1:
                coef = "-" if a < 0 else ""
            else:
                coef = str(a)
            terms.append(coef + mono)
        return " + ".join(terms).replace("+ -", "- ") or "0"


def milnor_polynomial(spec: MilnorSpec) -> PolynomialVec:
    return PolynomialVec(spec.coeffs)


def poly_product(polys: Sequence[PolynomialVec]) -> PolynomialVec:
    out = PolynomialVec((1,))
    for p in polys:
        out = out * p
    return out


class MilnorContext:
    """Per-pair data for Milnor tests: ``H_{a,b}``, its derived subgroup, conjugate powers."""

    def __init__(self, g: FiniteGroup, a: int, b: int):
        T = g.require_table()
        self.g = g
        self.a = a
        self.b = b
        nb = element_order(g, b)
        bpow = [0]
        for _ in range(nb - 1):
            bpow.append(int(T[bpow[-1], b]))
        self.bpow = bpow
        self.conjugates = [int(T[T[p, a], g.inverse[p]]) for p in bpow]
        self.h = closure(g, self.conjugates)
        self.hprime = derived_subgroup(self.h)
        self._pow: dict[tuple[int, int], int] = {}

    def factor(self, i: int, m: int) -> int:
        """``b^i a^m b^-i``."""
        key = (i, m)
        if key not in self._pow:
            self._pow[key] = self.g.power(self.conjugates[i % len(self.bpow)], m)
        return self._pow[key]

    def value(self, coeffs: Sequence[int], order: Sequence[int] | None = None) -> int:
        T = self.g.table
        cur = 0
        for i in (order if order is not None else range(len(coeffs))):
            cur = int(T[cur, self.factor(i, coeffs[i])])
        return cur

    def holds(self, coeffs: Sequence[int]) -> bool:
        return bool(self.hprime.members[self.value(coeffs)])


def milnor_value(g: FiniteGroup, a: int, b: int, spec: MilnorSpec) -> bool:
    """Whether ``prod_{i=0..l} b^i a^(m_i) b^-i`` lies in ``H_{a,b}'``."""
    return MilnorContext(g, a, b).holds(spec.coeffs)


def _vectors(length: int, weight: int) -> Iterator[tuple[int, ...]]:
    """Integer vectors with sum of |entries| == weight, lexicographic."""
    if length == 1:
        for v in (-weight, weight) if weight else (0,):
            yield (v,)
        return
    for first in range(-weight, weight + 1):
        for rest in _vectors(length - 1, weight - abs(first)):
            yield (first, *rest)


def milnor_candidates(max_degree: int, max_weight: int) -> Iterator[MilnorSpec]:
    """Specs by degree, then weight, then lexicographic coefficients.

    The top coefficient is positive: ``t`` and ``t^-1`` define the same law, and a
    zero top coefficient repeats a lower degree.
    """
    for ell in range(1, max_degree + 1):
        for w in range(1, max_weight + 1):
            for v in _vectors(ell + 1, w):
                if v[-1] > 0 and math.gcd(*v) == 1:
                    yield MilnorSpec(v)


def milnor_search(g: FiniteGroup, a: int, b: int, max_degree: int, max_weight: int,
                  context: MilnorContext | None = None) -> MilnorSpec | None:
    if max_degree < 1 or max_weight < 1:
        raise ValueError("bounds must be >= 1")
    ctx = context or MilnorContext(g, a, b)
    for spec in milnor_candidates(max_degree, max_weight):
        if ctx.holds(spec.coeffs):
            return spec
    return None


@dataclass
class LocallyMilnorResult:
    holds: bool
    failing_pairs: list[tuple[int, int]]
    found: dict[tuple[int, int], MilnorSpec]
    pairs_checked: int


def locally_milnor(g: FiniteGroup, max_degree: int, max_weight: int, *,
                   reps_only: bool = True, stop_at_first: bool = False) -> LocallyMilnorResult:
    """Milnor search over all pairs; ``a`` over class representatives unless ``reps_only=False``."""
    firsts = class_representatives(g) if reps_only else range(g.order)
    failing = []
    found = {}
    checked = 0
    for a, b in itertools.product(firsts, range(g.order)):
        checked += 1
        spec = milnor_search(g, a, b, max_degree, max_weight)
        if spec is None:
            failing.append((a, b))
            if stop_at_first:
                break
        else:
            found[(a, b)] = spec
    return LocallyMilnorResult(not failing, failing, found, checked)
