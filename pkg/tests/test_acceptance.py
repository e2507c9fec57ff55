"""Exit criteria, each with its wall-clock limit.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import itertools
import math
import random
import subprocess
import sys
import time
from pathlib import Path

import pytest

import oracles
from fglab.groups import build, exponent, quotient
from fglab.growth import approx_degree, free_ball_size
from fglab.library import library
from fglab.approx import FolnerQuery, check_embedding, folner_search, integer_window, lef_embed
from fglab.structure import csa_witness, is_csa, socle, soluble_radical
from fglab.words import (
    FreeWord, combine_identities, disjunction_holds, locally_milnor, parse_word, satisfies_identity,
)

ROOT = Path(__file__).resolve().parent.parent


def ids(m):
    return frozenset(m.ids.tolist())


class Clock:
    def __init__(self, limit):
        self.limit = limit
        self.t0 = time.perf_counter()

    def check(self):
        dt = time.perf_counter() - self.t0
        assert dt < self.limit, f"took {dt:.2f}s, limit {self.limit}s"


@pytest.mark.acceptance(1, "free ball law", 1)
def test_free_ball_law():
    clock = Clock(1)
    for n in range(7):
        assert free_ball_size(n, True) == len(oracles.reduced_words(n))
        positive = sum(1 for k in range(n + 1) for _ in itertools.product("ab", repeat=k))
        assert free_ball_size(n, False) == positive
        if n:
            assert free_ball_size(n, True) == 2 * 3**n - 1
        assert free_ball_size(n, False) == 2 ** (n + 1) - 1
    clock.check()


def _compose(p, q):
    # apply p, then q
    return tuple(q[i] for i in p)


def _independent_ball(a, b, radius):
    inv = lambda p: tuple(sorted(range(len(p)), key=lambda i: p[i]))  # noqa: E731
    alpha = [a, b, inv(a), inv(b)]
    ident = tuple(range(len(a)))
    seen, layer = {ident}, {ident}
    sizes = [1]
    for _ in range(radius):
        layer = {_compose(x, s) for x in layer for s in alpha} - seen
        seen |= layer
        sizes.append(len(seen))
    return sizes


@pytest.mark.acceptance(2, "degree-2 approximation to F2 in some S_m, m <= 12", 30)
def test_growth_detection():
    clock = Clock(30)
    found = None
    for m in range(3, 13):
        rep = approx_degree(build(f"symmetric({m})"), 2, True, budget=2000, seed=0)
        if rep.degree >= 2:
            found = (m, rep)
            break
    assert found is not None
    m, rep = found
    g = build(f"symmetric({m})")
    a, b = (g.perm(x).images if isinstance(x, int) else x.images for x in rep.pair)
    assert _independent_ball(a, b, 2) == [1, 5, 17]
    clock.check()


def _all_specs(max_degree, max_weight):
    for ell in range(1, max_degree + 1):
        for v in itertools.product(range(-max_weight, max_weight + 1), repeat=ell + 1):
            if 0 < sum(map(abs, v)) <= max_weight and math.gcd(*v) == 1:
                yield v


@pytest.mark.acceptance(3, "Milnor thresholds for C2 wr C2 and C2 wr C4", 60)
def test_milnor_thresholds():
    clock = Clock(60)
    small = build("wreath(cyclic(2), cyclic(2))")
    res = locally_milnor(small, 2, 2, reps_only=False)
    assert res.holds and res.pairs_checked == 64
    T = oracles.tab(small)
    for (a, b), spec in res.found.items():
        assert spec.degree <= 2 and spec.weight <= 2
        assert oracles.milnor_holds(T, a, b, spec.coeffs)

    big = build("wreath(cyclic(2), cyclic(4))")
    res = locally_milnor(big, 3, 3, reps_only=False, stop_at_first=True)
    assert not res.holds
    a, b = res.failing_pairs[0]
    T = oracles.tab(big)
    # no coefficient vector at all (any sign, trailing zeros allowed) works for this pair
    assert not any(oracles.milnor_holds(T, a, b, v) for v in _all_specs(3, 3))
    clock.check()


@pytest.mark.acceptance(4, "radical and socle equal brute force, order <= 200", 60)
def test_radical_socle_oracles():
    clock = Clock(60)
    count = 0
    for g in library(200):
        T = oracles.tab(g)
        assert ids(soluble_radical(g)) == oracles.radical(T), g.description
        assert ids(socle(g)) == oracles.socle(T), g.description
        count += 1
    assert count >= 40
    clock.check()


@pytest.mark.acceptance(5, "finite CSA implies abelian; S3 is not CSA", 10)
def test_csa_abelian():
    clock = Clock(10)
    for g in library():
        if is_csa(g):
            assert g.is_abelian, g.description
    s3 = build("symmetric(3)")
    w = csa_witness(s3)
    assert w is not None and w.kind == "not-malnormal"
    T = oracles.tab(s3)
    inv = oracles.inverses(T)
    c = oracles.centralizer(T, [w.x])
    assert oracles.is_abelian(T, c) and w.y not in c
    conj = {T[T[inv[w.y]][z]][w.y] for z in c}
    assert len(c & conj) > 1
    clock.check()


@pytest.mark.acceptance(6, "rad(G/rad G) is trivial, order <= 200", 60)
def test_semisimple_quotient():
    clock = Clock(60)
    for g in library(200):
        q = quotient(g, soluble_radical(g))
        assert soluble_radical(q).is_trivial, g.description
        assert oracles.radical(oracles.tab(q)) == frozenset({0})
    clock.check()


@pytest.mark.acceptance(7, "A5, A6, PSL2(7) fail [x,y]^6; S3 satisfies [x,y]^3", 30)
def test_jones():
    clock = Clock(30)
    w6 = parse_word("[x,y]^6")
    for desc in ["alternating(5)", "alternating(6)", "psl2(7)"]:
        g = build(desc)
        ok, pair = satisfies_identity(g, w6)
        assert not ok
        T = oracles.tab(g)
        assert oracles.eval_word(T, oracles.inverses(T), w6.letters, *pair) != 0
    s3 = build("symmetric(3)")
    w3 = parse_word("[x,y]^3")
    assert satisfies_identity(s3, w3)[0]
    assert oracles.word_identity(oracles.tab(s3), w3.letters)
    clock.check()


@pytest.mark.acceptance(8, "identity combination over groups of order <= 24", 60)
def test_identity_combination():
    clock = Clock(60)
    rng = random.Random(2024)
    groups = list(library(24))
    tables = {g.description: oracles.tab(g) for g in groups}
    pairs = hits = 0
    while pairs < 100:
        t1, t2 = (FreeWord(tuple(rng.choice((1, -1, 2, -2)) for _ in range(rng.randint(1, 6))))
                  for _ in range(2))
        if not t1 or not t2:
            continue
        pairs += 1
        t = combine_identities(t1, t2)
        assert t
        for g in groups:
            if disjunction_holds(g, [t1, t2]):
                hits += 1
                assert oracles.word_identity(tables[g.description], t.letters), (g.description, t1, t2)
    assert hits > 0
    clock.check()


@pytest.mark.acceptance(9, "exact Følner sets for arcs in C_n, n <= 12", 30)
def test_folner_exactness():
    clock = Clock(30)
    from fractions import Fraction
    for n in range(2, 13):
        g = build(f"cyclic({n})")
        T = oracles.tab(g)
        for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)):
            res = folner_search(FolnerQuery(g, (0, 1), eps))
            assert res.exact and res.holds
            assert res.size == min(math.floor(1 / eps) + 1, n) == oracles.min_folner(T, (0, 1), eps)
    clock.check()


@pytest.mark.acceptance(10, "window {-3..3} embeds in C_m iff m >= 7", 5)
def test_lef_window():
    clock = Clock(5)
    p = integer_window(3)
    for m in range(2, 10):
        g = build(f"cyclic({m})")
        xi = lef_embed(p, g)
        assert (xi is not None) == (m >= 7), m
        if xi is not None:
            assert check_embedding(p, g, xi)
    clock.check()


@pytest.mark.acceptance(11, "exponent 2: 2-generated subgroups have order <= 4 and are abelian", 10)
def test_burnside_shadow():
    clock = Clock(10)
    seen = 0
    for g in library():
        if exponent(g) != 2:
            continue
        seen += 1
        T = oracles.tab(g)
        for a, b in itertools.combinations(range(g.order), 2):
            h = oracles.span(T, [a, b])
            assert len(h) <= 4 and oracles.is_abelian(T, h)
    assert seen >= 3
    clock.check()


@pytest.mark.acceptance(12, "experiment CSV is byte-identical across runs and thread counts", 60)
def test_determinism(tmp_path):
    clock = Clock(60)
    outputs = []
    for jobs in (1, 1, 4):
        out = tmp_path / f"run{len(outputs)}.csv"
        cmd = [sys.executable, "-m", "fglab", "experiment", "run", str(ROOT / "experiments" / "growth.yaml"),
               "--no-cache", "--jobs", str(jobs), "--format", "csv", "-o", str(out)]
        subprocess.run(cmd, check=True, cwd=tmp_path)
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    assert outputs[0].startswith(b"# fglab-results schema=1 experiment=growth seed=7")
    clock.check()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
