import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import pid
from fglab.groups import build
from fglab.growth import BudgetExceeded, approx_degree, ball_profile, free_ball_size
from fglab.library import library
from fglab.perm import Permutation


@pytest.mark.parametrize("n", range(7))
def test_free_ball_size_matches_enumeration(n):
    assert free_ball_size(n, True) == len(oracles.reduced_words(n))
    positive = sum(2**k for k in range(n + 1))
    assert free_ball_size(n, False) == positive


def test_free_ball_examples():
    assert free_ball_size(0) == 1
    assert (free_ball_size(1), free_ball_size(2)) == (5, 17)
    assert free_ball_size(2, symmetric=False) == 7
    with pytest.raises(ValueError):
        free_ball_size(-1)


def test_ball_profile_examples(s3):
    c5 = build("cyclic(5)")
    assert ball_profile(c5, 1, 1, 1).sizes == [1, 3]
    prof = ball_profile(s3, pid(s3, "(0 1)"), pid(s3, "(0 1 2)"), 1)
    assert prof.sizes == [1, 4]
    assert ball_profile(s3, 0, 0, 5).sizes == [1] * 6
    rows = prof.rows()
    assert rows[1] == {"radius": 1, "ball": 4, "free": 5, "ratio": "0.800000"}


@pytest.mark.parametrize("desc", ["symmetric(4)", "quaternion8", "wreath(cyclic(2), cyclic(3))",
                                  "psl2(5)", "dihedral(6)"])
@pytest.mark.parametrize("symmetric", [True, False])
def test_ball_profile_matches_word_oracle(desc, symmetric):
    g = build(desc)
    T = oracles.tab(g)
    rng = random.Random(desc)
    for _ in range(6):
        a, b = rng.randrange(g.order), rng.randrange(g.order)
        n = 4 if symmetric else 5
        sizes = ball_profile(g, a, b, n, symmetric).sizes
        assert sizes == oracles.ball_sizes(T, a, b, n, symmetric)


@pytest.mark.parametrize("k", range(2, 8))
def test_native_profile_equals_tabled(k):
    tabled = build(f"symmetric({k})", native=False)
    native = build(f"symmetric({k})", native=True)
    assert native.is_tabled is False
    rng = random.Random(k)
    for _ in range(20):
        a, b = rng.randrange(tabled.order), rng.randrange(tabled.order)
        pa, pb = tabled.perm(a), tabled.perm(b)
        for sym in (True, False):
            assert ball_profile(native, pa, pb, 4, sym).sizes == ball_profile(tabled, a, b, 4, sym).sizes


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 119), st.integers(0, 119))
def test_profile_invariants(a, b):
    g = build("symmetric(5)")
    sym = ball_profile(g, a, b, 5, True)
    pos = ball_profile(g, a, b, 5, False)
    for sizes, s in ((sym.sizes, True), (pos.sizes, False)):
        assert sizes[0] == 1
        assert all(x <= y for x, y in zip(sizes, sizes[1:]))
        assert all(x <= free_ball_size(r, s) for r, x in enumerate(sizes))
    assert all(p <= q for p, q in zip(pos.sizes, sym.sizes))
    # prefix closure of the free-ball property
    d = sym.degree()
    assert all(sym.sizes[r] == free_ball_size(r) for r in range(d + 1))
    if d < 5:
        assert all(sym.sizes[r] < free_ball_size(r) for r in range(d + 1, 6))


def test_native_store_cap():
    g = build("symmetric(10)")
    a = Permutation.from_cycles(10, [(0, 1)])
    b = Permutation.from_cycles(10, [tuple(range(10))])
    with pytest.raises(BudgetExceeded):
        ball_profile(g, a, b, 6, store_cap=100)


def test_elementary_abelian_degree_zero():
    rep = approx_degree(build("elementary_abelian(2, 2)"), 3)
    assert rep.degree == 0 and rep.exhaustive
    assert rep.pairs_tried == 16


@pytest.mark.parametrize("n", range(1, 10))
def test_cyclic_positive_degree_one(n):
    g = build(f"cyclic({n})")
    rep = approx_degree(g, 1, symmetric=False)
    assert (rep.degree == 1) == (n >= 3)
    for a, b in itertools.product(range(n), repeat=2):
        ok = ball_profile(g, a, b, 1, False).sizes[1] == 3
        assert ok == (len({0, a, b}) == 3)


def test_degree_report_witness_attains_free_ball():
    for g in library(60):
        rep = approx_degree(g, 3)
        if rep.degree >= 1:
            a, b = rep.pair
            prof = ball_profile(g, a, b, rep.degree)
            assert prof.sizes[-1] == free_ball_size(rep.degree)


@pytest.mark.parametrize("m,expected", [(3, 0), (4, 1), (5, 2)])
def test_small_symmetric_degrees(m, expected):
    assert approx_degree(build(f"symmetric({m})"), 2).degree == expected


@pytest.mark.parametrize("m", [8, 10, 12])
def test_native_symmetric_degree_two(m):
    g = build(f"symmetric({m})")
    rep = approx_degree(g, 2, budget=200, seed=1)
    assert rep.degree == 2 and not rep.exhaustive
    assert ball_profile(g, *rep.pair, 2).sizes == [1, 5, 17]
    again = approx_degree(g, 2, budget=200, seed=1)
    assert again.pair == rep.pair


def test_budget_flag():
    rep = approx_degree(build("symmetric(4)"), 3, budget=5)
    assert rep.budget_exceeded and rep.pairs_tried == 5 and not rep.exhaustive
