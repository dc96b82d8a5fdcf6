import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from demachar.affine import AffineWeight, affine_pairing, affine_reflect, demazure_word, extremal_weight, theta_pairing
from demachar.rootsys import RootSystemError, Weight

from .conftest import rs


def aw(coords, level, degree):
    return AffineWeight(Weight(tuple(coords)), level, degree)


def test_affine_pairing_examples(D4):
    assert affine_pairing(D4, aw((0, 0, 0, 0), 1, 0), 0) == 1
    assert affine_pairing(D4, aw((1, 0, 0, 0), 1, 0), 0) == 0
    L = aw((1, -2, 3, 0), 2, 5)
    assert [affine_pairing(D4, L, i) for i in range(1, 5)] == [1, -2, 3, 0]
    with pytest.raises(RootSystemError):
        affine_pairing(D4, L, 5)


def test_s0_example(A1):
    assert affine_reflect(A1, 0, aw((2,), 1, 0)) == aw((0,), 1, 1)


affine4 = st.builds(aw, st.tuples(*[st.integers(-3, 3)] * 4), st.integers(0, 3), st.integers(-3, 3))


@given(affine4, st.integers(0, 4))
def test_reflection_involution_and_level(L, i):
    R = rs("D", 4)
    M = affine_reflect(R, i, L)
    assert M.level == L.level
    if i != 0:
        assert M.degree == L.degree
    assert affine_reflect(R, i, M) == L
    if affine_pairing(R, L, i) == 0:
        assert M == L


def apply_word(R, word, L):
    for j in reversed(word):
        L = affine_reflect(R, j, L)
    return L


def test_demazure_word_examples(A1):
    dom, word = demazure_word(A1, 1, Weight.zero(1))
    assert dom == aw((0,), 1, 0) and word == ()
    assert demazure_word(A1, 1, Weight((1,))) == (aw((1,), 1, 0), (1,))
    assert demazure_word(A1, 1, Weight((2,))) == (aw((0,), 1, 1), (1, 0))


@pytest.mark.parametrize("series,n,bound", [("D", 4, 2), ("A", 2, 3)])
def test_demazure_word_contract(series, n, bound):
    R = rs(series, n)
    for c in itertools.product(range(bound + 1), repeat=n):
        lam = Weight(c)
        for level in (1, 2, 3):
            for tie in ("least", "greatest"):
                dom, word = demazure_word(R, level, lam, tie=tie)
                assert all(affine_pairing(R, dom, i) >= 0 for i in range(n + 1))
                assert apply_word(R, word, dom) == extremal_weight(R, level, lam)
                assert dom.level == level
            w1 = demazure_word(R, level, lam)[1]
            w2 = demazure_word(R, level, lam, tie="greatest")[1]
            assert len(w1) == len(w2)
            if level >= theta_pairing(R, lam):
                assert 0 not in w1


def bfs_distance_to_dominant(R, L):
    """Fewest affine reflections taking L to a dominant weight (breadth-first search)."""
    n = R.rank
    seen = {L}
    frontier = [L]
    depth = 0
    while frontier:
        for M in frontier:
            if all(affine_pairing(R, M, i) >= 0 for i in range(n + 1)):
                return depth, M
        nxt = []
        for M in frontier:
            for i in range(n + 1):
                N = affine_reflect(R, i, M)
                if N not in seen:
                    seen.add(N)
                    nxt.append(N)
        frontier = nxt
        depth += 1
    raise AssertionError("no dominant weight reached")


@pytest.mark.parametrize(
    "series,n,cases",
    [
        ("A", 1, [((m,), level) for m in range(6) for level in (1, 2, 3)]),
        ("A", 2, [((a, b), 1) for a in range(3) for b in range(3)]),
        ("D", 4, [((1, 0, 0, 0), 1), ((0, 1, 0, 0), 1), ((1, 0, 1, 1), 2), ((0, 0, 1, 1), 1)]),
    ],
)
def test_demazure_word_is_reduced(series, n, cases):
    R = rs(series, n)
    for c, level in cases:
        dom, word = demazure_word(R, level, Weight(c))
        depth, target = bfs_distance_to_dominant(R, extremal_weight(R, level, Weight(c)))
        assert (len(word), dom) == (depth, target)


def test_demazure_word_guards(D4):
    with pytest.raises(RootSystemError):
        demazure_word(D4, 0, Weight.zero(4))
    with pytest.raises(RootSystemError):
        demazure_word(D4, 1, Weight((-1, 0, 0, 0)))
