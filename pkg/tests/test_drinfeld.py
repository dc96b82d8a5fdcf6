import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from demachar.characters import GradedCharacter, demazure_char
from demachar.drinfeld import (
    DrinfeldError,
    DrinfeldMonomial,
    HeightFunction,
    cluster_root_monomial,
    factorize,
    graded_limit_char,
    membership_violation,
    node_distance,
    root_nodes,
    validate_P1,
    wt,
)
from demachar.gendem import gendem_char
from demachar.interlacing import interlace_decompose, p1_weights
from demachar.rootsys import Weight

from .conftest import rs


def M(*pairs):
    return DrinfeldMonomial(tuple(pairs))


def om(n, *idx):
    c = [0] * n
    for i in idx:
        c[i - 1] += 1
    return Weight(tuple(c))


def members(R, bound):
    n = R.rank
    for k in range(n + 1):
        for nodes in itertools.combinations(range(1, n + 1), k):
            for ex in itertools.product(range(-bound, bound + 1), repeat=k):
                m = DrinfeldMonomial(tuple(zip(nodes, ex)))
                if validate_P1(R, m):
                    yield m


def test_monomial_invariants():
    with pytest.raises(DrinfeldError):
        M((2, 0), (2, 1))
    with pytest.raises(DrinfeldError):
        M((3, 0), (1, 1))
    with pytest.raises(DrinfeldError):
        M((0, 0))
    m = M((2, 0), (5, 5))
    assert DrinfeldMonomial.from_dict(m.as_dict()) == m
    assert m.to_json() == '{"factors":[{"node":2,"q_exp":0},{"node":5,"q_exp":5}]}'
    assert M((2, 0)) * M((5, 5)) == m


def test_validate_examples(D7):
    assert validate_P1(D7, DrinfeldMonomial.identity())
    for i in range(1, 8):
        assert validate_P1(D7, M((i, 3)))
    assert validate_P1(D7, M((2, 0), (5, 5)))
    assert not validate_P1(D7, M((2, 0), (5, 4)))
    assert "differ" in membership_violation(D7, M((2, 0), (5, 4)))
    with pytest.raises(DrinfeldError):
        validate_P1(rs("D", 4), M((5, 0)))


def test_alternation_and_spin(D5):
    assert validate_P1(D5, M((1, 0), (2, 3), (3, 0)))
    assert not validate_P1(D5, M((1, 0), (2, 3), (3, 6)))
    assert validate_P1(D5, M((4, 2), (5, 2)))
    assert not validate_P1(D5, M((4, 2), (5, 0)))
    # the pair before the spin block keeps its gap; the trailing pair needs equal exponents
    assert validate_P1(D5, M((3, 0), (4, 3), (5, 3)))
    assert not validate_P1(D5, M((3, 0), (4, 3), (5, 4)))


def test_node_distance():
    D6 = rs("D", 6)
    assert node_distance(D6, 2, 5) == 3
    assert node_distance(D6, 2, 6) == 3
    assert node_distance(D6, 4, 6) == 1
    assert node_distance(D6, 5, 6) == 2
    assert node_distance(rs("A", 4), 1, 4) == 3


def test_wt_examples(D7):
    assert wt(D7, DrinfeldMonomial.identity()) == Weight.zero(7)
    assert wt(D7, M((2, 0), (5, 5))) == om(7, 2, 5)


def test_wt_image_d4():
    R = rs("D", 4)
    image = {wt(R, m).coords for m in members(R, 8)}
    assert image == {w.coords for w in p1_weights(R)}


@pytest.mark.parametrize("n", [4, 5])
def test_factorize_round_trip(n):
    R = rs("D", n)
    for m in members(R, 4):
        a, b = factorize(R, m)
        pair = interlace_decompose(R, wt(R, m))
        assert a * b == m
        assert (wt(R, a), wt(R, b)) == (pair.part1, pair.part2)


def test_factorize_examples(D7):
    assert factorize(D7, DrinfeldMonomial.identity()) == (DrinfeldMonomial.identity(), DrinfeldMonomial.identity())
    assert factorize(D7, M((4, 1))) == (M((4, 1)), DrinfeldMonomial.identity())
    # a member of weight omega_2 + omega_3 + omega_5 + omega_6 + omega_7
    m = M((2, 0), (3, 3), (5, -1), (6, 2), (7, 2))
    assert validate_P1(D7, m)
    a, b = factorize(D7, m)
    assert wt(D7, a) == om(7, 3, 6, 7) and wt(D7, b) == om(7, 2, 5)
    with pytest.raises(DrinfeldError):
        factorize(D7, M((2, 0), (5, 4)))


def test_factor_membership_counterexample(D4):
    """The canonical parts need not be members themselves.

    omega_{1,q^r1} omega_{2,q^r2} omega_{3,q^r3} omega_{4,q^r4} is a member iff
    r1 - r2 = +-3, r2 - r3 = -+3 and r3 = r4, which forces r1 = r3.  The part
    on nodes 1, 3, 4 would need r1 - r3 = +-4, so it is never a member.
    """
    m = M((1, 0), (2, 3), (3, 0), (4, 0))
    assert validate_P1(D4, m)
    a, b = factorize(D4, m)
    assert a == M((1, 0), (3, 0), (4, 0)) and b == M((2, 3))
    assert not validate_P1(D4, a)
    both = [m for m in members(D4, 8) if all(validate_P1(D4, f) for f in factorize(D4, m))]
    assert 0 < len(both) < len(list(members(D4, 8)))


def test_graded_limit_depends_on_wt_only():
    R = rs("D", 4)
    by_wt = {}
    for m in members(R, 4):
        by_wt.setdefault(wt(R, m), []).append(m)
    for w, ms in by_wt.items():
        first = graded_limit_char(R, ms[0])
        assert all(graded_limit_char(R, m) == first for m in ms[1:])


def test_graded_limit_examples(D4):
    assert graded_limit_char(D4, DrinfeldMonomial.identity()) == GradedCharacter.unit(D4)
    m = M((1, 0), (3, 4), (4, 4))
    assert validate_P1(D4, m)
    pair = interlace_decompose(D4, om(4, 1, 3, 4))
    assert graded_limit_char(D4, m) == gendem_char(D4, pair, Weight.zero(4))
    for i in range(1, 5):
        assert graded_limit_char(D4, M((i, 0))) == demazure_char(D4, 1, om(4, i))
    with pytest.raises(DrinfeldError):
        graded_limit_char(D4, M((1, 0), (2, 0)))


def height_functions(n):
    for start in (0, 1):
        vals = [start + (i % 2) for i in range(n - 1)]
        vals.append(vals[-1])
        yield HeightFunction(vals)
        yield HeightFunction([1 - v for v in vals])


def test_height_function_check(D5):
    HeightFunction((0, 1, 0, 1, 1)).check(D5)
    with pytest.raises(DrinfeldError):
        HeightFunction((0, 1, 0, 1, 0)).check(D5)
    with pytest.raises(DrinfeldError):
        HeightFunction((0, 2, 0, 1, 1)).check(D5)
    with pytest.raises(DrinfeldError):
        HeightFunction((0, 1)).check(D5)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_cluster_monomials(n):
    R = rs("D", n)
    for xi in height_functions(n):
        for a in R.positive_roots:
            if not R.is_alpha_shaped(a):
                with pytest.raises(DrinfeldError):
                    cluster_root_monomial(R, xi, a)
                continue
            ms = cluster_root_monomial(R, xi, a)
            assert 1 <= len(ms) <= 2
            want = Weight(tuple(int(c > 0) for c in a.coords))
            for m in ms:
                assert validate_P1(R, m) and wt(R, m) == want
                assert all(abs(r - xi(s)) == 1 for s, r in m.factors)
            # brute force over every exponent choice near xi
            nodes = root_nodes(R, a)
            brute = []
            for ex in itertools.product(*[(xi(s) - 1, xi(s) + 1) for s in nodes]):
                m = DrinfeldMonomial(tuple(zip(nodes, ex)))
                if validate_P1(R, m):
                    brute.append(m)
            assert ms == sorted(brute, key=lambda m: m.factors)


def test_cluster_simple_and_adjacent(D5):
    xi = HeightFunction((0, 1, 0, 1, 1))
    assert cluster_root_monomial(D5, xi, D5.simple_root(2)) == [M((2, 0)), M((2, 2))]
    ms = cluster_root_monomial(D5, xi, D5.alpha(1, 2))
    assert ms and all(abs(m.exponents[0] - m.exponents[1]) == 3 for m in ms)


@given(st.lists(st.tuples(st.integers(1, 6), st.integers(-6, 6)), max_size=6, unique_by=lambda t: t[0]))
def test_wt_lands_in_p1_for_members(factors):
    R = rs("D", 6)
    m = DrinfeldMonomial(tuple(sorted(factors)))
    if validate_P1(R, m):
        assert wt(R, m).in_P1()
