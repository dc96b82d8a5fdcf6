import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from demachar import characters as C
from demachar._kernels import BudgetExceeded
from demachar.affine import AffineWeight, affine_pairing, affine_reflect, demazure_word
from demachar.characters import (
    AffineCharacter,
    CharacterError,
    GradedCharacter,
    char_product,
    demazure_char,
    demazure_expansion,
    demazure_operator,
    grade_shift,
    peel_decompose,
    specialize_and_decompose,
)
from demachar.rootsys import RootSystemError, Weight

from .conftest import rs


def string_rule(R, i, terms):
    """Demazure operator on {AffineWeight: mult}, one monomial at a time (oracle)."""
    out = {}
    for L, c in terms.items():
        m = affine_pairing(R, L, i)
        if m == -1:
            continue
        if m >= 0:
            ks, sign = range(0, m + 1), 1
        else:
            ks, sign = range(1, -m), -1
        # walk the alpha_i-string by reflecting partial steps: L - k alpha_i
        for k in ks:
            step = -k if m >= 0 else k
            if i == 0:
                f = L.finite + R.root_to_weight(R.theta) * (-step)
                M = AffineWeight(f, L.level, L.degree + step)
            else:
                M = AffineWeight(L.finite + R.root_to_weight(R.simple_root(i)) * step, L.level, L.degree)
            out[M] = out.get(M, 0) + sign * c
    return {k: v for k, v in out.items() if v}


def oracle_char(R, level, lam):
    dom, word = demazure_word(R, level, Weight(lam))
    terms = {dom: 1}
    for j in reversed(word):
        terms = string_rule(R, j, terms)
    return {(L.finite, L.degree): m for L, m in terms.items()}


def as_dict(ch):
    return {k: m for k, m in ch.items()}


def test_a1_hand_example(A1):
    ch = demazure_char(A1, 1, (2,))
    want = {(Weight((2,)), 0): 1, (Weight((0,)), 0): 1, (Weight((-2,)), 0): 1, (Weight((0,)), 1): 1}
    assert as_dict(ch) == want
    assert ch.dimension() == 4


def test_a1_operator_example(A1):
    f = AffineCharacter.monomial(A1, AffineWeight(Weight((2,)), 1, 0))
    got = demazure_operator(1, f)
    assert {L: m for L, m in got.affine_items()} == {AffineWeight(Weight((k,)), 1, 0): 1 for k in (2, 0, -2)}
    g = AffineCharacter.monomial(A1, AffineWeight(Weight((-1,)), 1, 0))
    assert len(demazure_operator(1, g)) == 0


def test_level_zero_weight_is_unit(D4):
    for level in (1, 2, 3):
        assert as_dict(demazure_char(D4, level, (0, 0, 0, 0))) == {(Weight.zero(4), 0): 1}


@pytest.mark.parametrize(
    "series,n,cases",
    [
        ("A", 1, [((m,), level) for m in range(7) for level in (1, 2, 3)]),
        ("A", 2, [(c, level) for c in itertools.product(range(3), repeat=2) for level in (1, 2)]),
        ("D", 4, [((1, 0, 1, 1), 1), ((1, 0, 1, 1), 2), ((0, 1, 0, 0), 1), ((2, 0, 0, 1), 2), ((0, 0, 1, 1), 1)]),
    ],
)
def test_engine_matches_string_rule_oracle(series, n, cases):
    R = rs(series, n)
    for lam, level in cases:
        assert as_dict(demazure_char(R, level, lam)) == oracle_char(R, level, lam)


def test_a1_dimensions():
    """For sl2, dim D(l, m) = (l + 1)**q * (r + 1) where m = q*l + r."""
    A1 = rs("A", 1)
    for level in (1, 2, 3, 4):
        for m in range(0, 11):
            q, r = divmod(m, level)
            assert demazure_char(A1, level, (m,)).dimension() == (level + 1) ** q * (r + 1)


@pytest.mark.parametrize("lam,level", [((1, 0, 1, 1), 2), ((2, 1, 0, 1), 2), ((1, 1, 1, 1), 1)])
def test_numpy_backend_agrees(D4, monkeypatch, lam, level):
    fast = demazure_char(D4, level, lam)
    fast_exp = demazure_expansion(D4, level, lam)
    monkeypatch.setenv("DEMACHAR_BACKEND", "numpy")
    C.clear_engine_cache()
    try:
        assert demazure_char(D4, level, lam) == fast
        assert demazure_expansion(D4, level, lam) == fast_exp
    finally:
        C.clear_engine_cache()


@pytest.mark.parametrize("series,n,bound", [("D", 4, 2), ("A", 3, 2)])
def test_engine_invariants(series, n, bound):
    R = rs(series, n)
    for c in itertools.product(range(bound + 1), repeat=n):
        if sum(c) > 4:
            continue
        for level in (1, 2):
            ch = demazure_char(R, level, c)
            assert ch.coefficient(Weight(c), 0) == 1
            assert min(ch.grades()) == 0
            assert ch.is_nonnegative()
            assert ch.grade_slice(0) == R.classical_character(Weight(c))
            assert ch.is_weyl_symmetric()
            assert demazure_char(R, level, c, tie="greatest") == ch
            assert demazure_expansion(R, level, c).expand() == ch


def test_high_level_collapses(D4):
    for c in itertools.product(range(2), repeat=4):
        lam = Weight(c)
        level = max(1, D4.pairing(lam, D4.theta))
        ch = demazure_char(D4, level, lam)
        assert ch.grades() == [0] and ch.grade_slice(0) == D4.classical_character(lam)


def random_affine(R, level, data):
    terms = {}
    for coords, deg, m in data:
        terms[(Weight(coords), deg)] = m
    return AffineCharacter(R, level, {k: v for k, v in terms.items() if v})


affine_terms = st.lists(
    st.tuples(st.tuples(*[st.integers(-3, 3)] * 4), st.integers(-2, 2), st.integers(-3, 3)), max_size=12
)


@given(affine_terms, st.integers(0, 4), st.integers(1, 3))
def test_operator_idempotent(data, i, level):
    R = rs("D", 4)
    f = random_affine(R, level, data)
    g = demazure_operator(i, f)
    assert demazure_operator(i, g) == g
    want = string_rule(R, i, {L: m for L, m in f.affine_items()})
    assert {L: m for L, m in g.affine_items()} == want


def test_operator_guards(D4):
    f = AffineCharacter(D4, 1, {})
    with pytest.raises(RootSystemError):
        demazure_operator(5, f)
    with pytest.raises(CharacterError):
        AffineCharacter(D4, 1, {AffineWeight(Weight.zero(4), 2, 0): 1})


graded = st.lists(st.tuples(st.tuples(*[st.integers(-2, 2)] * 4), st.integers(0, 3), st.integers(-3, 3)), max_size=8)


def mk(R, data):
    acc = {}
    for c, g, m in data:
        acc[(Weight(c), g)] = acc.get((Weight(c), g), 0) + m
    return GradedCharacter(R, {k: v for k, v in acc.items() if v})


@given(graded, graded, graded)
def test_product_ring_laws(a, b, c):
    R = rs("D", 4)
    f, g, h = mk(R, a), mk(R, b), mk(R, c)
    unit = GradedCharacter.unit(R)
    assert f * unit == f
    assert f * g == g * f
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert grade_shift(-1, grade_shift(1, f)) == f
    assert grade_shift(0, f) == f


def test_product_examples(A1, D4):
    v = GradedCharacter(A1, {(Weight((1,)), 0): 1, (Weight((-1,)), 0): 1})
    assert as_dict(char_product(v, v)) == {(Weight((2,)), 0): 1, (Weight((0,)), 0): 2, (Weight((-2,)), 0): 1}
    lam, mu = Weight((1, 0, 0, 0)), Weight((0, 1, 0, 0))
    prod = GradedCharacter(D4, {(lam, 2): 1}) * GradedCharacter(D4, {(mu, 3): 1})
    assert as_dict(prod) == {(lam + mu, 5): 1}
    assert as_dict(grade_shift(2, GradedCharacter(D4, {(lam, 0): 1}))) == {(lam, 2): 1}
    with pytest.raises(CharacterError):
        v * GradedCharacter.unit(D4)


def test_specialize_examples(A1, D4):
    dim, per = specialize_and_decompose(GradedCharacter.unit(D4))
    assert dim == 1 and per == [(0, [(Weight.zero(4), 1)])]
    dim, per = specialize_and_decompose(demazure_char(A1, 1, (2,)))
    assert dim == 4 and per == [(0, [(Weight((2,)), 1)]), (1, [(Weight((0,)), 1)])]
    sq = GradedCharacter(A1, {(Weight((2,)), 0): 1, (Weight((0,)), 0): 2, (Weight((-2,)), 0): 1})
    assert specialize_and_decompose(sq)[1] == [(0, [(Weight((2,)), 1), (Weight((0,)), 1)])]


def test_specialize_rejects_non_modules(A1):
    with pytest.raises(CharacterError):
        specialize_and_decompose(GradedCharacter(A1, {(Weight((2,)), 0): 1}))
    bad = GradedCharacter(A1, {(Weight((2,)), 0): 1, (Weight((-2,)), 0): 1})
    with pytest.raises(CharacterError):
        specialize_and_decompose(bad)
    with pytest.raises(CharacterError):
        peel_decompose(bad)


@pytest.mark.parametrize("lam,level", [((1, 0, 1, 1), 2), ((0, 2, 0, 0), 1), ((1, 1, 0, 0), 2)])
def test_fast_decomposition_matches_peeling(D4, lam, level):
    ch = demazure_char(D4, level, lam)
    dim, per = specialize_and_decompose(ch)
    assert dim == ch.dimension()
    assert (dim, per) == peel_decompose(ch)


def test_json_roundtrip_and_order(D4):
    ch = demazure_char(D4, 2, (1, 0, 1, 1))
    text = ch.to_json()
    data = json.loads(text)
    assert list(data) == ["rank", "series", "terms"]
    keys = [(t["grade"], t["wt"]) for t in data["terms"]]
    assert keys == sorted(keys)
    assert GradedCharacter.from_json(text) == ch
    assert GradedCharacter.from_json(text).to_json() == text


def test_zero_multiplicities_never_stored(D4):
    f = GradedCharacter(D4, {(Weight.zero(4), 0): 1})
    assert len(f - f) == 0
    assert len(GradedCharacter(D4, {(Weight.zero(4), 0): 0})) == 0


def test_budget(D4):
    C.clear_engine_cache()
    with pytest.raises(BudgetExceeded):
        demazure_char(D4, 1, (1, 1, 1, 1), budget=50)
    assert demazure_char(D4, 1, (1, 1, 1, 1)).dimension() == 8 * 29 * 8 * 8  # D(1, omega_2) = V(omega_2) + trivial


def test_bad_arguments(D4):
    with pytest.raises(CharacterError):
        demazure_char(D4, 0, (1, 0, 0, 0))
    with pytest.raises(CharacterError):
        demazure_char(D4, 1, (-1, 0, 0, 0))


def test_wide_coefficients_fall_back_exactly(D4):
    """Coefficients past the int64 range are carried as Python integers."""
    big = 1 << 70
    f = GradedCharacter(D4, {(Weight((1, 0, 0, 0)), 0): big})
    g = demazure_operator(1, AffineCharacter(D4, 1, {(Weight((1, 0, 0, 0)), 0): big}))
    assert {L.finite: m for L, m in g.affine_items()} == {Weight((1, 0, 0, 0)): big, Weight((-1, 1, 0, 0)): big}
    assert (f * f).coefficient(Weight((2, 0, 0, 0)), 0) == big * big


def test_expansion_times_matches_product(D4):
    a = demazure_char(D4, 1, (1, 0, 0, 1))
    b = demazure_char(D4, 1, (0, 0, 1, 0))
    lhs = demazure_expansion(D4, 1, (1, 0, 0, 1)).times(b)
    assert lhs == (a * b).expansion()
    assert lhs.dimension() == a.dimension() * b.dimension()
