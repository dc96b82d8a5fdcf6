import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from demachar.characters import GradedCharacter, demazure_char
from demachar.gendem import (
    FlagDecomposition,
    GendemError,
    beta_r_mu,
    check_character,
    consistency_report,
    flag_of,
    gendem_char,
    gendem_expansion,
    mu_sequence,
    recursive_expansion,
    recursive_summands,
    res2_floor,
)
from demachar.interlacing import InterlacingPair, interlace_decompose, is_demiso_case, p1_weights
from demachar.rootsys import Weight

from .conftest import rs


def om(n, *idx):
    c = [0] * n
    for i in idx:
        c[i - 1] += 1
    return Weight(tuple(c))


def test_res2_floor_examples(D5):
    nu = Weight((1, 0, 2, 0, 1))
    assert res2_floor(D5, nu + nu) == (nu, Weight.zero(5))
    mu = om(5, 1, 3, 4)
    assert res2_floor(D5, mu) == (Weight.zero(5), mu)
    assert res2_floor(D5, Weight((0, 3, 0, 0, 1))) == (om(5, 2), om(5, 2, 5))
    with pytest.raises(GendemError):
        res2_floor(D5, Weight((0, -1, 0, 0, 0)))


@given(st.tuples(*[st.integers(0, 9)] * 5).map(Weight))
def test_res2_floor_property(mu):
    half, res = res2_floor(rs("D", 5), mu)
    assert half + half + res == mu and res.in_P1()


def test_beta_r_mu_examples(D4):
    assert beta_r_mu(D4, om(4, 1, 3, 4)) == (D4.beta(2, 3), 1)
    assert beta_r_mu(D4, om(4, 1, 3, 4) + om(4, 2, 2)) == (D4.beta(2, 3), 2)
    assert beta_r_mu(D4, Weight((2, 4, 0, 2))) is None


def test_mu_sequence_examples(D4):
    flag = mu_sequence(D4, om(4, 1, 3, 4))
    assert flag.mus == [om(4, 1, 3, 4), om(4, 1, 1)]
    assert flag.shifts == [0, 1]
    assert flag.steps[0].beta_k == D4.beta(2, 3) and flag.steps[-1].beta_k is None
    assert len(mu_sequence(D4, om(4, 3))) == 1
    D6 = rs("D", 6)
    assert mu_sequence(D6, om(6, 4)).mus == [om(6, 4), om(6, 2), Weight.zero(6)]
    for n in (1, 2, 3, 4):
        R = rs("A", n)
        for c in itertools.product(range(3), repeat=n):
            assert len(mu_sequence(R, Weight(c))) == 1


def test_flag_serialization(D4):
    flag = mu_sequence(D4, om(4, 1, 3, 4))
    data = json.loads(flag.to_json())
    assert [s["mu"] for s in data["steps"]] == [[1, 0, 1, 1], [2, 0, 0, 0]]
    assert [s["R"] for s in data["steps"]] == [0, 1]
    assert data["steps"][0]["beta"] == [0, 1, 1, 1] and data["steps"][1]["beta"] is None
    with pytest.raises(ValueError):
        FlagDecomposition(())


@pytest.mark.parametrize("n", [4, 5, 6])
def test_flag_invariants(n):
    R = rs("D", n)
    for lam in p1_weights(R):
        for nu in itertools.product(range(2), repeat=n):
            mu = lam + Weight(nu) + Weight(nu)
            flag = mu_sequence(R, mu)
            assert len(flag) <= 1 + R.height(mu)
            shifts = flag.shifts
            assert shifts[0] == 0 and all(a < b for a, b in zip(shifts, shifts[1:]))
            for s, t in zip(flag.steps, flag.steps[1:]):
                diff = s.mu_k - t.mu_k
                assert diff == R.root_to_weight(s.beta_k) and s.r_k >= 1
                assert t.R_k == s.R_k + s.r_k
            assert all(m.is_dominant() for m in flag.mus)


def test_demiso_examples(D4):
    pair = InterlacingPair(om(4, 3), Weight.zero(4))
    for nu in itertools.product(range(2), repeat=4):
        nu = Weight(nu)
        assert gendem_char(D4, pair, nu) == demazure_char(D4, 2, om(4, 3) + nu + nu)


def test_two_step_example(D4):
    pair = InterlacingPair(om(4, 3, 4), om(4, 1))
    got = gendem_char(D4, pair, Weight.zero(4))
    want = demazure_char(D4, 2, om(4, 1, 3, 4)) + demazure_char(D4, 2, om(4, 1, 1)).shifted(1)
    assert got == want
    rep = consistency_report(D4, pair, Weight.zero(4))
    assert rep.passed and [c.name for c in rep.checks] == ["dimension", "lower-bound", "upper-bound", "grade-zero"]


def test_type_a_single_term():
    R = rs("A", 3)
    for lam in p1_weights(R):
        pair = interlace_decompose(R, lam)
        for nu in itertools.product(range(2), repeat=3):
            nu = Weight(nu)
            assert gendem_char(R, pair, nu) == demazure_char(R, 2, lam + nu + nu)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_one_sided_pairs_are_level_one(n):
    """D(lam, 0) = D(1, lam) tensor a trivial module, so the flag sum must be ch D(1, lam)."""
    R = rs("D", n)
    singles = [om(n, i) for i in range(1, n + 1)] + [om(n, n - 1, n)]
    for lam in singles:
        pair = interlace_decompose(R, lam)
        assert pair.part2 == Weight.zero(n)
        assert gendem_char(R, pair, Weight.zero(n)) == demazure_char(R, 1, lam)


def test_rejects_non_interlacing(D4):
    with pytest.raises(GendemError):
        gendem_char(D4, (om(4, 3), om(4, 4)), Weight.zero(4))
    with pytest.raises(GendemError):
        flag_of(D4, (om(4, 3), Weight.zero(4)), Weight((-1, 0, 0, 0)))


def test_pair_order_is_irrelevant(D5):
    pair = interlace_decompose(D5, om(5, 1, 3, 4))
    nu = om(5, 2)
    assert gendem_char(D5, pair, nu) == gendem_char(D5, pair.swapped(), nu)


def d4_cases():
    R = rs("D", 4)
    for lam in p1_weights(R):
        for nu in itertools.product(range(2), repeat=4):
            if sum(nu) <= 2:
                yield lam, Weight(nu)


def test_expansion_report_matches_full_check():
    R = rs("D", 4)
    for lam, nu in d4_cases():
        pair = interlace_decompose(R, lam)
        fast = consistency_report(R, pair, nu)
        slow = check_character(R, pair, nu, gendem_char(R, pair, nu))
        assert fast.passed and slow.passed
        assert gendem_expansion(R, pair, nu).expand() == gendem_char(R, pair, nu)


def test_recursion_matches_closed_form_d4():
    R = rs("D", 4)
    for lam, nu in d4_cases():
        pair = interlace_decompose(R, lam)
        assert recursive_summands(R, pair, nu) == flag_of(R, pair, nu).summands()
        assert recursive_expansion(R, pair, nu) == gendem_expansion(R, pair, nu)


def test_demiso_lower_bound_is_tight():
    for n in (4, 5):
        R = rs("D", n)
        for lam in p1_weights(R):
            if not is_demiso_case(R, lam):
                continue
            pair = interlace_decompose(R, lam)
            nu = Weight.zero(n)
            assert consistency_report(R, pair, nu).passed
            assert gendem_char(R, pair, nu) == demazure_char(R, 2, lam)


def test_mutations_are_located(D4):
    pair = InterlacingPair(om(4, 3, 4), om(4, 1))
    nu = Weight.zero(4)
    good = gendem_char(D4, pair, nu)
    assert check_character(D4, pair, nu, good).passed

    extra = good + GradedCharacter(D4, {(om(4, 1, 3, 4), 5): 1})
    rep = check_character(D4, pair, nu, extra)
    fail = rep.first_failure()
    assert fail.name == "dimension"
    upper = next(c for c in rep.checks if c.name == "upper-bound")
    assert not upper.passed and (upper.violation.weight, upper.violation.grade) == (om(4, 1, 3, 4), 5)

    missing = good - GradedCharacter(D4, {(Weight.zero(4), 0): good.coefficient(Weight.zero(4), 0)})
    rep = check_character(D4, pair, nu, missing)
    lower = next(c for c in rep.checks if c.name == "lower-bound")
    assert not lower.passed and (lower.violation.weight, lower.violation.grade) == (Weight.zero(4), 0)
    zero = next(c for c in rep.checks if c.name == "grade-zero")
    assert not zero.passed and zero.violation.weight == Weight.zero(4)
