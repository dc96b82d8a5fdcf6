"""Generalized Demazure modules D(lam1 + nu, lam2 + nu) through their flag of level-two Demazure modules.

For an interlacing pair (lam1, lam2) and dominant nu the character is

    ch D(lam1 + nu, lam2 + nu) = sum_k v**R_k ch D(2, mu^k),

where mu^0 = lam1 + lam2 + 2 nu, mu^{k+1} = mu^k - beta_{mu^k} and
R_{k+1} = R_k + r_{mu^k}.  The shifts accumulate because each step of the
recursion multiplies the remainder by v**r.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .characters import (
    DEFAULT_BUDGET,
    GradedCharacter,
    IrreducibleExpansion,
    Violation,
    demazure_char,
    demazure_expansion,
)
from ._support import support_size
from .interlacing import (
    InterlacingError,
    InterlacingPair,
    beta_lambda,
    canonical_pair,
    interlace_decompose,
    nu_zero,
)
from .rootsys import RootSystem, RootVec, Weight

__all__ = [
    "GendemError",
    "FlagStep",
    "FlagDecomposition",
    "res2_floor",
    "beta_r_mu",
    "mu_sequence",
    "flag_of",
    "gendem_char",
    "gendem_expansion",
    "recursive_summands",
    "recursive_expansion",
    "CheckResult",
    "ConsistencyReport",
    "consistency_report",
    "check_character",
    "upper_bound_expansion",
]


class GendemError(ValueError):
    """Invalid input to the flag recursion."""


@dataclass(frozen=True)
class FlagStep:
    mu_k: Weight
    pair_k: InterlacingPair
    beta_k: Optional[RootVec]
    r_k: int
    R_k: int

    def as_dict(self) -> dict:
        return {
            "mu": list(self.mu_k.coords),
            "pair": self.pair_k.as_dict(),
            "beta": None if self.beta_k is None else list(self.beta_k.coords),
            "r": self.r_k,
            "R": self.R_k,
        }


@dataclass(frozen=True)
class FlagDecomposition:
    steps: tuple

    def __post_init__(self):
        if not self.steps:
            raise GendemError("a flag has at least one step")
        if self.steps[-1].beta_k is not None:
            raise GendemError("the last step of a flag carries no beta")

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def mus(self) -> list:
        return [s.mu_k for s in self.steps]

    @property
    def shifts(self) -> list:
        return [s.R_k for s in self.steps]

    def summands(self) -> list:
        """[(cumulative shift, mu^k), ...]."""
        return [(s.R_k, s.mu_k) for s in self.steps]

    def as_dict(self) -> dict:
        return {"steps": [s.as_dict() for s in self.steps]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), separators=(",", ":"))


def _dominant(R: RootSystem, mu) -> Weight:
    mu = R.weight(mu)
    if not mu.is_dominant():
        raise GendemError(f"{mu} is not dominant")
    return mu


def res2_floor(R: RootSystem, mu) -> tuple:
    """(floor(mu/2), res_2 mu) with mu = 2 * half + residue."""
    mu = _dominant(R, mu)
    half = Weight(tuple(c // 2 for c in mu.coords))
    return half, Weight(tuple(c % 2 for c in mu.coords))


def _step_data(R: RootSystem, mu: Weight) -> tuple:
    half, res = res2_floor(R, mu)
    pair = interlace_decompose(R, res)
    data = beta_lambda(R, pair)
    if data is None:
        return pair, None, 0
    r = R.pairing(pair.part1 + half, data.beta) - 1
    return pair, data.beta, r


def beta_r_mu(R: RootSystem, mu) -> Optional[tuple]:
    """(beta_mu, r_mu) or None when res_2 mu has no beta."""
    mu = _dominant(R, mu)
    _, beta, r = _step_data(R, mu)
    return None if beta is None else (beta, r)


def mu_sequence(R: RootSystem, mu) -> FlagDecomposition:
    """Iterate mu -> mu - beta_mu, recording the cumulative grade shifts."""
    mu = _dominant(R, mu)
    cap = 1 + int(R.height(mu))  # each step lowers the height by at least one
    steps = []
    shift = 0
    cur = mu
    while True:
        pair, beta, r = _step_data(R, cur)
        steps.append(FlagStep(cur, pair, beta, r, shift))
        if beta is None:
            break
        if r < 1:
            raise RuntimeError(f"internal error: r = {r} at {cur}")
        nxt = cur - R.root_to_weight(beta)
        if not nxt.is_dominant():
            raise RuntimeError(f"internal error: {cur} - beta = {nxt} is not dominant")
        if len(steps) >= cap:
            raise RuntimeError(f"internal error: flag of {mu} does not terminate")
        cur = nxt
        shift += r
    return FlagDecomposition(tuple(steps))


def _pair_and_nu(R: RootSystem, pair, nu) -> tuple:
    if not isinstance(pair, InterlacingPair):
        a, b = pair
        pair = InterlacingPair(R.weight(a), R.weight(b))
    try:
        pair = canonical_pair(R, pair.part1, pair.part2)
    except InterlacingError as exc:
        raise GendemError(str(exc)) from None
    return pair, _dominant(R, nu)


def flag_of(R: RootSystem, pair, nu) -> FlagDecomposition:
    """The flag of D(lam1 + nu, lam2 + nu)."""
    pair, nu = _pair_and_nu(R, pair, nu)
    return mu_sequence(R, pair.total + nu + nu)


def gendem_char(R: RootSystem, pair, nu, *, budget: int = DEFAULT_BUDGET) -> GradedCharacter:
    """ch_gr D(lam1 + nu, lam2 + nu) as the flag sum of shifted level-two characters."""
    out = GradedCharacter.zero(R)
    for shift, mu in flag_of(R, pair, nu).summands():
        out = out + demazure_char(R, 2, mu, budget=budget).shifted(shift)
    return out


def gendem_expansion(R: RootSystem, pair, nu, *, budget: int = DEFAULT_BUDGET) -> IrreducibleExpansion:
    """Irreducible expansion of the same flag sum."""
    out = IrreducibleExpansion(R, {})
    for shift, mu in flag_of(R, pair, nu).summands():
        out = out + demazure_expansion(R, 2, mu, budget=budget).shifted(shift)
    return out


def recursive_summands(R: RootSystem, pair, nu) -> list:
    """Unfold ch D(l1 + nu, l2 + nu) = ch D(2, l + 2nu) + v**((l1+nu)(h_beta)-1) ch D(l1 - beta + nu, l2 + nu).

    The remainder is rewritten through nu_0 as D(l1' + nu', l2' + nu') with
    nu' = nu + nu_0, and the recursion continues on that pair.
    """
    pair, nu = _pair_and_nu(R, pair, nu)
    out = []
    shift = 0
    while True:
        out.append((shift, pair.total + nu + nu))
        data = beta_lambda(R, pair)
        if data is None:
            return out
        shift += R.pairing(pair.part1 + nu, data.beta) - 1
        nu0, nxt = nu_zero(R, pair)
        a, b = pair.part1 - R.root_to_weight(data.beta) + nu, pair.part2 + nu
        pair, nu = nxt, nu + nu0
        if {a, b} != {pair.part1 + nu, pair.part2 + nu}:
            raise RuntimeError("internal error: nu_0 does not rewrite the remainder")


def recursive_expansion(R: RootSystem, pair, nu, *, budget: int = DEFAULT_BUDGET) -> IrreducibleExpansion:
    out = IrreducibleExpansion(R, {})
    for shift, mu in recursive_summands(R, pair, nu):
        out = out + demazure_expansion(R, 2, mu, budget=budget).shifted(shift)
    return out


# ---------------------------------------------------------------------------
# consistency checks


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    violation: Optional[Violation] = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "detail": self.detail}
        if self.violation is not None:
            out["violation"] = self.violation.as_dict()
        return out


@dataclass
class ConsistencyReport:
    pair: InterlacingPair
    nu: Weight
    flag: FlagDecomposition
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def first_failure(self) -> Optional[CheckResult]:
        return next((c for c in self.checks if not c.passed), None)

    def as_dict(self) -> dict:
        return {
            "pair": self.pair.as_dict(),
            "nu": list(self.nu.coords),
            "flag": self.flag.as_dict(),
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }


def _first_negative(exp: IrreducibleExpansion) -> Optional[Violation]:
    if exp.is_nonnegative():
        return None
    idx = int(np.flatnonzero(np.asarray(exp.vals) < 0)[0])
    (w, g), m = list(exp.items())[idx]
    return Violation(w, g, m, 0)


def _dominant_violation(small: IrreducibleExpansion, big: IrreducibleExpansion, top: int) -> Optional[Violation]:
    """First (dominant weight, grade) where the full character of small exceeds big's.

    Both sides are Weyl symmetric, so dominant weights suffice; grades above
    ``top`` are skipped because small vanishes there.
    """
    big = big._like(*_grades_upto(big, top))
    a = small.dominant_multiplicities()
    b = big.dominant_multiplicities()
    for (w, g), m in a.items():
        if m > b.get((w, g), 0):
            return Violation(w, g, m, b.get((w, g), 0))
    return None


def _grades_upto(x, top: int) -> tuple:
    _, degs = x.P.unpack(x.keys)
    keep = degs <= top
    return x.keys[keep], x.vals[keep]


def upper_bound_expansion(R: RootSystem, pair, nu, *, top: Optional[int] = None, budget: int = DEFAULT_BUDGET) -> IrreducibleExpansion:
    """Expansion of ch D(1, l1 + nu) * ch D(1, l2 + nu), truncated to grades <= top.

    The Klimyk sum runs over the irreducible expansion of one factor against
    the full character of the other; the side is chosen to minimise the
    number of products, (expansion terms) x (full terms).
    """
    pair, nu = _pair_and_nu(R, pair, nu)
    a_w, b_w = pair.part1 + nu, pair.part2 + nu
    ea = demazure_expansion(R, 1, a_w, budget=budget)
    eb = demazure_expansion(R, 1, b_w, budget=budget)
    if len(eb) * support_size(R, ea) < len(ea) * support_size(R, eb):
        ea, a_w, b_w = eb, b_w, a_w
    fb = demazure_char(R, 1, b_w, budget=budget)
    if top is None:
        return ea.times(fb, budget=budget)
    _, da = ea.P.unpack(ea.keys)
    out = IrreducibleExpansion(R, {})
    for g in np.unique(da):
        g = int(g)
        if g > top:
            break
        sel = da == g
        part = ea._like(ea.keys[sel], ea.vals[sel])
        fk, fv = _grades_upto(fb, top - g)
        if fk.size:
            out = out + part.times(fb._like(fk, fv), budget=budget)
    return out


def consistency_report(R: RootSystem, pair, nu, *, budget: int = DEFAULT_BUDGET, upper: bool = True) -> ConsistencyReport:
    """Check dimension additivity, the sandwich bounds and the grade-0 slice.

    The bounds are compared in irreducible multiplicities first: a
    nonnegative difference there is nonnegative at every (weight, grade).
    Only if that fails is the comparison redone weight by weight.
    """
    pair, nu = _pair_and_nu(R, pair, nu)
    flag = mu_sequence(R, pair.total + nu + nu)
    rep = ConsistencyReport(pair, nu, flag)
    parts = [demazure_expansion(R, 2, mu, budget=budget).shifted(s) for s, mu in flag.summands()]
    total = IrreducibleExpansion(R, {})
    for p in parts:
        total = total + p

    # (a) dimensions along the flag, against the recursion through nu_0
    dims = [p.dimension() for p in parts]
    rec = recursive_summands(R, pair, nu)
    rec_dims = [demazure_expansion(R, 2, mu, budget=budget).dimension() for _, mu in rec]
    ok = sum(dims) == total.dimension() == sum(rec_dims) and rec == flag.summands()
    rep.checks.append(CheckResult("dimension", ok, f"flag dims {dims}, total {total.dimension()}, recursion dims {rec_dims}"))

    # (b) lower bound D(2, lam + 2 nu) <= gendem
    lower = parts[0]
    diff = total - lower
    v = _first_negative(diff)
    if v is not None:
        v = _dominant_violation(lower, total, total.top_grade())
    rep.checks.append(CheckResult("lower-bound", v is None, "ch D(2, lam + 2nu) <= gendem", v))

    # (b) upper bound gendem <= D(1, l1 + nu) * D(1, l2 + nu)
    if upper:
        top = total.top_grade()
        up = upper_bound_expansion(R, pair, nu, top=top, budget=budget)
        v = _first_negative(up - total)
        if v is not None:
            v = _dominant_violation(total, up, top)
        rep.checks.append(CheckResult("upper-bound", v is None, "gendem <= ch D(1, l1 + nu) ch D(1, l2 + nu)", v))

    # (c) grade 0 is the irreducible V(lam + 2 nu)
    g0 = {(w, g): m for (w, g), m in total.items() if g == 0}
    want = {(pair.total + nu + nu, 0): 1}
    v = None
    if g0 != want:
        (w, g), m = next(((k, m) for k, m in g0.items() if want.get(k) != m), next(iter(want.items())))
        v = Violation(w, g, m, want.get((w, g), 0))
    rep.checks.append(CheckResult("grade-zero", v is None, "grade-0 slice is V(lam + 2nu)", v))
    return rep


def check_character(R: RootSystem, pair, nu, candidate: GradedCharacter, *, budget: int = DEFAULT_BUDGET) -> ConsistencyReport:
    """The checks of :func:`consistency_report` on an explicit character, coefficient by coefficient.

    Builds both bounds as full characters, so it is meant for small cases
    and for testing a character obtained some other way.
    """
    pair, nu = _pair_and_nu(R, pair, nu)
    flag = mu_sequence(R, pair.total + nu + nu)
    rep = ConsistencyReport(pair, nu, flag)
    lam = pair.total + nu + nu
    dims = [demazure_char(R, 2, mu, budget=budget).dimension() for _, mu in flag.summands()]
    got = candidate.dimension()
    rep.checks.append(CheckResult("dimension", got == sum(dims), f"flag dims {dims}, candidate {got}"))
    lower = demazure_char(R, 2, lam, budget=budget)
    v = lower.first_violation(candidate)
    rep.checks.append(CheckResult("lower-bound", v is None, "ch D(2, lam + 2nu) <= candidate", v))
    upper = demazure_char(R, 1, pair.part1 + nu, budget=budget).product(demazure_char(R, 1, pair.part2 + nu, budget=budget), budget=budget)
    v = candidate.first_violation(upper)
    rep.checks.append(CheckResult("upper-bound", v is None, "candidate <= ch D(1, l1 + nu) ch D(1, l2 + nu)", v))
    want = R.classical_character(lam)
    have = candidate.grade_slice(0)
    v = None
    for w in sorted(set(want) | set(have)):
        if want.get(w, 0) != have.get(w, 0):
            v = Violation(w, 0, have.get(w, 0), want.get(w, 0))
            break
    rep.checks.append(CheckResult("grade-zero", v is None, "grade-0 slice is V(lam + 2nu)", v))
    return rep
