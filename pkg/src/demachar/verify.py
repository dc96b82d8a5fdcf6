"""Verification suites: exhaustive and property checks over ranges of ranks.

Each suite expands into a list of independent cases.  A case is a plain
tuple handed to a module-level function, so cases can be farmed out to
worker processes; results are merged back in case order, which keeps the
report independent of the number of workers.
"""

from __future__ import annotations

import itertools
import multiprocessing
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import characters as C
from ._kernels import BudgetExceeded
from ._support import product_support_size, support_size
from .affine import demazure_word, theta_pairing
from .drinfeld import (
    DrinfeldMonomial,
    factorize,
    graded_limit_char,
    validate_P1,
    wt,
)
from .gendem import consistency_report, flag_of, gendem_char, gendem_expansion, recursive_expansion
from .interlacing import (
    beta_lambda,
    brute_force_pairs,
    interlace_decompose,
    is_demiso_case,
    nu_zero,
    p1_weights,
    r_set,
    r_set_closed_form,
    verify_interlacing,
)
from .rootsys import RankedType, Weight, build_root_system

__all__ = ["SUITES", "SuiteReport", "run_suite", "parse_ranks", "main_theorem_case"]


@dataclass
class SuiteReport:
    suite: str
    ranks: tuple
    properties: dict = field(default_factory=dict)
    cases: list = field(default_factory=list)
    status: dict = field(default_factory=dict)

    def record(self, prop: str, ok: bool, payload=None) -> None:
        entry = self.properties.setdefault(prop, {"property": prop, "passed": True, "checked": 0})
        entry["checked"] += 1
        if not ok and entry["passed"]:
            entry["passed"] = False
            entry["counterexample"] = payload

    @property
    def passed(self) -> bool:
        return all(p["passed"] for p in self.properties.values())

    def as_dict(self) -> dict:
        out = {
            "suite": self.suite,
            "ranks": list(self.ranks),
            "passed": self.passed,
            "properties": [self.properties[k] for k in sorted(self.properties)],
        }
        if self.status:
            out["status_counts"] = {k: self.status[k] for k in sorted(self.status)}
        if self.cases:
            out["cases"] = self.cases
        return out


def parse_ranks(text: str) -> tuple:
    """'4..8' or '5' -> (lo, hi)."""
    if ".." in text:
        lo, hi = text.split("..", 1)
    else:
        lo = hi = text
    lo, hi = int(lo), int(hi)
    if lo > hi:
        raise ValueError(f"empty rank range {text!r}")
    return lo, hi


def _D(n: int):
    return build_root_system(RankedType("D", n))


def _A(n: int):
    return build_root_system(RankedType("A", n))


def _coords(w) -> list:
    return list(w.coords)


def _box(n: int, hi: int):
    return itertools.product(range(hi + 1), repeat=n)


# ---------------------------------------------------------------------------
# interlacing and the root lemmas


def _interlacing_case(n: int) -> list:
    R = _D(n)
    out = []
    for lam in p1_weights(R):
        pair = interlace_decompose(R, lam)
        found = brute_force_pairs(R, lam)
        payload = {"rank": n, "lambda": _coords(lam)}
        out.append(("decomposition-valid", verify_interlacing(R, pair.part1, pair.part2) and pair.total == lam, payload))
        out.append(("unique-up-to-swap", set(found) == {pair, pair.swapped()}, payload))
    return out


def _lemmas_case(n: int) -> list:
    R = _D(n)
    roots = R.positive_roots
    out = []
    for lam in p1_weights(R):
        pair = interlace_decompose(R, lam)
        diff = pair.part1 - pair.part2
        spin_one = lam.coords[n - 2] + lam.coords[n - 1] == 1
        ok = True
        for a in roots:
            v = abs(R.pairing(diff, a))
            bound = 1 if (R.is_alpha_shaped(a) or spin_one) else 2
            ok = ok and v <= bound
        payload = {"rank": n, "lambda": _coords(lam)}
        out.append(("pairing-bounds", ok, payload))
        rs = r_set(R, pair)
        closed = r_set_closed_form(R, pair)
        out.append(("r-set-closed-form", sorted(map(R.root_label, rs)) == [R.root_label(b) for b in closed], payload))
        data = beta_lambda(R, pair)
        out.append(("r-set-empty-iff-exception", (not rs) == is_demiso_case(R, lam) == (data is None), payload))
        if data is not None:
            out.append(("beta-in-r-set", data.beta in rs, payload))
            _, nxt = nu_zero(R, pair)
            out.append(("nu-zero-interlacing", verify_interlacing(R, nxt.part1, nxt.part2), payload))
    return out


# ---------------------------------------------------------------------------
# Demazure engine


def _engine_case(series: str, n: int, lam: tuple, level: int) -> list:
    R = build_root_system(RankedType(series, n))
    lam = Weight(lam)
    payload = {"type": f"{series}{n}", "level": level, "lambda": list(lam.coords)}
    ch = C.demazure_char(R, level, lam)
    out = [("grade-zero-is-classical", ch.grade_slice(0) == R.classical_character(lam), payload)]
    out.append(("generator-at-grade-zero", ch.coefficient(lam, 0) == 1 and min(ch.grades()) == 0, payload))
    out.append(("weyl-symmetric", ch.is_weyl_symmetric(), payload))
    other = C.demazure_char(R, level, lam, tie="greatest")
    _, w1 = demazure_word(R, level, lam)
    _, w2 = demazure_word(R, level, lam, tie="greatest")
    out.append(("tie-break-independent", other == ch and len(w1) == len(w2), payload))
    if level >= theta_pairing(R, lam):
        out.append(("high-level-is-classical", ch.grades() == [0] and 0 not in w1, payload))
    return out


def _engine_cases(lo: int, hi: int) -> list:
    cases = []
    for n in range(lo, hi + 1):
        bound = 2 if n == 4 else 1
        for level in (1, 2):
            cases += [("D", n, lam, level) for lam in _box(n, bound)]
    for n in (1, 2, 3):
        for level in (1, 2):
            cases += [("A", n, lam, level) for lam in _box(n, 2)]
    return cases


def _hand_example() -> list:
    R = _A(1)
    ch = C.demazure_char(R, 1, (2,))
    want = {((2,), 0): 1, ((0,), 0): 1, ((-2,), 0): 1, ((0,), 1): 1}
    got = {(w.coords, g): m for (w, g), m in ch.items()}
    return [("A1-hand-example", got == want and ch.dimension() == 4, {"got": sorted(map(list, got))})]


def _multiplicativity_case(series: str, n: int, lam: tuple) -> list:
    R = build_root_system(RankedType(series, n))
    dim = C.demazure_char(R, 1, lam).dimension()
    want = 1
    for i, c in enumerate(lam):
        want *= C.demazure_char(R, 1, Weight.fundamental(n, i + 1)).dimension() ** c
    return [("level-one-multiplicative", dim == want, {"type": f"{series}{n}", "lambda": list(lam), "dim": dim, "product": want})]


# ---------------------------------------------------------------------------
# main theorem


def _budget_sizes(R, pair, nu, budget: int) -> dict:
    """Exact term counts of the characters in the identities, cheapest first.

    Counts come from irreducible expansions; the engine only runs on
    expansions, whose intermediate arrays are smaller than the characters.
    The level-one factors and their product are counted before any
    level-two module, so an over-budget product ends the case early.  The
    returned dict stops at the first count above the budget.
    """
    sizes: dict = {}
    a = C.demazure_expansion(R, 1, pair.part1 + nu, budget=budget)
    b = C.demazure_expansion(R, 1, pair.part2 + nu, budget=budget)
    sizes["D(1,l1+nu)"] = support_size(R, a)
    sizes["D(1,l2+nu)"] = support_size(R, b)
    if max(sizes.values()) > budget:
        return sizes
    sizes["product"] = product_support_size(R, a, b, limit=budget)
    if sizes["product"] > budget:
        return sizes
    for s, mu in flag_of(R, pair, nu).summands():
        e = C.demazure_expansion(R, 2, mu, budget=budget)
        sizes[f"D(2,{list(mu.coords)})"] = support_size(R, e)
        if sizes[f"D(2,{list(mu.coords)})"] > budget:
            return sizes
    g = gendem_expansion(R, pair, nu, budget=budget)
    sizes["gendem"] = support_size(R, g)
    return sizes


def main_theorem_case(n: int, lam: tuple, nu: tuple, budget: int = C.DEFAULT_BUDGET) -> dict:
    """Dimension additivity, sandwich bounds and recursion agreement for one (pair, nu)."""
    R = _D(n)
    lam, nu = Weight(lam), Weight(nu)
    pair = interlace_decompose(R, lam)
    case = {"rank": n, "lambda1": _coords(pair.part1), "lambda2": _coords(pair.part2), "nu": _coords(nu)}
    try:
        sizes = _budget_sizes(R, pair, nu, budget)
    except BudgetExceeded as exc:
        return {"case": case, "status": "over-budget", "reason": str(exc)}
    case["terms"] = sizes
    if max(sizes.values()) > budget:
        return {"case": case, "status": "over-budget", "reason": "some character has more than the budgeted terms"}
    rep = consistency_report(R, pair, nu, budget=budget)
    closed = gendem_expansion(R, pair, nu, budget=budget)
    rec = recursive_expansion(R, pair, nu, budget=budget)
    checks = {c.name: c.as_dict() for c in rep.checks}
    checks["recursion"] = {"name": "recursion", "passed": rec == closed}
    ok = rep.passed and rec == closed
    return {"case": case, "status": "pass" if ok else "fail", "flag": rep.flag.as_dict(), "checks": checks}


def _main_cases(lo: int, hi: int, budget: int) -> list:
    cases = []
    for n in range(lo, hi + 1):
        R = _D(n)
        for lam in p1_weights(R):
            for nu in _box(n, 1):
                cases.append((n, lam.coords, nu, budget))
    return cases


# ---------------------------------------------------------------------------
# degenerations and the Drinfeld layer


def _typeA_case(n: int, lam: tuple, nu: tuple) -> list:
    R = _A(n)
    pair = interlace_decompose(R, lam)
    flag = flag_of(R, pair, nu)
    mu = pair.total + Weight(nu) + Weight(nu)
    same = len(flag) == 1 and gendem_char(R, pair, nu) == C.demazure_char(R, 2, mu)
    return [("type-A-one-step", same, {"type": f"A{n}", "lambda": list(lam), "nu": list(nu)})]


def _demiso_case(n: int) -> list:
    R = _D(n)
    out = []
    for lam in p1_weights(R):
        if not is_demiso_case(R, lam):
            continue
        pair = interlace_decompose(R, lam)
        for nu in _box(n, 1):
            out.append(("demiso-one-step", len(flag_of(R, pair, nu)) == 1, {"rank": n, "lambda": _coords(lam), "nu": list(nu)}))
    return out


def _drinfeld_case(n: int, bound: int) -> list:
    R = _D(n)
    image = set()
    out = []
    by_wt: dict = {}
    for k in range(n + 1):
        for nodes in itertools.combinations(range(1, n + 1), k):
            for ex in itertools.product(range(-bound, bound + 1), repeat=k):
                m = DrinfeldMonomial(tuple(zip(nodes, ex)))
                if not validate_P1(R, m):
                    continue
                w = wt(R, m)
                image.add(w.coords)
                a, b = factorize(R, m)
                pair = interlace_decompose(R, w)
                ok = a * b == m and wt(R, a) == pair.part1 and wt(R, b) == pair.part2
                out.append(("factorize-round-trip", ok, {"monomial": m.as_dict()}))
                by_wt.setdefault(w.coords, []).append(m)
    out.append(("wt-image-is-P1", image == {w.coords for w in p1_weights(R)}, {"missing": sorted(set(map(tuple, (w.coords for w in p1_weights(R)))) - image)}))
    for w, ms in sorted(by_wt.items()):
        first = graded_limit_char(R, ms[0])
        ok = all(graded_limit_char(R, m) == first for m in ms[1:])
        out.append(("graded-limit-depends-on-wt", ok, {"wt": list(w)}))
    return out


def _cluster_case(n: int) -> list:
    from .drinfeld import HeightFunction, cluster_root_monomial, root_nodes

    R = _D(n)
    out = []
    for start in (0, 1):
        vals = [start + (i % 2) for i in range(n - 1)]
        vals.append(vals[-1])
        for xi in (HeightFunction(vals), HeightFunction([1 - v for v in vals])):
            for a in R.positive_roots:
                if not R.is_alpha_shaped(a):
                    continue
                ms = cluster_root_monomial(R, xi, a)
                want = Weight(tuple(int(c > 0) for c in a.coords))
                ok = 1 <= len(ms) <= 2 and all(validate_P1(R, m) and wt(R, m) == want for m in ms)
                ok = ok and all(m.nodes == root_nodes(R, a) for m in ms)
                out.append(("cluster-monomials", ok, {"xi": list(xi.values), "root": list(a.coords)}))
    return out


# ---------------------------------------------------------------------------
# driver


def _run(fn_args):
    fn, args = fn_args
    return fn(*args)


SUITES: dict = {}


def _suite(name: str):
    def deco(f: Callable):
        SUITES[name] = f
        return f

    return deco


@_suite("interlacing")
def _s_interlacing(lo, hi, budget):
    return [(_interlacing_case, (n,)) for n in range(max(lo, 4), hi + 1)]


@_suite("lemmas")
def _s_lemmas(lo, hi, budget):
    return [(_lemmas_case, (n,)) for n in range(max(lo, 4), hi + 1)]


@_suite("demazure-engine")
def _s_engine(lo, hi, budget):
    return [(_hand_example, ())] + [(_engine_case, c) for c in _engine_cases(max(lo, 4), hi)]


@_suite("multiplicativity")
def _s_mult(lo, hi, budget):
    cases = [(_multiplicativity_case, ("D", n, lam)) for n in range(max(lo, 4), hi + 1) for lam in _box(n, 2 if n == 4 else 1)]
    return cases + [(_multiplicativity_case, ("A", 3, lam)) for lam in _box(3, 2)]


@_suite("main-theorem")
def _s_main(lo, hi, budget):
    return [(main_theorem_case, c) for c in _main_cases(max(lo, 4), hi, budget)]


@_suite("degenerations")
def _s_degen(lo, hi, budget):
    cases = [(_typeA_case, (n, lam, nu)) for n in (1, 2, 3) for lam in _box(n, 1) for nu in _box(n, 1)]
    return cases + [(_demiso_case, (n,)) for n in range(max(lo, 4), hi + 1)]


@_suite("drinfeld")
def _s_drinfeld(lo, hi, budget):
    return [(_drinfeld_case, (n, 8)) for n in range(max(lo, 4), hi + 1)] + [(_cluster_case, (n,)) for n in range(max(lo, 4), hi + 1)]


DEFAULT_RANKS = {
    "interlacing": (4, 8),
    "lemmas": (4, 8),
    "demazure-engine": (4, 4),
    "multiplicativity": (4, 4),
    "main-theorem": (4, 5),
    "degenerations": (4, 6),
    "drinfeld": (4, 4),
}


def run_suite(name: str, ranks: Optional[tuple] = None, jobs: int = 1, budget: int = C.DEFAULT_BUDGET, progress=None) -> SuiteReport:
    """Run a suite; raises KeyError for an unknown name."""
    make = SUITES[name]
    lo, hi = ranks or DEFAULT_RANKS[name]
    work = make(lo, hi, budget)
    rep = SuiteReport(name, (lo, hi))
    if jobs > 1 and len(work) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(jobs) as pool:
            results = list(pool.imap(_run, work, chunksize=1))
    else:
        results = []
        for k, w in enumerate(work):
            results.append(_run(w))
            if progress is not None:
                progress(k + 1, len(work))
    for res in results:
        if isinstance(res, dict):
            rep.cases.append(res)
            rep.status[res["status"]] = rep.status.get(res["status"], 0) + 1
            for name, check in res.get("checks", {}).items():
                rep.record(name, check["passed"], res["case"])
        else:
            for prop, ok, payload in res:
                rep.record(prop, bool(ok), payload)
    return rep
