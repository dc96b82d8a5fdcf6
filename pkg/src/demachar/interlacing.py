"""Interlacing pairs in P+(1) and the root data that drives the flag recursion.

A weight in P+(1) splits into two parts whose supports alternate along the
Dynkin diagram; in type D the two spin nodes travel together.  For such a
pair we compute the distinguished root beta_lambda = beta_{p',p+1}, the set of
beta roots on which the parts differ by 2, and the shift nu_0 that turns the
pair (part1 - beta_lambda, part2) back into an interlacing pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

from .rootsys import RootSystem, RootVec, Weight

__all__ = [
    "InterlacingError",
    "InterlacingPair",
    "BetaData",
    "interlace_decompose",
    "verify_interlacing",
    "interlacing_violation",
    "canonical_pair",
    "is_canonical",
    "is_demiso_case",
    "beta_lambda",
    "r_set",
    "r_set_closed_form",
    "nu_zero",
    "brute_force_pairs",
    "p1_weights",
]


class InterlacingError(ValueError):
    """A weight outside P+(1) or a pair that is not interlacing."""


@dataclass(frozen=True)
class InterlacingPair:
    part1: Weight
    part2: Weight

    @property
    def total(self) -> Weight:
        return self.part1 + self.part2

    def swapped(self) -> "InterlacingPair":
        return InterlacingPair(self.part2, self.part1)

    def as_dict(self) -> dict:
        return {"part1": list(self.part1.coords), "part2": list(self.part2.coords)}

    def __str__(self) -> str:
        return f"({self.part1}, {self.part2})"


@dataclass(frozen=True)
class BetaData:
    beta: RootVec
    p: int
    pprime: int


def _spin(R: RootSystem, w: Weight) -> int:
    n = R.rank
    return w.coords[n - 2] + w.coords[n - 1]


def _blocks(R: RootSystem, lam: Weight) -> list:
    """Support of lam cut into blocks, the two spin nodes merged into one."""
    supp = list(lam.support())
    n = R.rank
    blocks = [[i] for i in supp]
    if R.series == "D" and n - 1 in supp and n in supp:
        blocks = [[i] for i in supp if i < n - 1] + [[n - 1, n]]
    return blocks


def _check_p1(R: RootSystem, lam) -> Weight:
    lam = R.weight(lam)
    if not lam.in_P1():
        raise InterlacingError(f"{lam} is not in P+(1)")
    return lam


def interlace_decompose(R: RootSystem, lam) -> InterlacingPair:
    """Split lam in P+(1) by handing support blocks alternately to the two parts.

    The largest block goes to part1, so part1 carries the spin block when
    there is one and otherwise the largest support node.
    """
    lam = _check_p1(R, lam)
    n = R.rank
    parts = ([0] * n, [0] * n)
    for k, block in enumerate(reversed(_blocks(R, lam))):
        for i in block:
            parts[k % 2][i - 1] = 1
    pair = InterlacingPair(Weight(tuple(parts[0])), Weight(tuple(parts[1])))
    bad = interlacing_violation(R, pair.part1, pair.part2)
    if bad is not None:
        raise RuntimeError(f"internal error: decomposition of {lam} fails: {bad}")
    return pair


def interlacing_violation(R: RootSystem, a, b) -> Optional[str]:
    """None when (a, b) is interlacing, else a description of the failed clause."""
    a, b = R.weight(a), R.weight(b)
    n = R.rank
    lam = a + b
    if not lam.in_P1():
        raise_msg = f"sum {lam} is not in P+(1)"
        return raise_msg
    if R.series == "D":
        for r, p in ((a, b), (b, a)):
            if _spin(R, r) > 0 and _spin(R, p) != 0:
                return "both parts meet the spin nodes n-1, n"
    for r, p in ((a, b), (b, a)):
        ones = [i for i in range(1, n + 1) if r.coords[i - 1] == 1]
        for x, i in enumerate(ones):
            for j in ones[x + 1:]:
                if R.series == "D" and (i, j) == (n - 1, n):
                    continue
                if not any(p.coords[s - 1] == 1 for s in range(i + 1, j)):
                    return f"nodes {i} and {j} lie in one part with no node of the other part between them"
    return None


def verify_interlacing(R: RootSystem, a, b) -> bool:
    """Direct check of the definition of an interlacing pair."""
    return interlacing_violation(R, a, b) is None


def is_canonical(R: RootSystem, pair: InterlacingPair) -> bool:
    lam = pair.total
    if not lam.support():
        return pair.part1 == pair.part2
    if R.series == "D" and _spin(R, lam) > 0:
        return _spin(R, pair.part1) > 0
    top = max(lam.support())
    return pair.part1.coords[top - 1] == 1


def canonical_pair(R: RootSystem, a, b) -> InterlacingPair:
    """Order an interlacing pair canonically; raises if it is not interlacing."""
    a, b = R.weight(a), R.weight(b)
    bad = interlacing_violation(R, a, b)
    if bad is not None:
        raise InterlacingError(f"({a}, {b}) is not interlacing: {bad}")
    pair = InterlacingPair(a, b)
    return pair if is_canonical(R, pair) else pair.swapped()


def is_demiso_case(R: RootSystem, lam) -> bool:
    """lam(h_{n-1}+h_n) = 1, or lam = omega_{i-1} + omega_i (+ omega_n when i = n-1), or lam = 0.

    Type A weights always qualify: every positive root is interval shaped.
    """
    lam = _check_p1(R, lam)
    if R.series == "A":
        return True
    n = R.rank
    if _spin(R, lam) == 1 or not lam.support():
        return True
    for i in range(1, n):
        c = [0] * n
        c[i - 1] = 1
        if i >= 2:
            c[i - 2] = 1
        if i == n - 1:
            c[n - 1] = 1
        if lam.coords == tuple(c):
            return True
    return False


def _interval(d: tuple, i: int, j: int) -> int:
    """Sum of d over nodes i..j (1-based, empty when i > j)."""
    return sum(d[s - 1] for s in range(i, j + 1))


def beta_lambda(R: RootSystem, pair: InterlacingPair) -> Optional[BetaData]:
    """beta_{p',p+1} for a canonical pair, or None in the isomorphism cases."""
    lam = pair.total
    if is_demiso_case(R, lam):
        return None
    n = R.rank
    a, b = pair.part1.coords, pair.part2.coords
    ps = [p for p in range(1, n - 1) if a[p] == 1]
    if not ps:
        raise RuntimeError(f"internal error: no admissible p for {pair}")
    p = max(ps)
    d = tuple(x - y for x, y in zip(a, b))
    pps = [q for q in range(1, p + 1) if _interval(d, q, p) == 0]
    if not pps:
        raise RuntimeError(f"internal error: no admissible p' for {pair}")
    pp = max(pps)
    beta = R.beta(pp, p + 1)
    same = int(pp == p)
    if R.pairing(pair.part1, beta) != 3 - same or R.pairing(pair.part2, beta) != 1 - same:
        raise RuntimeError(f"internal error: pairing identities fail for {pair} and beta_{{{pp},{p + 1}}}")
    return BetaData(beta, p, pp)


def r_set(R: RootSystem, pair: InterlacingPair) -> list:
    """All beta_{i,j} with |(part1 - part2)(h_beta)| = 2, by direct pairing."""
    if R.series != "D":
        return []
    n = R.rank
    diff = pair.part1 - pair.part2
    out = []
    for i in range(1, n - 1):
        for j in range(i + 1, n):
            beta = R.beta(i, j)
            if abs(R.pairing(diff, beta)) == 2:
                out.append(beta)
    return out


def r_set_closed_form(R: RootSystem, pair: InterlacingPair) -> list:
    """{alpha_{i,p'-1} + beta_lambda + alpha_{j,p}} subject to the two vanishing conditions."""
    data = beta_lambda(R, pair)
    if data is None:
        return []
    p, pp = data.p, data.pprime
    d = tuple(x - y for x, y in zip(pair.part1.coords, pair.part2.coords))
    out = []
    for i in range(1, R.rank - 1):
        for j in range(i + 1, R.rank):
            if _interval(d, i, pp - 1) or _interval(d, j, p):
                continue
            if R.alpha(i, pp - 1) + data.beta + R.alpha(j, p) == R.beta(i, j):
                out.append(R.beta(i, j))
    return sorted(out, key=lambda r: R.root_label(r))


def nu_zero(R: RootSystem, pair: InterlacingPair) -> tuple:
    """(nu_0, next pair) with next = (part1 - beta_lambda - nu_0, part2 - nu_0), canonical."""
    data = beta_lambda(R, pair)
    if data is None:
        raise InterlacingError(f"{pair} has no beta_lambda")
    n = R.rank
    p, pp = data.p, data.pprime
    b = pair.part2.coords
    nu = [0] * n
    if pp >= 2:
        nu[pp - 2] += b[pp - 2]
    if pp != p:
        nu[p - 1] += b[p - 1]
    nu0 = Weight(tuple(nu))
    lowered = pair.part1 - R.root_to_weight(data.beta)
    if not lowered.is_dominant():
        raise RuntimeError(f"internal error: part1 - beta = {lowered} is not dominant")
    nxt = canonical_pair(R, lowered - nu0, pair.part2 - nu0)
    if interlace_decompose(R, nxt.total) != nxt:
        raise RuntimeError(f"internal error: {nxt} is not the decomposition of its sum")
    return nu0, nxt


def brute_force_pairs(R: RootSystem, lam) -> list:
    """Every ordered split of supp(lam) into two parts that passes the definition."""
    lam = _check_p1(R, lam)
    n = R.rank
    supp = lam.support()
    out = []
    for bits in product((0, 1), repeat=len(supp)):
        a = [0] * n
        for i, bit in zip(supp, bits):
            if bit:
                a[i - 1] = 1
        wa = Weight(tuple(a))
        wb = lam - wa
        if verify_interlacing(R, wa, wb):
            out.append(InterlacingPair(wa, wb))
    return out


def p1_weights(R: RootSystem) -> list:
    """All of P+(1), in lexicographic order."""
    return [Weight(c) for c in product((0, 1), repeat=R.rank)]
