"""Drinfeld monomials with interlacing spectral parameters, and their graded limits.

A monomial omega_{i_1, q^{r_1}} ... omega_{i_k, q^{r_k}} with increasing
nodes is stored as the tuple of (node, r).  Membership in P_Z^+(1) asks that
consecutive exponents differ by the distance of the nodes in the Dynkin
diagram plus two, with alternating signs; in type D a trailing pair of spin
nodes carries equal exponents instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Optional

from .characters import DEFAULT_BUDGET, GradedCharacter
from .gendem import gendem_char
from .interlacing import interlace_decompose
from .rootsys import RootSystem, RootVec, Weight

__all__ = [
    "DrinfeldError",
    "DrinfeldMonomial",
    "HeightFunction",
    "node_distance",
    "validate_P1",
    "membership_violation",
    "wt",
    "factorize",
    "graded_limit_char",
    "cluster_root_monomial",
    "root_nodes",
]


class DrinfeldError(ValueError):
    """Malformed monomial, height function or root, or a non-member where one is required."""


@dataclass(frozen=True)
class DrinfeldMonomial:
    factors: tuple = ()

    def __post_init__(self):
        facs = tuple((int(i), int(r)) for i, r in self.factors)
        nodes = [i for i, _ in facs]
        if any(a >= b for a, b in zip(nodes, nodes[1:])):
            raise DrinfeldError(f"nodes must be strictly increasing, got {nodes}")
        if any(i < 1 for i in nodes):
            raise DrinfeldError("nodes are numbered from 1")
        object.__setattr__(self, "factors", facs)

    @classmethod
    def identity(cls) -> "DrinfeldMonomial":
        return cls(())

    @property
    def nodes(self) -> tuple:
        return tuple(i for i, _ in self.factors)

    @property
    def exponents(self) -> tuple:
        return tuple(r for _, r in self.factors)

    def __mul__(self, other: "DrinfeldMonomial") -> "DrinfeldMonomial":
        return DrinfeldMonomial(tuple(sorted(self.factors + other.factors)))

    def as_dict(self) -> dict:
        return {"factors": [{"node": i, "q_exp": r} for i, r in self.factors]}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "DrinfeldMonomial":
        return cls(tuple((f["node"], f["q_exp"]) for f in data["factors"]))

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return "".join(f"w[{i},q^{r}]" for i, r in self.factors)


@dataclass(frozen=True)
class HeightFunction:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(x) for x in self.values))

    def __call__(self, i: int) -> int:
        return self.values[i - 1]

    def check(self, R: RootSystem) -> None:
        """Raise unless the values define a bipartite orientation of the diagram."""
        n = R.rank
        xi = self.values
        if len(xi) != n:
            raise DrinfeldError(f"height function needs {n} values, got {len(xi)}")
        chain = n - 1 if R.series == "D" else n
        for i in range(1, chain):
            if abs(xi[i] - xi[i - 1]) != 1:
                raise DrinfeldError(f"xi({i}) and xi({i + 1}) must differ by 1")
        if R.series == "D" and xi[n - 1] != xi[n - 2]:
            raise DrinfeldError(f"xi({n - 1}) and xi({n}) must agree")


def node_distance(R: RootSystem, i: int, j: int) -> int:
    """Distance between nodes i < j in the Dynkin diagram."""
    n = R.rank
    if R.series == "D" and j == n and i <= n - 2:
        return n - 1 - i
    if R.series == "D" and (i, j) == (n - 1, n):
        return 2
    return j - i


def _check_nodes(R: RootSystem, m: DrinfeldMonomial) -> None:
    if any(i > R.rank for i in m.nodes):
        raise DrinfeldError(f"node out of range for {R.type}")


def membership_violation(R: RootSystem, m: DrinfeldMonomial) -> Optional[str]:
    """None for members of P_Z^+(1), else the first failed condition."""
    _check_nodes(R, m)
    nodes, exps = m.nodes, m.exponents
    k = len(nodes)
    if k <= 1:
        return None
    n = R.rank
    spin = R.series == "D" and nodes[-2:] == (n - 1, n)
    if spin:
        if exps[-1] != exps[-2]:
            return f"spin nodes {n - 1}, {n} need equal exponents"
        last = k - 2  # constrained pairs (j, j+1) for j < last, 0-based
    else:
        last = k - 1
    sign = 0
    for j in range(last):
        gap = node_distance(R, nodes[j], nodes[j + 1]) + 2
        d = exps[j] - exps[j + 1]
        if abs(d) != gap:
            return f"exponents at nodes {nodes[j]}, {nodes[j + 1]} differ by {d}, need +-{gap}"
        s = 1 if d > 0 else -1
        if sign == s:
            return f"signs do not alternate at nodes {nodes[j]}, {nodes[j + 1]}"
        sign = s
    return None


def validate_P1(R: RootSystem, m: DrinfeldMonomial) -> bool:
    return membership_violation(R, m) is None


def wt(R: RootSystem, m: DrinfeldMonomial) -> Weight:
    _check_nodes(R, m)
    c = [0] * R.rank
    for i in m.nodes:
        c[i - 1] += 1
    return Weight(tuple(c))


def _require_member(R: RootSystem, m: DrinfeldMonomial) -> None:
    bad = membership_violation(R, m)
    if bad is not None:
        raise DrinfeldError(f"{m} is not in P_Z^+(1): {bad}")


def factorize(R: RootSystem, m: DrinfeldMonomial) -> tuple:
    """(m1, m2) with m = m1 m2 and wt(m_s) the canonical interlacing parts of wt(m)."""
    _require_member(R, m)
    pair = interlace_decompose(R, wt(R, m))
    first = tuple((i, r) for i, r in m.factors if pair.part1.coords[i - 1])
    second = tuple((i, r) for i, r in m.factors if not pair.part1.coords[i - 1])
    return DrinfeldMonomial(first), DrinfeldMonomial(second)


def graded_limit_char(R: RootSystem, m: DrinfeldMonomial, *, budget: int = DEFAULT_BUDGET) -> GradedCharacter:
    """ch_gr of the graded limit: D(lam1, lam2) for the interlacing pair of wt(m)."""
    _require_member(R, m)
    pair = interlace_decompose(R, wt(R, m))
    return gendem_char(R, pair, Weight.zero(R.rank), budget=budget)


def root_nodes(R: RootSystem, alpha: RootVec) -> tuple:
    """Support nodes of an interval shaped root."""
    alpha = R._rootvec(alpha.coords if isinstance(alpha, RootVec) else alpha)
    if not R.is_positive_root(alpha) or not R.is_alpha_shaped(alpha):
        raise DrinfeldError(f"{alpha} is not a root of the form alpha_(i,j)")
    return tuple(i + 1 for i, c in enumerate(alpha.coords) if c)


def cluster_root_monomial(R: RootSystem, xi: HeightFunction, alpha: RootVec) -> list:
    """All members with factor nodes supp(alpha) and exponents xi(s) +- 1, sorted."""
    xi.check(R)
    nodes = root_nodes(R, alpha)
    out = []
    for signs in product((-1, 1), repeat=len(nodes)):
        m = DrinfeldMonomial(tuple((s, xi(s) + e) for s, e in zip(nodes, signs)))
        if validate_P1(R, m):
            out.append(m)
    return sorted(out, key=lambda m: m.factors)
