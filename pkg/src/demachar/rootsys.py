"""Finite root systems of types A_n and D_n.

Node numbering for D_n: nodes n-1 and n are the spin nodes, node n-2 is
trivalent.  Weights live in fundamental-weight coordinates, roots in
simple-root coordinates, and the Cartan matrix converts between them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "RootSystemError",
    "RankedType",
    "Weight",
    "RootVec",
    "RootSystem",
    "build_root_system",
    "pairing",
    "demazure_exponents",
]


class RootSystemError(ValueError):
    """Invalid type, rank or argument for a root-system operation."""


@dataclass(frozen=True)
class RankedType:
    series: str
    rank: int

    def __post_init__(self):
        if self.series not in ("A", "D"):
            raise RootSystemError(f"unsupported series {self.series!r}")
        if not isinstance(self.rank, int) or isinstance(self.rank, bool):
            raise RootSystemError("rank must be an integer")
        low = 4 if self.series == "D" else 1
        if self.rank < low:
            raise RootSystemError(f"type {self.series} requires rank >= {low}, got {self.rank}")

    def __str__(self) -> str:
        return f"{self.series}{self.rank}"


class _Vec:
    """Shared integer-vector behaviour for weights and roots."""

    __slots__ = ()
    coords: tuple

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def _check(self, other):
        if type(other) is not type(self):
            return NotImplemented
        if len(other.coords) != len(self.coords):
            raise RootSystemError("rank mismatch")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return type(self)(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return type(self)(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return type(self)(tuple(-a for a in self.coords))

    def __mul__(self, k: int):
        return type(self)(tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)


def _as_int_tuple(coords: Iterable[int]) -> tuple:
    out = tuple(int(c) for c in coords)
    for c, o in zip(coords, out):
        if c != o:
            raise RootSystemError(f"non-integer coordinate {c!r}")
    return out


@dataclass(frozen=True, order=True)
class Weight(_Vec):
    """A weight; ``coords[i]`` is the pairing with h_{i+1}."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_int_tuple(self.coords))

    @classmethod
    def zero(cls, rank: int) -> "Weight":
        return cls((0,) * rank)

    @classmethod
    def fundamental(cls, rank: int, i: int) -> "Weight":
        """omega_i, 1-based."""
        if not 1 <= i <= rank:
            raise RootSystemError(f"node {i} out of range 1..{rank}")
        return cls(tuple(int(j == i - 1) for j in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.coords)

    def is_dominant(self) -> bool:
        return all(c >= 0 for c in self.coords)

    def in_P1(self) -> bool:
        return all(c in (0, 1) for c in self.coords)

    def support(self) -> tuple:
        """1-based nodes with nonzero coordinate."""
        return tuple(i + 1 for i, c in enumerate(self.coords) if c)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.coords)) + ")"


@dataclass(frozen=True, order=True)
class RootVec(_Vec):
    """An element of the root lattice in simple-root coordinates."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_int_tuple(self.coords))

    @property
    def rank(self) -> int:
        return len(self.coords)

    def height(self) -> int:
        return sum(self.coords)

    def __str__(self) -> str:
        return "[" + ",".join(map(str, self.coords)) + "]"


def _cartan(t: RankedType) -> np.ndarray:
    n = t.rank
    C = 2 * np.eye(n, dtype=np.int64)
    if t.series == "A":
        for i in range(n - 1):
            C[i, i + 1] = C[i + 1, i] = -1
    else:
        for i in range(n - 2):
            C[i, i + 1] = C[i + 1, i] = -1
        C[n - 3, n - 1] = C[n - 1, n - 3] = -1
    return C


def _weyl_order_of_nodes(C: np.ndarray, nodes: Sequence[int]) -> int:
    """Order of the parabolic subgroup generated by ``nodes`` (0-based).

    Components of subdiagrams of A_n and D_n are of type A or D.
    """
    nodes = set(nodes)
    seen: set = set()
    order = 1
    for s in sorted(nodes):
        if s in seen:
            continue
        comp, stack = [], [s]
        seen.add(s)
        while stack:
            a = stack.pop()
            comp.append(a)
            for b in nodes:
                if b not in seen and C[a, b] != 0:
                    seen.add(b)
                    stack.append(b)
        k = len(comp)
        trivalent = any(sum(1 for b in comp if b != a and C[a, b] != 0) == 3 for a in comp)
        if trivalent:
            order *= 2 ** (k - 1) * math.factorial(k)
        else:
            order *= math.factorial(k + 1)
    return order


class RootSystem:
    """Finite root system data; build through :func:`build_root_system`."""

    def __init__(self, t: RankedType):
        self.type = t
        self.series = t.series
        self.rank = n = t.rank
        self.cartan = _cartan(t)
        self.cartan.setflags(write=False)
        self._cartan_rows = tuple(tuple(int(x) for x in row) for row in self.cartan)
        self._labels: dict = {}
        roots = []
        if t.series == "A":
            for i in range(1, n + 1):
                for j in range(i, n + 1):
                    r = RootVec(tuple(int(i <= s + 1 <= j) for s in range(n)))
                    self._labels[("alpha", i, j)] = r
                    roots.append(r)
            self.theta = self._labels[("alpha", 1, n)]
        else:
            for i in range(1, n + 1):
                for j in range(i, n + 1):
                    r = self._alpha_D(i, j)
                    if r.is_zero():
                        continue
                    self._labels[("alpha", i, j)] = r
                    roots.append(r)
            for i in range(1, n - 1):
                for j in range(i + 1, n):
                    r = self._beta_D(i, j)
                    self._labels[("beta", i, j)] = r
                    roots.append(r)
            self.theta = self._labels[("beta", 1, 2)]
        roots.sort(key=lambda r: (r.height(), r.coords))
        self.positive_roots: tuple = tuple(roots)
        self._root_set = frozenset(r.coords for r in roots)
        self.rho = Weight((1,) * n)

    # -- named roots ---------------------------------------------------
    def _alpha_D(self, i: int, j: int) -> RootVec:
        n = self.rank
        c = [0] * n
        if i > j or (i, j) == (n - 1, n):
            return RootVec(tuple(c))
        if j <= n - 1:
            for s in range(i, j + 1):
                c[s - 1] = 1
        else:
            for s in range(i, n - 1):
                c[s - 1] = 1
            c[n - 1] = 1
        return RootVec(tuple(c))

    def _beta_D(self, i: int, j: int) -> RootVec:
        n = self.rank
        c = [0] * n
        for s in range(i, j):
            c[s - 1] += 1
        for s in range(j, n - 1):
            c[s - 1] += 2
        c[n - 2] += 1
        c[n - 1] += 1
        return RootVec(tuple(c))

    def alpha(self, i: int, j: int) -> RootVec:
        """alpha_{i,j}; the zero vector when i > j or (i, j) = (n-1, n) in type D."""
        n = self.rank
        if not (1 <= i <= n and 0 <= j <= n):
            raise RootSystemError(f"alpha_{{{i},{j}}} out of range")
        if self.series == "D":
            return self._alpha_D(i, j)
        if i > j:
            return RootVec((0,) * n)
        return self._labels[("alpha", i, j)]

    def beta(self, i: int, j: int) -> RootVec:
        """beta_{i,j} for 1 <= i < j <= n-1 (type D only)."""
        if self.series != "D":
            raise RootSystemError("beta roots exist only in type D")
        if not 1 <= i < j <= self.rank - 1:
            raise RootSystemError(f"beta_{{{i},{j}}} needs 1 <= i < j <= n-1")
        return self._labels[("beta", i, j)]

    def simple_root(self, i: int) -> RootVec:
        self.check_node(i)
        return RootVec(tuple(int(s == i - 1) for s in range(self.rank)))

    def root_label(self, r: RootVec) -> tuple | None:
        """('alpha'|'beta', i, j) for a positive root, else None."""
        for k, v in self._labels.items():
            if v == r:
                return k
        return None

    def is_positive_root(self, r: RootVec) -> bool:
        return r.coords in self._root_set

    def is_alpha_shaped(self, r: RootVec) -> bool:
        lab = self.root_label(r)
        return lab is not None and lab[0] == "alpha"

    # -- checks ---------------------------------------------------------
    def check_node(self, i: int) -> None:
        if not (isinstance(i, (int, np.integer)) and 1 <= i <= self.rank):
            raise RootSystemError(f"node {i} out of range 1..{self.rank}")

    def weight(self, coords: Iterable[int]) -> Weight:
        w = coords if isinstance(coords, Weight) else Weight(tuple(coords))
        if len(w) != self.rank:
            raise RootSystemError(f"weight of length {len(w)} for rank {self.rank}")
        return w

    def _rootvec(self, coords) -> RootVec:
        r = coords if isinstance(coords, RootVec) else RootVec(tuple(coords))
        if len(r) != self.rank:
            raise RootSystemError(f"root of length {len(r)} for rank {self.rank}")
        return r

    # -- lattice maps ---------------------------------------------------
    def root_to_weight(self, r: RootVec) -> Weight:
        r = self._rootvec(r)
        n = self.rank
        rows = self._cartan_rows
        return Weight(tuple(sum(r.coords[s] * rows[s][i] for s in range(n)) for i in range(n)))

    def pairing(self, lam: Weight, alpha: RootVec) -> int:
        """lambda(h_alpha); simply laced, so h_alpha has the root's coordinates."""
        lam = self.weight(lam)
        alpha = self._rootvec(alpha)
        return sum(a * b for a, b in zip(lam.coords, alpha.coords))

    def reflect_weight(self, i: int, lam: Weight) -> Weight:
        self.check_node(i)
        lam = self.weight(lam)
        m = lam.coords[i - 1]
        if m == 0:
            return lam
        row = self._cartan_rows[i - 1]
        return Weight(tuple(c - m * r for c, r in zip(lam.coords, row)))

    def reflect_root(self, i: int, r: RootVec) -> RootVec:
        self.check_node(i)
        r = self._rootvec(r)
        m = sum(r.coords[s] * self._cartan_rows[s][i - 1] for s in range(self.rank))
        c = list(r.coords)
        c[i - 1] -= m
        return RootVec(tuple(c))

    def diagram_automorphism(self, lam: Weight) -> Weight:
        """The automorphism -w0 on fundamental coordinates."""
        c = list(self.weight(lam).coords)
        n = self.rank
        if self.series == "A":
            c.reverse()
        elif n % 2 == 1:
            c[n - 2], c[n - 1] = c[n - 1], c[n - 2]
        return Weight(tuple(c))

    def longest_element_image(self, lam: Weight) -> Weight:
        return -self.diagram_automorphism(lam)

    def dominant_conjugate(self, lam: Weight) -> tuple:
        """(dominant weight, reduced word) with lam = s_{j1}...s_{jk} dominant."""
        c = list(self.weight(lam).coords)
        word = []
        rows = self._cartan_rows
        while True:
            i = next((s for s, x in enumerate(c) if x < 0), None)
            if i is None:
                return Weight(tuple(c)), tuple(word)
            m = c[i]
            row = rows[i]
            for s in range(self.rank):
                c[s] -= m * row[s]
            word.append(i + 1)

    def dot_straighten(self, lam: Weight) -> tuple | None:
        """Bott straightening: (sign, kappa) with w(lam+rho)-rho = kappa dominant.

        Returns None when lam+rho is singular.
        """
        c = [x + 1 for x in self.weight(lam).coords]
        sign = 1
        rows = self._cartan_rows
        while True:
            i = next((s for s, x in enumerate(c) if x <= 0), None)
            if i is None:
                return sign, Weight(tuple(x - 1 for x in c))
            m = c[i]
            if m == 0:
                return None
            for s in range(self.rank):
                c[s] -= m * rows[i][s]
            sign = -sign

    def orbit(self, lam: Weight) -> list:
        """Weyl orbit of lam, sorted."""
        lam = self.weight(lam)
        seen = {lam}
        frontier = [lam]
        while frontier:
            nxt = []
            for mu in frontier:
                for i in range(1, self.rank + 1):
                    nu = self.reflect_weight(i, mu)
                    if nu not in seen:
                        seen.add(nu)
                        nxt.append(nu)
            frontier = nxt
        return sorted(seen)

    @cached_property
    def weyl_group_order(self) -> int:
        return _weyl_order_of_nodes(self.cartan, range(self.rank))

    def orbit_size(self, lam: Weight) -> int:
        """|W lam| for dominant lam."""
        lam = self.weight(lam)
        if not lam.is_dominant():
            lam = self.dominant_conjugate(lam)[0]
        zeros = [i for i, c in enumerate(lam.coords) if c == 0]
        return self.weyl_group_order // _weyl_order_of_nodes(self.cartan, zeros)

    # -- inner product (scaled to stay integral) -----------------------
    @cached_property
    def _form(self) -> tuple:
        """(G, d): d * (omega_i, omega_j) = G[i][j] with integers."""
        d = int(round(np.linalg.det(self.cartan.astype(float))))
        inv = np.linalg.inv(self.cartan.astype(float)) * d
        G = np.rint(inv).astype(np.int64)
        if not np.array_equal(G @ self.cartan, d * np.eye(self.rank, dtype=np.int64)):
            raise RootSystemError("inverse Cartan matrix is not integral after scaling")
        return tuple(tuple(int(x) for x in row) for row in G), d

    def scaled_form(self, a: Weight, b: Weight) -> int:
        """det(C) times the invariant form (a, b); (alpha, alpha) = 2."""
        G, _ = self._form
        n = self.rank
        return sum(a.coords[i] * G[i][j] * b.coords[j] for i in range(n) for j in range(n) if G[i][j])

    # -- dominance and characters -------------------------------------
    def height(self, lam: Weight) -> Fraction:
        """Height of lam in simple-root coordinates (rational)."""
        G, d = self._form
        total = sum(lam.coords[i] * G[i][j] for i in range(self.rank) for j in range(self.rank))
        return Fraction(total, d)

    def dominant_weights_below(self, lam: Weight) -> list:
        """All dominant kappa with lam - kappa in Q+, sorted by decreasing height."""
        lam = self.weight(lam)
        if not lam.is_dominant():
            raise RootSystemError(f"{lam} is not dominant")
        roots_w = [self.root_to_weight(r) for r in self.positive_roots]
        seen = {lam}
        frontier = [lam]
        while frontier:
            nxt = []
            for mu in frontier:
                for a in roots_w:
                    nu = mu - a
                    if nu.is_dominant() and nu not in seen:
                        seen.add(nu)
                        nxt.append(nu)
            frontier = nxt
        return sorted(seen, key=self.peel_key, reverse=True)

    def peel_key(self, lam: Weight) -> tuple:
        """Linear extension of dominance: (height, coords)."""
        return (self.height(lam), lam.coords)

    def weyl_dimension(self, lam: Weight) -> int:
        """Weyl dimension formula, exact integer arithmetic."""
        lam = self.weight(lam)
        if not lam.is_dominant():
            raise RootSystemError(f"{lam} is not dominant")
        num = den = 1
        for r in self.positive_roots:
            num *= self.pairing(lam + self.rho, r)
            den *= self.pairing(self.rho, r)
        q, rem = divmod(num, den)
        if rem:
            raise RootSystemError("Weyl dimension formula produced a non-integer")
        return q

    def weyl_dimensions(self, wts: np.ndarray) -> list:
        """Weyl dimension formula for each row of a (k, rank) array of dominant weights."""
        wts = np.asarray(wts, dtype=np.int64).reshape(-1, self.rank)
        if wts.size and wts.min() < 0:
            raise RootSystemError("weyl_dimensions needs dominant weights")
        roots = np.array([r.coords for r in self.positive_roots], dtype=np.int64)
        num = (wts + 1) @ roots.T
        den = math.prod(int(h) for h in roots.sum(axis=1))
        if not num.size or np.log2(num).sum(axis=1).max() < 62:
            return [int(x) // den for x in np.prod(num, axis=1)]
        return [math.prod(int(x) for x in row) // den for row in num]

    def dominant_multiplicities(self, lam: Weight) -> dict:
        """Freudenthal multiplicities of V(lam) at dominant weights."""
        return dict(_freudenthal(self, self.weight(lam)))

    def classical_character(self, lam: Weight) -> dict:
        """Weight -> multiplicity for the irreducible module V(lam)."""
        out = {}
        for kappa, m in _freudenthal(self, self.weight(lam)):
            for mu in self.orbit(kappa):
                out[mu] = m
        return dict(sorted(out.items()))

    def dimension(self, lam: Weight) -> int:
        """Dimension by Freudenthal summation (independent of the Weyl formula)."""
        return sum(m * self.orbit_size(k) for k, m in _freudenthal(self, self.weight(lam)))

    def demazure_exponents(self, level: int, lam: Weight, alpha: RootVec) -> tuple:
        if not self.is_positive_root(self._rootvec(alpha)):
            raise RootSystemError(f"{alpha} is not a positive root")
        return demazure_exponents(level, self.pairing(lam, alpha))



@lru_cache(maxsize=4096)
def _freudenthal(R: RootSystem, lam: Weight) -> tuple:
    """Tuple of (dominant weight, multiplicity), in decreasing peel order."""
    if not lam.is_dominant():
        raise RootSystemError(f"{lam} is not dominant")
    doms = R.dominant_weights_below(lam)
    roots_w = [R.root_to_weight(r) for r in R.positive_roots]
    lr = lam + R.rho
    top = R.scaled_form(lr, lr)
    mult: dict = {lam: 1}

    def m_at(mu: Weight) -> int:
        if mu.is_dominant():
            return mult.get(mu, 0)
        return mult.get(R.dominant_conjugate(mu)[0], 0)

    for mu in doms[1:]:
        mr = mu + R.rho
        den = top - R.scaled_form(mr, mr)
        acc = 0
        for a in roots_w:
            k = 1
            while True:
                nu = mu + a * k
                m = m_at(nu)
                if m == 0:
                    break
                acc += m * R.scaled_form(nu, a)
                k += 1
        q, rem = divmod(2 * acc, den)
        if rem:
            raise RootSystemError("Freudenthal recursion produced a non-integer")
        if q:
            mult[mu] = q
    return tuple((mu, mult[mu]) for mu in doms if mult.get(mu))


@lru_cache(maxsize=None)
def build_root_system(t: RankedType) -> RootSystem:
    return RootSystem(t)


def pairing(R: RootSystem, lam: Weight, alpha: RootVec) -> int:
    return R.pairing(lam, alpha)


def demazure_exponents(level: int, value: int) -> tuple:
    """(s, m) with value = level*(s-1) + m and 0 < m <= level."""
    if not isinstance(level, int) or level <= 0:
        raise RootSystemError("level must be a positive integer")
    if value < 0:
        raise RootSystemError("pairing of a dominant weight is nonnegative")
    s, m = divmod(value, level)
    if m == 0:
        return s, level
    return s + 1, m
