"""Exact term counts of module characters from their irreducible expansions.

For a character with nonnegative irreducible coefficients, the grade-s
support is the set of weights whose dominant conjugate lies below some
highest weight present in grade s (weights of V(kappa) are saturated).  So
the number of (weight, grade) terms is a sum of Weyl orbit sizes over a
down-closed set of dominant weights, which we evaluate on a table of all
dominant weights up to a height bound.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from . import _kernels as K
from .rootsys import RootSystem, _weyl_order_of_nodes

__all__ = ["DominanceTable", "dominance_table", "support_size", "product_support_size"]


class DominanceTable:
    """All dominant weights of scaled height at most ``bound``."""

    def __init__(self, R: RootSystem, bound: int):
        G, d = R._form
        self.R = R
        self.G = np.array(G, dtype=np.int64)
        self.d = d
        self.heights = self.G.sum(axis=0)  # scaled height of omega_i
        self.bound = int(bound)
        pts = self._enumerate()
        pts = pts[np.argsort(pts @ self.heights, kind="stable")]
        self.points = pts  # by increasing height
        self.scaled = pts @ self.G  # scaled root coordinates, row per weight
        self.row_height = self.scaled.sum(axis=1)
        self.index = {tuple(int(x) for x in row): i for i, row in enumerate(pts)}
        self.orbit = self._orbit_sizes(pts)

    def _enumerate(self) -> np.ndarray:
        n = self.R.rank
        h = [int(x) for x in self.heights]
        out = []

        def rec(i, left, cur):
            if i == n:
                out.append(tuple(cur))
                return
            for c in range(left // h[i] + 1):
                cur.append(c)
                rec(i + 1, left - c * h[i], cur)
                cur.pop()

        rec(0, self.bound, [])
        return np.array(out, dtype=np.int64).reshape(-1, n)

    def _orbit_sizes(self, pts: np.ndarray) -> np.ndarray:
        R = self.R
        order = R.weyl_group_order
        n = R.rank
        codes = ((pts == 0) * (1 << np.arange(n, dtype=np.int64))).sum(axis=1)
        table = {}
        for code in np.unique(codes):
            zeros = [i for i in range(n) if code >> i & 1]
            table[int(code)] = order // _weyl_order_of_nodes(R.cartan, zeros)
        return np.array([table[int(c)] for c in codes], dtype=object if order > 1 << 40 else np.int64)

    def scaled_height(self, wt) -> int:
        return int(np.dot(np.asarray(wt, dtype=np.int64), self.heights))

    def below_mask(self, wt) -> np.ndarray:
        """Mask of table weights mu with wt - mu in Q+."""
        top = np.asarray(wt, dtype=np.int64) @ self.G
        diff = top[None, :] - self.scaled
        return np.all(diff >= 0, axis=1) & np.all(diff % self.d == 0, axis=1)

    def downset_mask(self, tops) -> np.ndarray:
        """Mask of table weights below some weight of ``tops``."""
        if isinstance(tops, np.ndarray):
            tops = np.unique(tops.astype(np.int64).reshape(-1, self.R.rank), axis=0)
        else:
            tops = np.array(sorted(set(tuple(t) for t in tops)), dtype=np.int64).reshape(-1, self.R.rank)
        scaled = tops @ self.G
        hts = scaled.sum(axis=1)
        order = np.argsort(-hts, kind="stable")
        rows = int(np.searchsorted(self.row_height, hts.max() if hts.size else -1, side="right"))
        out = np.zeros(len(self.points), dtype=bool)
        out[:rows] = K.downset(scaled[order], self.scaled[:rows], self.d)
        return out

    def count(self, mask: np.ndarray) -> int:
        return int(sum(int(x) for x in self.orbit[mask])) if self.orbit.dtype == object else int(self.orbit[mask].sum())

    def maximal(self, tops) -> list:
        """Maximal elements of a set of dominant weights under dominance."""
        tops = sorted(set(tuple(t) for t in tops), key=self.scaled_height, reverse=True)
        keep: list = []
        for t in tops:
            v = np.asarray(t, dtype=np.int64) @ self.G
            covered = False
            for u in keep:
                diff = u - v
                if np.all(diff >= 0) and np.all(diff % self.d == 0):
                    covered = True
                    break
            if not covered:
                keep.append(v)
        inv = {tuple(int(x) for x in (np.asarray(t, dtype=np.int64) @ self.G)): t for t in tops}
        return [inv[tuple(int(x) for x in v)] for v in keep]


_TABLES: dict = {}


def dominance_table(R: RootSystem, bound: int) -> DominanceTable:
    """A cached table covering at least the given scaled height."""
    tab = _TABLES.get(R.type)
    if tab is None or tab.bound < bound:
        new = max(int(bound), 2 * tab.bound if tab is not None else 0)
        tab = DominanceTable(R, new)
        _TABLES[R.type] = tab
    return tab


def _by_grade(items) -> dict:
    """grade -> array of the distinct highest weights present in that grade.

    Accepts an irreducible expansion (read through its packed arrays) or an
    iterable of ((weight, grade), coefficient).
    """
    if hasattr(items, "unpacked"):
        wts, degs = items.unpacked()
        vals = items.vals
        if any(v < 0 for v in vals) if vals.dtype == object else bool(np.any(vals < 0)):
            raise ValueError("support counts need nonnegative irreducible coefficients")
        return {int(g): np.unique(wts[degs == g], axis=0) for g in np.unique(degs)}
    per = defaultdict(list)
    for (w, g), c in items:
        if c < 0:
            raise ValueError("support counts need nonnegative irreducible coefficients")
        per[g].append(tuple(w.coords) if hasattr(w, "coords") else tuple(w))
    return {g: np.unique(np.array(ts, dtype=np.int64), axis=0) for g, ts in per.items()}


def _top_height(R: RootSystem, per: dict) -> int:
    hts = np.array(R._form[0], dtype=np.int64).sum(axis=0)
    return max(int((ts @ hts).max()) for ts in per.values())


def support_size(R: RootSystem, items) -> int:
    """Number of (weight, grade) terms of sum c * v^g * ch V(kappa), all c > 0."""
    per = _by_grade(items)
    if not per:
        return 0
    tab = dominance_table(R, _top_height(R, per))
    return sum(tab.count(tab.downset_mask(ts)) for ts in per.values())


def product_support_size(R: RootSystem, items_a, items_b, limit: int | None = None) -> int:
    """Term count of the product of two module characters given by expansions.

    Coefficients are nonnegative, so no cancellation occurs, and the support
    of ch V(k1) * ch V(k2) is that of ch V(k1 + k2).  With ``limit`` the
    count stops early once it exceeds the limit; the result is then only
    known to be larger than ``limit``.
    """
    pa, pb = _by_grade(items_a), _by_grade(items_b)
    if not pa or not pb:
        return 0
    tab = dominance_table(R, _top_height(R, pa) + _top_height(R, pb))
    ma = {g: tab.maximal(map(tuple, ts.tolist())) for g, ts in pa.items()}
    mb = {g: tab.maximal(map(tuple, ts.tolist())) for g, ts in pb.items()}
    tops = defaultdict(set)
    for ga, xs in ma.items():
        for gb, ys in mb.items():
            for x in xs:
                for y in ys:
                    tops[ga + gb].add(tuple(a + b for a, b in zip(x, y)))
    total = 0
    for g in sorted(tops, key=lambda g: -len(tops[g])):
        total += tab.count(tab.downset_mask(tops[g]))
        if limit is not None and total > limit:
            break
    return total
