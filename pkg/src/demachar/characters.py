"""Graded characters and the Demazure-operator engine.

Characters are stored as sorted arrays of packed (grade, weight) keys with
integer coefficients (see :mod:`demachar._kernels`).  Weyl-invariant
characters also have an *irreducible expansion*: coefficients of
``v**s * ch V(kappa)`` for dominant kappa, obtained by rho-shifted
straightening of the terms.
"""

from __future__ import annotations

import json
import os
from collections import OrderedDict
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np

from . import _kernels as K
from ._kernels import BudgetExceeded, Packing, RangeOverflow
from .affine import AffineWeight, affine_pairing, demazure_word
from .rootsys import RankedType, RootSystem, RootSystemError, Weight, build_root_system

__all__ = [
    "DEFAULT_BUDGET",
    "BudgetExceeded",
    "CharacterError",
    "GradedCharacter",
    "AffineCharacter",
    "IrreducibleExpansion",
    "Violation",
    "demazure_operator",
    "demazure_char",
    "demazure_expansion",
    "char_product",
    "grade_shift",
    "specialize_and_decompose",
    "peel_decompose",
]

DEFAULT_BUDGET = 5_000_000


class CharacterError(ValueError):
    """Domain error for character operations (rank mismatch, not a module character, ...)."""


@lru_cache(maxsize=None)
def _packing(n: int) -> Packing:
    return Packing(n)


def _zero_key(P: Packing) -> int:
    return int(P.pack(np.zeros((1, P.n), np.int64), np.zeros(1, np.int64))[0])


def _canonical(keys: np.ndarray, vals: np.ndarray) -> tuple:
    if keys.size == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    keys, vals = K._reduce_sorted_np(np.asarray(keys, np.int64), vals)
    return keys, vals


def _pack_terms(R: RootSystem, items: Iterable) -> tuple:
    wts, degs, mults = [], [], []
    for (wt, g), m in items:
        w = R.weight(wt)
        wts.append(w.coords)
        degs.append(int(g))
        mults.append(int(m))
    P = _packing(R.rank)
    if not wts:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    keys = P.pack(np.array(wts, dtype=np.int64), np.array(degs, dtype=np.int64))
    big = any(abs(m) >= K.SAFE_BOUND for m in mults)
    vals = np.array(mults, dtype=object if big else np.int64)
    return _canonical(keys, vals)


@dataclass(frozen=True)
class Violation:
    """First coordinate where an inequality fails."""

    weight: Weight
    grade: int
    left: int
    right: int

    def as_dict(self) -> dict:
        return {"weight": list(self.weight.coords), "grade": self.grade, "left": self.left, "right": self.right}


class _Terms:
    """Sorted packed keys with nonzero integer coefficients."""

    __slots__ = ("R", "P", "keys", "vals", "_unpacked")

    def __init__(self, R: RootSystem, keys: np.ndarray, vals: np.ndarray):
        self.R = R
        self.P = _packing(R.rank)
        self.keys = keys
        self.vals = vals
        self._unpacked = None
        keys.setflags(write=False)
        vals.setflags(write=False)

    # construction helpers -------------------------------------------
    @classmethod
    def _make(cls, R, keys, vals, **extra):
        obj = cls.__new__(cls)
        _Terms.__init__(obj, R, keys, vals)
        for k, v in extra.items():
            object.__setattr__(obj, k, v)
        return obj

    def _like(self, keys, vals):
        raise NotImplementedError

    # views -------------------------------------------------------------
    @property
    def rank(self) -> int:
        return self.R.rank

    @property
    def series(self) -> str:
        return self.R.series

    def __len__(self) -> int:
        return int(self.keys.size)

    def unpacked(self) -> tuple:
        if self._unpacked is None:
            self._unpacked = self.P.unpack(self.keys)
        return self._unpacked

    def items(self) -> Iterator[tuple]:
        """Yield ((Weight, grade), coefficient) in canonical order."""
        wts, degs = self.unpacked()
        for w, d, v in zip(wts.tolist(), degs.tolist(), self.vals.tolist()):
            yield (Weight(tuple(w)), int(d)), int(v)

    def to_dict(self) -> dict:
        return dict(self.items())

    def coefficient(self, wt, grade: int) -> int:
        w = self.R.weight(wt)
        try:
            key = self.P.pack(np.array([w.coords]), np.array([grade]))[0]
        except RangeOverflow:
            return 0
        i = np.searchsorted(self.keys, key)
        if i < self.keys.size and self.keys[i] == key:
            return int(self.vals[i])
        return 0

    def grades(self) -> list:
        return sorted(set(self.unpacked()[1].tolist()))

    def top_grade(self) -> int | None:
        return int(self.unpacked()[1].max()) if self.keys.size else None

    # arithmetic ------------------------------------------------------
    def _check_other(self, other):
        if type(other) is not type(self):
            raise CharacterError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.R is not self.R:
            raise CharacterError(f"rank mismatch: {self.R.type} vs {other.R.type}")

    def _merge(self, other, sign: int):
        self._check_other(other)
        va, vb = self.vals, other.vals
        if va.dtype == object or vb.dtype == object or K.abs_total(va) + K.abs_total(vb) >= K.SAFE_BOUND:
            va, vb = va.astype(object), vb.astype(object)
        keys = np.concatenate([self.keys, other.keys])
        vals = np.concatenate([va, vb * sign])
        return self._like(*_canonical(keys, vals))

    def __add__(self, other):
        return self._merge(other, 1)

    def __sub__(self, other):
        return self._merge(other, -1)

    def __neg__(self):
        return self._like(self.keys, -self.vals)

    def scale(self, k: int):
        if k == 0:
            return self._like(np.empty(0, np.int64), np.empty(0, np.int64))
        vals = self.vals
        if vals.dtype != object and K.abs_total(vals) * abs(k) >= K.SAFE_BOUND:
            vals = vals.astype(object)
        return self._like(self.keys, vals * k)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (
            self.R is other.R
            and np.array_equal(self.keys, other.keys)
            and all(int(a) == int(b) for a, b in zip(self.vals.tolist(), other.vals.tolist()))
        )

    __hash__ = None

    def shifted(self, s: int):
        """Add ``s`` to every grade."""
        if s == 0 or not self.keys.size:
            return self
        wts, degs = self.unpacked()
        return self._like(self.P.pack(wts, degs + s), self.vals)

    def is_nonnegative(self) -> bool:
        return bool((self.vals >= 0).all()) if self.vals.size else True

    def first_violation(self, other) -> Violation | None:
        """First (weight, grade) in canonical order with self > other, else None."""
        self._check_other(other)
        diff = other - self
        if diff.is_nonnegative():
            return None
        idx = int(np.flatnonzero(diff.vals < 0)[0])
        wts, degs = diff.unpacked()
        w = Weight(tuple(wts[idx].tolist()))
        g = int(degs[idx])
        return Violation(w, g, self.coefficient(w, g), other.coefficient(w, g))

    def __le__(self, other) -> bool:
        return self.first_violation(other) is None

    def total(self) -> int:
        return K.abs_total(self.vals) if self.is_nonnegative() else int(sum(int(v) for v in self.vals))


class GradedCharacter(_Terms):
    """Finite sum of mult * v**grade * e(weight)."""

    __slots__ = ()

    def __init__(self, R: RootSystem, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        keys, vals = _pack_terms(R, items)
        _Terms.__init__(self, R, keys, vals)

    def _like(self, keys, vals):
        return GradedCharacter._make(self.R, keys, vals)

    @classmethod
    def unit(cls, R: RootSystem) -> "GradedCharacter":
        return cls(R, {(Weight.zero(R.rank), 0): 1})

    @classmethod
    def zero(cls, R: RootSystem) -> "GradedCharacter":
        return cls(R, {})

    def dimension(self) -> int:
        """Value at v = 1 and e(mu) = 1."""
        return int(sum(int(v) for v in self.vals.tolist())) if self.vals.dtype == object else int(self.vals.sum())

    def grade_slice(self, s: int) -> dict:
        wts, degs = self.unpacked()
        idx = np.flatnonzero(degs == s)
        return {Weight(tuple(wts[i].tolist())): int(self.vals[i]) for i in idx}

    def ungraded(self) -> dict:
        out: dict = {}
        for (w, _), m in self.items():
            out[w] = out.get(w, 0) + m
        return {w: m for w, m in sorted(out.items()) if m}

    def reflected(self, i: int) -> "GradedCharacter":
        """Apply the simple reflection s_i to every weight."""
        self.R.check_node(i)
        wts, degs = self.unpacked()
        row = self.R.cartan[i - 1]
        new = wts - wts[:, i - 1:i] * row[None, :]
        return self._like(*_canonical(self.P.pack(new, degs), self.vals))

    def is_weyl_symmetric(self) -> bool:
        return all(self.reflected(i) == self for i in range(1, self.rank + 1))

    def is_module_character(self) -> bool:
        return self.is_nonnegative() and self.is_weyl_symmetric()

    def product(self, other: "GradedCharacter", budget: int = DEFAULT_BUDGET) -> "GradedCharacter":
        self._check_other(other)
        a, b = (self, other) if len(self) <= len(other) else (other, self)
        if not len(a):
            return GradedCharacter.zero(self.R)
        keys, vals = K.convolve(a.keys, a.vals, b.keys, b.vals, self.P, budget)
        return self._like(keys, vals)

    def __mul__(self, other):
        if isinstance(other, GradedCharacter):
            return self.product(other)
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        return NotImplemented

    __rmul__ = __mul__

    def expansion(self, check: bool = True) -> "IrreducibleExpansion":
        """Irreducible expansion of a Weyl-invariant character.

        With ``check`` the input is first verified to be Weyl-symmetric,
        which makes the expansion exact; otherwise the result is the
        expansion of the Weyl symmetrization.
        """
        if check and not self.is_weyl_symmetric():
            raise CharacterError("character is not Weyl-symmetric in every grade")
        keys, vals = K.dot_reduce(self.keys, self.vals, self.R.cartan, self.P)
        return IrreducibleExpansion._make(self.R, keys, vals)

    # serialization -------------------------------------------------
    def to_json(self) -> str:
        wts, degs = self.unpacked()
        parts = [
            '{"wt":[' + ",".join(map(str, w)) + '],"grade":' + str(d) + ',"mult":' + str(m) + "}"
            for w, d, m in zip(wts.tolist(), degs.tolist(), self.vals.tolist())
        ]
        return '{"rank":%d,"series":"%s","terms":[%s]}' % (self.rank, self.series, ",".join(parts))

    @classmethod
    def from_json(cls, text: str) -> "GradedCharacter":
        data = json.loads(text)
        R = build_root_system(RankedType(data["series"], int(data["rank"])))
        return cls(R, [((tuple(t["wt"]), t["grade"]), t["mult"]) for t in data["terms"]])

    def __repr__(self) -> str:
        return f"GradedCharacter({self.R.type}, {len(self)} terms)"


class AffineCharacter(_Terms):
    """Finite sum of mult * e(Lambda) over affine weights of one level."""

    __slots__ = ("level",)

    def __init__(self, R: RootSystem, level: int, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        norm = []
        for key, m in items:
            if isinstance(key, AffineWeight):
                if key.level != level:
                    raise CharacterError(f"term of level {key.level} in a level-{level} character")
                key = (key.finite, key.degree)
            norm.append((key, m))
        keys, vals = _pack_terms(R, norm)
        _Terms.__init__(self, R, keys, vals)
        self.level = level

    def _like(self, keys, vals):
        return AffineCharacter._make(self.R, keys, vals, level=self.level)

    def _check_other(self, other):
        _Terms._check_other(self, other)
        if other.level != self.level:
            raise CharacterError("level mismatch")

    @classmethod
    def monomial(cls, R: RootSystem, L: AffineWeight) -> "AffineCharacter":
        return cls(R, L.level, {L: 1})

    def affine_items(self) -> Iterator[tuple]:
        for (w, d), m in self.items():
            yield AffineWeight(w, self.level, d), m

    def as_graded(self) -> GradedCharacter:
        """Read the degree as the grade."""
        return GradedCharacter._make(self.R, self.keys, self.vals)

    def __repr__(self) -> str:
        return f"AffineCharacter({self.R.type}, level {self.level}, {len(self)} terms)"


class IrreducibleExpansion(_Terms):
    """Sum of coeff * v**grade * ch V(kappa) over dominant kappa."""

    __slots__ = ()

    def __init__(self, R: RootSystem, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        items = list(items)
        for (w, _), _m in items:
            if not R.weight(w).is_dominant():
                raise CharacterError(f"{w} is not dominant")
        keys, vals = _pack_terms(R, items)
        _Terms.__init__(self, R, keys, vals)

    def _like(self, keys, vals):
        return IrreducibleExpansion._make(self.R, keys, vals)

    def dimension(self) -> int:
        wts, _ = self.unpacked()
        return sum(int(m) * d for m, d in zip(self.vals, self.R.weyl_dimensions(wts)))

    def per_grade(self) -> list:
        """[(grade, [(kappa, mult), ...]), ...] with kappas in decreasing peel order."""
        out: dict = {}
        for (w, g), m in self.items():
            out.setdefault(g, []).append((w, m))
        return [(g, sorted(v, key=lambda t: self.R.peel_key(t[0]), reverse=True)) for g, v in sorted(out.items())]

    def times(self, other: GradedCharacter, budget: int = DEFAULT_BUDGET) -> "IrreducibleExpansion":
        """Expansion of (this character) * other, for Weyl-invariant ``other``.

        Each ch V(kappa) * other is the rho-shifted straightening of
        e(kappa) * other.
        """
        if other.R is not self.R:
            raise CharacterError("rank mismatch")
        if not len(self) or not len(other):
            return IrreducibleExpansion(self.R, {})
        keys, vals = K.klimyk(self.keys, self.vals, other.keys, other.vals, self.R.cartan, self.P, budget)
        return self._like(keys, vals)

    def expand(self) -> GradedCharacter:
        """Full character, summing classical characters (small inputs)."""
        acc: dict = {}
        for (kappa, g), c in self.items():
            for mu, m in self.R.classical_character(kappa).items():
                acc[(mu, g)] = acc.get((mu, g), 0) + c * m
        return GradedCharacter(self.R, {k: v for k, v in acc.items() if v})

    def dominant_multiplicities(self) -> dict:
        """(dominant weight, grade) -> multiplicity of the full character."""
        acc: dict = {}
        for (kappa, g), c in self.items():
            for mu, m in self.R.dominant_multiplicities(kappa).items():
                acc[(mu, g)] = acc.get((mu, g), 0) + c * m
        return {k: v for k, v in sorted(acc.items(), key=lambda kv: (kv[0][1], kv[0][0].coords)) if v}

    def to_json(self) -> str:
        return json.dumps(
            {
                "rank": self.rank,
                "series": self.series,
                "terms": [{"hw": list(w.coords), "grade": g, "mult": m} for (w, g), m in self.items()],
            },
            separators=(",", ":"),
        )

    def __repr__(self) -> str:
        return f"IrreducibleExpansion({self.R.type}, {len(self)} terms)"


# ---------------------------------------------------------------------------
# Demazure operators


def _node_data(R: RootSystem, level: int, i: int) -> tuple:
    P = _packing(R.rank)
    if i == 0:
        theta_w = R.root_to_weight(R.theta).coords
        delta = P.delta([-t for t in theta_w], 1)
    else:
        delta = P.delta(R.cartan[i - 1].tolist(), 0)
    return np.asarray(R.theta.coords, dtype=np.int64), delta


def _dict_operator(R: RootSystem, level: int, i: int, terms: dict) -> dict:
    """Reference implementation on {(Weight, degree): mult} dictionaries."""
    out: dict = {}
    for (w, d), c in terms.items():
        L = AffineWeight(w, level, d)
        m = affine_pairing(R, L, i)
        if i == 0:
            theta_w = R.root_to_weight(R.theta)
            step = lambda k: (w + theta_w * k, d - k)  # noqa: E731 - subtract k * alpha_0
        else:
            a = R.root_to_weight(R.simple_root(i))
            step = lambda k: (w - a * k, d)  # noqa: E731
        if m >= 0:
            ks, sg = range(0, m + 1), 1
        elif m <= -2:
            ks, sg = range(m + 1, 0), -1
        else:
            continue
        for k in ks:
            key = step(k)
            out[key] = out.get(key, 0) + sg * c
    return {k: v for k, v in out.items() if v}


def _apply_word(R: RootSystem, level: int, keys, vals, nodes, budget: int):
    P = _packing(R.rank)
    nodes = list(nodes)
    for t, i in enumerate(nodes):
        theta, delta = _node_data(R, level, i)
        keys, vals = K.demazure_step(keys, vals, i, level, theta, delta, P, budget, sort=t == len(nodes) - 1)
    return keys, vals


def _apply_word_dict(R: RootSystem, level: int, terms: dict, nodes, budget: int) -> dict:
    for i in nodes:
        terms = _dict_operator(R, level, i, terms)
        if len(terms) > budget:
            raise BudgetExceeded(len(terms), budget)
    return terms


def demazure_operator(i: int, f: AffineCharacter, budget: int = DEFAULT_BUDGET) -> AffineCharacter:
    """The Demazure operator D_i (node 0 allowed) on an affine character."""
    R = f.R
    if not (isinstance(i, (int, np.integer)) and 0 <= i <= R.rank):
        raise RootSystemError(f"affine node {i} out of range 0..{R.rank}")
    try:
        keys, vals = _apply_word(R, f.level, f.keys, f.vals, [int(i)], budget)
        return f._like(keys, vals)
    except RangeOverflow:
        terms = {(w, d): m for (w, d), m in f.items()}
        return AffineCharacter(R, f.level, _dict_operator(R, f.level, int(i), terms))


def _start(R: RootSystem, level: int, lam: Weight, tie: str):
    dom, word = demazure_word(R, level, lam, tie=tie)
    return dom, word


def _finite_prefix(word: tuple) -> int:
    k = 0
    while k < len(word) and word[k] != 0:
        k += 1
    return k


class _FullCache:
    """LRU memo of full characters, bounded by the total number of stored terms."""

    def __init__(self, max_terms: int):
        self.max_terms = max_terms
        self.data: OrderedDict = OrderedDict()
        self.terms = 0

    def get(self, key):
        hit = self.data.get(key)
        if hit is not None:
            self.data.move_to_end(key)
        return hit

    def __setitem__(self, key, value):
        if key in self.data:
            return
        self.data[key] = value
        self.terms += len(value)
        while self.terms > self.max_terms and len(self.data) > 1:
            _, old = self.data.popitem(last=False)
            self.terms -= len(old)

    def clear(self):
        self.data.clear()
        self.terms = 0


class _EngineCache:
    """Per-process memo of computed characters and of budget failures."""

    def __init__(self):
        self.full = _FullCache(int(os.environ.get("DEMACHAR_MEMO_TERMS", 20_000_000)))
        self.expansion: dict = {}
        self.failed: dict = {}

    def clear(self):
        self.full.clear()
        self.expansion.clear()
        self.failed.clear()


_CACHE = _EngineCache()


def clear_engine_cache() -> None:
    _CACHE.clear()


def _check_args(R: RootSystem, level: int, lam) -> Weight:
    if not isinstance(level, (int, np.integer)) or level < 1:
        raise CharacterError("level must be a positive integer")
    lam = R.weight(lam)
    if not lam.is_dominant():
        raise CharacterError(f"{lam} is not dominant")
    return lam


def _guard(key, budget):
    prev = _CACHE.failed.get(key)
    if prev is not None and budget <= prev[1]:
        raise BudgetExceeded(prev[0], budget)


def demazure_char(R: RootSystem, level: int, lam, *, tie: str = "least", budget: int = DEFAULT_BUDGET) -> GradedCharacter:
    """Graded character of the stable Demazure module D(level, lam)."""
    lam = _check_args(R, level, lam)
    key = (R.type, int(level), lam, tie)
    hit = _CACHE.full.get(key)
    if hit is not None:
        if len(hit) > budget:
            raise BudgetExceeded(len(hit), budget)
        return hit
    _guard(("full",) + key, budget)
    dom, word = _start(R, level, lam, tie)
    P = _packing(R.rank)
    try:
        try:
            keys = P.pack(np.array([dom.finite.coords]), np.array([dom.degree]))
            keys, vals = _apply_word(R, level, keys, np.ones(1, np.int64), reversed(word), budget)
            out = GradedCharacter._make(R, keys, vals)
        except RangeOverflow:
            terms = _apply_word_dict(R, level, {(dom.finite, dom.degree): 1}, reversed(word), budget)
            out = GradedCharacter(R, terms)
    except BudgetExceeded as exc:
        _CACHE.failed[("full",) + key] = (exc.terms, budget)
        raise
    _CACHE.full[key] = out
    return out


def demazure_expansion(R: RootSystem, level: int, lam, *, tie: str = "least", budget: int = DEFAULT_BUDGET) -> IrreducibleExpansion:
    """Irreducible expansion of ch D(level, lam), grade by grade.

    The outermost block of finite-node operators in the word is replaced by
    the rho-shifted straightening (the full symmetrizer absorbs it), so the
    largest array held is the character just before that block.
    """
    lam = _check_args(R, level, lam)
    key = (R.type, int(level), lam, tie)
    hit = _CACHE.expansion.get(key)
    if hit is not None:
        return hit
    full = _CACHE.full.get(key)
    if full is not None:
        out = full.expansion(check=False)
        _CACHE.expansion[key] = out
        return out
    _guard(("exp",) + key, budget)
    dom, word = _start(R, level, lam, tie)
    k = _finite_prefix(word)
    inner = word[k:]
    P = _packing(R.rank)
    try:
        try:
            keys = P.pack(np.array([dom.finite.coords]), np.array([dom.degree]))
            keys, vals = _apply_word(R, level, keys, np.ones(1, np.int64), reversed(inner), budget)
            keys, vals = K.dot_reduce(keys, vals, R.cartan, P)
        except RangeOverflow:
            full = demazure_char(R, level, lam, tie=tie, budget=budget)
            keys, vals = K.dot_reduce(full.keys, full.vals, R.cartan, P)
    except BudgetExceeded as exc:
        _CACHE.failed[("exp",) + key] = (exc.terms, budget)
        raise
    out = IrreducibleExpansion._make(R, keys, vals)
    _CACHE.expansion[key] = out
    return out


def char_product(f: GradedCharacter, g: GradedCharacter, budget: int = DEFAULT_BUDGET) -> GradedCharacter:
    return f.product(g, budget)


def grade_shift(s: int, f):
    return f.shifted(s)


def specialize_and_decompose(f: GradedCharacter) -> tuple:
    """(dimension, [(grade, [(kappa, mult), ...]), ...]) for a module character."""
    if not f.is_weyl_symmetric():
        raise CharacterError("not a module character: some grade slice is not Weyl-symmetric")
    exp = f.expansion(check=False)
    if not exp.is_nonnegative():
        v = int(np.flatnonzero(exp.vals < 0)[0])
        (w, g), m = list(exp.items())[v]
        raise CharacterError(f"not a module character: coefficient {m} for V{w} in grade {g}")
    return f.dimension(), exp.per_grade()


def peel_decompose(f: GradedCharacter) -> tuple:
    """Literal highest-weight peeling against classical characters (oracle path)."""
    R = f.R
    per: dict = {}
    for (w, g), m in f.items():
        per.setdefault(g, {})[w] = m
    out = []
    for g in sorted(per):
        rest = dict(per[g])
        parts = []
        while rest:
            dom = [w for w in rest if w.is_dominant()]
            if not dom:
                raise CharacterError(f"not a module character: residue without dominant weights in grade {g}")
            top = max(dom, key=R.peel_key)
            c = rest[top]
            if c < 0:
                raise CharacterError(f"not a module character: negative coefficient at {top} in grade {g}")
            for mu, m in R.classical_character(top).items():
                v = rest.get(mu, 0) - c * m
                if v:
                    rest[mu] = v
                else:
                    rest.pop(mu, None)
            parts.append((top, c))
        out.append((g, parts))
    return f.dimension(), out
