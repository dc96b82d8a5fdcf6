"""Affine weights of the untwisted affine algebra and straightening to dominance.

An affine weight is (finite part, level, degree) with level the coefficient
of Lambda_0 and degree the coefficient of delta.  Node 0 has simple root
alpha_0 = -theta + delta, so its pairing is ``level - finite(h_theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rootsys import RootSystem, RootSystemError, Weight

__all__ = [
    "AffineWeight",
    "affine_pairing",
    "affine_reflect",
    "demazure_word",
    "extremal_weight",
    "ITERATION_CAP",
]

ITERATION_CAP = 10**7


@dataclass(frozen=True, order=True)
class AffineWeight:
    finite: Weight
    level: int
    degree: int

    def __str__(self) -> str:
        return f"({self.finite}, level={self.level}, degree={self.degree})"


def _check_affine_node(R: RootSystem, i: int) -> None:
    if not (isinstance(i, int) and 0 <= i <= R.rank):
        raise RootSystemError(f"affine node {i} out of range 0..{R.rank}")


def theta_pairing(R: RootSystem, lam: Weight) -> int:
    return R.pairing(lam, R.theta)


def affine_pairing(R: RootSystem, L: AffineWeight, i: int) -> int:
    _check_affine_node(R, i)
    if i == 0:
        return L.level - theta_pairing(R, L.finite)
    return L.finite.coords[i - 1]


def affine_reflect(R: RootSystem, i: int, L: AffineWeight) -> AffineWeight:
    m = affine_pairing(R, L, i)
    if m == 0:
        return L
    if i == 0:
        theta_w = R.root_to_weight(R.theta)
        return AffineWeight(L.finite + theta_w * m, L.level, L.degree - m)
    return AffineWeight(R.reflect_weight(i, L.finite), L.level, L.degree)


def extremal_weight(R: RootSystem, level: int, lam: Weight) -> AffineWeight:
    """(w0 lam, level, 0): the generator of D(level, lam) sits in degree 0."""
    return AffineWeight(R.longest_element_image(lam), level, 0)


def demazure_word(R: RootSystem, level: int, lam: Weight, tie: str = "least") -> tuple:
    """Straighten (w0 lam, level, 0) to the dominant chamber.

    Returns ``(dominant, word)`` where ``word = (j1, ..., jT)`` lists the
    reflections in the order they were applied, so that the extremal weight
    equals s_{j1} ... s_{jT} applied to ``dominant``.  ``tie`` picks the
    least or the greatest node with negative pairing at each step.
    """
    if not isinstance(level, int) or level < 1:
        raise RootSystemError("level must be a positive integer")
    lam = R.weight(lam)
    if not lam.is_dominant():
        raise RootSystemError(f"{lam} is not dominant")
    if tie not in ("least", "greatest"):
        raise ValueError(f"unknown tie-breaking rule {tie!r}")
    n = R.rank
    theta = R.theta.coords
    theta_w = R.root_to_weight(R.theta).coords
    rows = R._cartan_rows
    f = list(R.longest_element_image(lam).coords)
    d = 0
    word = []
    nodes = range(n + 1) if tie == "least" else range(n, -1, -1)
    for _ in range(ITERATION_CAP):
        pick = None
        for i in nodes:
            m = level - sum(a * b for a, b in zip(f, theta)) if i == 0 else f[i - 1]
            if m < 0:
                pick = (i, m)
                break
        if pick is None:
            return AffineWeight(Weight(tuple(f)), level, d), tuple(word)
        i, m = pick
        if i == 0:
            f = [a + m * t for a, t in zip(f, theta_w)]
            d -= m
        else:
            f = [a - m * r for a, r in zip(f, rows[i - 1])]
        word.append(i)
    raise RuntimeError("internal error: straightening exceeded the iteration cap")
