"""Hot loops over packed (degree, weight) keys.

A term (weight, degree) of rank n is packed into one nonnegative int64 with
``b = 62 // (n + 1)`` bits per field: the degree occupies the most
significant field, then coordinates 1..n.  Every field stores ``value +
2**(b-1)``, so sorting packed keys sorts terms by (degree, weight
lexicographic) and adding a packed delta adds vectors as long as no field
leaves its range.  Kernels verify the range of every string they emit.

Two interchangeable backends implement each kernel: numba-compiled loops
with an open-addressing hash table, and vectorised numpy using sort and
segment reduction.  ``DEMACHAR_BACKEND=numpy`` forces the second one; it is
also used when numba cannot be imported.  Both return identical arrays.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised by the environment, not the tests
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

__all__ = [
    "Packing",
    "BudgetExceeded",
    "RangeOverflow",
    "backend",
    "demazure_step",
    "dot_reduce",
    "convolve",
    "klimyk",
    "downset",
    "SAFE_BOUND",
]

SAFE_BOUND = 1 << 62


class BudgetExceeded(RuntimeError):
    """A computation would hold more terms than the configured budget."""

    def __init__(self, terms: int, budget: int, what: str = "character"):
        super().__init__(f"{what} needs more than {budget} terms (reached {terms})")
        self.terms = terms
        self.budget = budget


class RangeOverflow(RuntimeError):
    """A coordinate left the packed field range; the caller falls back."""


def backend() -> str:
    choice = os.environ.get("DEMACHAR_BACKEND", "").strip().lower()
    if choice == "numpy" or not _HAVE_NUMBA:
        return "numpy"
    if choice not in ("", "numba"):
        raise ValueError(f"unknown DEMACHAR_BACKEND {choice!r}")
    return "numba"


class Packing:
    """Field layout for rank ``n``."""

    def __init__(self, n: int):
        self.n = n
        self.bits = 62 // (n + 1)
        self.off = 1 << (self.bits - 1)
        self.mask = (1 << self.bits) - 1
        # shifts[j] for coordinate j (0-based); degree at shifts[n]
        self.shifts = np.array([self.bits * (n - 1 - j) for j in range(n)] + [self.bits * n], dtype=np.int64)
        self.limit = self.off - 2

    def fits(self, bound: int) -> bool:
        return bound <= self.limit

    def pack(self, wts: np.ndarray, degs: np.ndarray) -> np.ndarray:
        wts = np.asarray(wts, dtype=np.int64).reshape(-1, self.n)
        degs = np.asarray(degs, dtype=np.int64).reshape(-1)
        if wts.size and (np.abs(wts).max() > self.limit or np.abs(degs).max() > self.limit):
            raise RangeOverflow("value outside packed field range")
        keys = (degs + self.off) << self.shifts[self.n]
        for j in range(self.n):
            keys = keys | ((wts[:, j] + self.off) << self.shifts[j])
        return keys

    def unpack(self, keys: np.ndarray) -> tuple:
        keys = np.asarray(keys, dtype=np.int64)
        wts = np.empty((keys.size, self.n), dtype=np.int64)
        for j in range(self.n):
            wts[:, j] = ((keys >> self.shifts[j]) & self.mask) - self.off
        degs = ((keys >> self.shifts[self.n]) & self.mask) - self.off
        return wts, degs

    def delta(self, vec, ddeg: int = 0) -> int:
        """Packed increment for adding ``vec`` to the weight and ``ddeg`` to the degree."""
        out = int(ddeg) << int(self.shifts[self.n])
        for j, v in enumerate(vec):
            out += int(v) << int(self.shifts[j])
        return out


# ---------------------------------------------------------------------------
# numba backend

if _HAVE_NUMBA:
    _njit = numba.njit(cache=True, nogil=True)

    @_njit
    def _mix(k, mask):
        h = (k * np.int64(-7046029254386353131)) ^ (k >> 29)
        return (h ^ (h >> 32)) & mask

    @_njit
    def _pairing_nb(k, node, level, theta, shifts, mask, off, n):
        if node == 0:
            p = level
            for j in range(n):
                if theta[j] != 0:
                    p -= theta[j] * (((k >> shifts[j]) & mask) - off)
            return p
        return ((k >> shifts[node - 1]) & mask) - off

    @_njit
    def _in_range(k, shifts, mask, n):
        for j in range(n + 1):
            f = (k >> shifts[j]) & mask
            if f < 1 or f > mask - 1:
                return False
        return True

    @_njit
    def _step_nb(keys, vals, node, level, theta, delta, shifts, mask, off, n, cap_terms):
        # Group the terms by alpha_node-string.  A term of pairing p acts on its
        # string as a symmetric interval of radius p (sign +) or -p-2 (sign -),
        # so the image of one string is a suffix sum over radii.  Output is
        # unsorted.
        N = keys.size
        k0 = np.empty(N, np.int64)
        rad = np.empty(N, np.int64)
        wv = np.empty(N, np.int64)
        M = 0
        for t in range(N):
            k = keys[t]
            p = _pairing_nb(k, node, level, theta, shifts, mask, off, n)
            if p == -1:
                continue
            par = p & 1
            k0[M] = k - ((p - par) >> 1) * delta
            if p >= 0:
                rad[M] = p
                wv[M] = vals[t]
            else:
                rad[M] = -p - 2
                wv[M] = -vals[t]
            M += 1
        cap = 16
        while cap < 2 * M + 16:
            cap *= 2
        hk = np.full(cap, -1, np.int64)
        hg = np.empty(cap, np.int64)
        m = cap - 1
        gid = np.empty(M, np.int64)
        gkey = np.empty(M, np.int64)
        gmax = np.empty(M, np.int64)
        G = 0
        for t in range(M):
            kk = k0[t]
            h = _mix(kk, m)
            while True:
                cur = hk[h]
                if cur == kk:
                    g = hg[h]
                    break
                if cur == -1:
                    hk[h] = kk
                    hg[h] = G
                    g = G
                    gkey[G] = kk
                    gmax[G] = -1
                    G += 1
                    break
                h = (h + 1) & m
            gid[t] = g
            if rad[t] > gmax[g]:
                gmax[g] = rad[t]
        start = np.empty(G + 1, np.int64)
        start[0] = 0
        total = 0
        for g in range(G):
            start[g + 1] = start[g] + gmax[g] // 2 + 1
            total += gmax[g] + 1
        acc = np.zeros(start[G], np.int64)
        for t in range(M):
            g = gid[t]
            acc[start[g] + rad[t] // 2] += wv[t]
        size = min(total, cap_terms + 1)
        ok = np.empty(size, np.int64)
        ov = np.empty(size, np.int64)
        q = 0
        for g in range(G):
            A = gmax[g]
            base = gkey[g]
            par = A & 1
            if not (_in_range(base + ((-A - par) >> 1) * delta, shifts, mask, n)
                    and _in_range(base + ((A - par) >> 1) * delta, shifts, mask, n)):
                return np.empty(0, np.int64), np.empty(0, np.int64), 1, q
            s0 = start[g]
            run = 0
            for r in range(A // 2, -1, -1):
                run += acc[s0 + r]
                acc[s0 + r] = run
            for x in range(-A, A + 1, 2):
                c = acc[s0 + (x if x >= 0 else -x) // 2]
                if c != 0:
                    if q >= size:
                        return np.empty(0, np.int64), np.empty(0, np.int64), 2, q
                    ok[q] = base + ((x - par) >> 1) * delta
                    ov[q] = c
                    q += 1
        return ok[:q], ov[:q], 0, q

    @_njit
    def _dot_one(k, cartan, c, shifts, mask, off, n):
        """(key, sign) of the rho-shifted dominant conjugate; sign 0 if singular, 2 on overflow."""
        for j in range(n):
            c[j] = ((k >> shifts[j]) & mask) - off + 1
        sign = 1
        while True:
            i = -1
            for j in range(n):
                if c[j] <= 0:
                    i = j
                    break
            if i < 0:
                break
            mm = c[i]
            if mm == 0:
                return k, 0
            for j in range(n):
                c[j] -= mm * cartan[i, j]
            sign = -sign
        kk = k
        for j in range(n):
            f = c[j] - 1 + off
            if f < 1 or f > mask - 1:
                return k, 2
            kk = (kk & ~(mask << shifts[j])) | (f << shifts[j])
        return kk, sign

    @_njit
    def _dot_nb(keys, vals, cartan, shifts, mask, off, n):
        N = keys.size
        outk = np.empty(N, np.int64)
        outv = np.empty(N, np.int64)
        c = np.empty(n, np.int64)
        q = 0
        for t in range(N):
            kk, sign = _dot_one(keys[t], cartan, c, shifts, mask, off, n)
            if sign == 0:
                continue
            if sign == 2:
                return outk[:0], outv[:0], 1
            outk[q] = kk
            outv[q] = sign * vals[t]
            q += 1
        return outk[:q], outv[:q], 0

    @_njit
    def _klimyk_nb(ka, va, kb, vb, zero, cartan, shifts, mask, off, n, cap_terms):
        cap = 1024
        hk = np.full(cap, -1, np.int64)
        hv = np.zeros(cap, np.int64)
        used = 0
        c = np.empty(n, np.int64)
        for a in range(ka.size):
            base = ka[a] - zero
            for b in range(kb.size):
                kk = base + kb[b]
                if not _in_range(kk, shifts, mask, n):
                    return np.empty(0, np.int64), np.empty(0, np.int64), 1
                kk, sign = _dot_one(kk, cartan, c, shifts, mask, off, n)
                if sign == 0:
                    continue
                if sign == 2:
                    return np.empty(0, np.int64), np.empty(0, np.int64), 1
                m = cap - 1
                h = _mix(kk, m)
                while True:
                    cur = hk[h]
                    if cur == kk:
                        hv[h] += sign * va[a] * vb[b]
                        break
                    if cur == -1:
                        hk[h] = kk
                        hv[h] = sign * va[a] * vb[b]
                        used += 1
                        break
                    h = (h + 1) & m
                if 2 * used > cap:
                    if used > cap_terms:
                        return np.empty(0, np.int64), np.empty(0, np.int64), 2
                    ncap = cap * 4
                    nk = np.full(ncap, -1, np.int64)
                    nv = np.zeros(ncap, np.int64)
                    nm = ncap - 1
                    for t in range(cap):
                        if hk[t] != -1:
                            g = _mix(hk[t], nm)
                            while nk[g] != -1:
                                g = (g + 1) & nm
                            nk[g] = hk[t]
                            nv[g] = hv[t]
                    hk = nk
                    hv = nv
                    cap = ncap
        cnt = 0
        for h in range(cap):
            if hk[h] != -1 and hv[h] != 0:
                cnt += 1
        ok = np.empty(cnt, np.int64)
        ov = np.empty(cnt, np.int64)
        q = 0
        for h in range(cap):
            if hk[h] != -1 and hv[h] != 0:
                ok[q] = hk[h]
                ov[q] = hv[h]
                q += 1
        order = np.argsort(ok)
        return ok[order], ov[order], 0

    @_njit
    def _reduce_sorted_nb(keys, vals):
        N = keys.size
        ok = np.empty(N, np.int64)
        ov = np.empty(N, np.int64)
        q = -1
        last = np.int64(-1)
        for t in range(N):
            if q >= 0 and keys[t] == last:
                ov[q] += vals[t]
            else:
                q += 1
                ok[q] = keys[t]
                ov[q] = vals[t]
                last = keys[t]
        q += 1
        keep = ov[:q] != 0
        return ok[:q][keep], ov[:q][keep]

    @_njit
    def _convolve_nb(ka, va, kb, vb, zero, shifts, mask, n, cap_terms):
        want = min(ka.size * kb.size, cap_terms) * 2 + 16
        cap = 16
        while cap < want:
            cap *= 2
        hk = np.full(cap, -1, np.int64)
        hv = np.zeros(cap, np.int64)
        m = cap - 1
        used = 0
        for a in range(ka.size):
            for b in range(kb.size):
                kk = ka[a] + kb[b] - zero
                if not _in_range(kk, shifts, mask, n):
                    return np.empty(0, np.int64), np.empty(0, np.int64), 1
                h = _mix(kk, m)
                while True:
                    cur = hk[h]
                    if cur == kk:
                        hv[h] += va[a] * vb[b]
                        break
                    if cur == -1:
                        hk[h] = kk
                        hv[h] = va[a] * vb[b]
                        used += 1
                        break
                    h = (h + 1) & m
                if used > cap_terms:
                    return np.empty(0, np.int64), np.empty(0, np.int64), 2
        cnt = 0
        for h in range(cap):
            if hk[h] != -1 and hv[h] != 0:
                cnt += 1
        ok = np.empty(cnt, np.int64)
        ov = np.empty(cnt, np.int64)
        q = 0
        for h in range(cap):
            if hk[h] != -1 and hv[h] != 0:
                ok[q] = hk[h]
                ov[q] = hv[h]
                q += 1
        order = np.argsort(ok)
        return ok[order], ov[order], 0


# ---------------------------------------------------------------------------
# numpy backend (also handles Python-int coefficients via object arrays)


def _reduce_sorted_np(keys: np.ndarray, vals: np.ndarray) -> tuple:
    if keys.size == 0:
        return keys, vals
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    vals = vals[order]
    starts = np.flatnonzero(np.r_[True, keys[1:] != keys[:-1]])
    sums = np.add.reduceat(vals, starts)
    keys = keys[starts]
    keep = sums != 0
    return keys[keep], sums[keep]


def _pairings_np(keys, node, level, theta, P: Packing) -> np.ndarray:
    if node == 0:
        p = np.full(keys.size, level, dtype=np.int64)
        for j in range(P.n):
            if theta[j]:
                p -= theta[j] * (((keys >> P.shifts[j]) & P.mask) - P.off)
        return p
    return ((keys >> P.shifts[node - 1]) & P.mask) - P.off


def _all_in_range_np(keys, P: Packing) -> bool:
    for j in range(P.n + 1):
        f = (keys >> P.shifts[j]) & P.mask
        if f.size and (f.min() < 1 or f.max() > P.mask - 1):
            return False
    return True


def _step_np(keys, vals, node, level, theta, delta, P: Packing, cap_terms):
    p = _pairings_np(keys, node, level, theta, P)
    pos = p >= 0
    neg = p <= -2
    lo = np.where(pos, 0, p + 1)
    hi = np.where(pos, p, -1)
    act = pos | neg
    lo, hi, k0, c0 = lo[act], hi[act], keys[act], vals[act]
    sg = np.where(pos[act], 1, -1)
    if k0.size and not (_all_in_range_np(k0 - lo * delta, P) and _all_in_range_np(k0 - hi * delta, P)):
        raise RangeOverflow("string left the packed field range")
    lens = hi - lo + 1
    total = int(lens.sum())
    if total > 8 * cap_terms:
        # contributions alone exceed what the reduction could fit; reduce in chunks
        return _step_np_chunked(k0, c0, lo, lens, sg, delta, cap_terms)
    rep = np.repeat(np.arange(k0.size), lens)
    first = np.repeat(np.cumsum(lens) - lens, lens)
    s = lo[rep] + (np.arange(total) - first)
    out_k = k0[rep] - s * delta
    out_v = c0[rep] * sg[rep]
    ok, ov = _reduce_sorted_np(out_k, out_v)
    if ok.size > cap_terms:
        raise BudgetExceeded(int(ok.size), cap_terms)
    return ok, ov


def _step_np_chunked(k0, c0, lo, lens, sg, delta, cap_terms):
    acc_k = np.empty(0, np.int64)
    acc_v = np.empty(0, dtype=c0.dtype)
    chunk = max(1, k0.size // max(1, int(lens.sum()) // (2 * cap_terms) + 1))
    for a in range(0, k0.size, chunk):
        sl = slice(a, a + chunk)
        L = lens[sl]
        total = int(L.sum())
        rep = np.repeat(np.arange(L.size), L)
        first = np.repeat(np.cumsum(L) - L, L)
        s = lo[sl][rep] + (np.arange(total) - first)
        ok, ov = _reduce_sorted_np(
            np.concatenate([acc_k, k0[sl][rep] - s * delta]),
            np.concatenate([acc_v, c0[sl][rep] * sg[sl][rep]]),
        )
        acc_k, acc_v = ok, ov
        if acc_k.size > 2 * cap_terms:
            raise BudgetExceeded(int(acc_k.size), cap_terms)
    if acc_k.size > cap_terms:
        raise BudgetExceeded(int(acc_k.size), cap_terms)
    return acc_k, acc_v


def _dot_np(keys, vals, cartan, P: Packing) -> tuple:
    wts, degs = P.unpack(keys)
    c = wts + 1
    sign = np.ones(keys.size, dtype=np.int64)
    alive = np.ones(keys.size, dtype=bool)
    while True:
        bad = (c <= 0) & alive[:, None]
        rows = np.flatnonzero(bad.any(axis=1))
        if rows.size == 0:
            break
        idx = bad[rows].argmax(axis=1)
        m = c[rows, idx]
        sing = m == 0
        alive[rows[sing]] = False
        rows, idx, m = rows[~sing], idx[~sing], m[~sing]
        c[rows] -= m[:, None] * cartan[idx]
        sign[rows] = -sign[rows]
    keep = np.flatnonzero(alive)
    k2 = P.pack(c[keep] - 1, degs[keep])
    v2 = vals[keep] * sign[keep].astype(vals.dtype)
    return k2, v2


if _HAVE_NUMBA:

    @_njit
    def _abs_sum_nb(vals):
        t = 0.0
        for v in vals:
            t += abs(float(v))
        return t

    @_njit
    def _maximal_nb(tops, d):
        """Mask of rows not below an earlier kept row (rows by decreasing height)."""
        T, n = tops.shape
        keep = np.zeros(T, np.bool_)
        kept = np.empty(T, np.int64)
        nk = 0
        for t in range(T):
            covered = False
            for s in range(nk):
                u = kept[s]
                ok = True
                for j in range(n):
                    diff = tops[u, j] - tops[t, j]
                    if diff < 0 or diff % d != 0:
                        ok = False
                        break
                if ok:
                    covered = True
                    break
            if not covered:
                keep[t] = True
                kept[nk] = t
                nk += 1
        return keep

    @_njit
    def _downset_nb(tops, table, d):
        N = table.shape[0]
        T = tops.shape[0]
        n = table.shape[1]
        out = np.zeros(N, np.bool_)
        for i in range(N):
            for t in range(T):
                ok = True
                for j in range(n):
                    diff = tops[t, j] - table[i, j]
                    if diff < 0 or diff % d != 0:
                        ok = False
                        break
                if ok:
                    out[i] = True
                    break
        return out


def _downset_np(tops, table, d) -> np.ndarray:
    out = np.zeros(table.shape[0], dtype=bool)
    for t in tops:
        diff = t[None, :] - table
        out |= np.all(diff >= 0, axis=1) & np.all(diff % d == 0, axis=1)
    return out


def downset(tops: np.ndarray, table: np.ndarray, d: int) -> np.ndarray:
    """Rows of ``table`` lying below some row of ``tops``.

    Rows are weights in scaled simple-root coordinates: mu <= kappa iff
    every coordinate of kappa - mu is a nonnegative multiple of ``d``.
    """
    tops = np.ascontiguousarray(tops, dtype=np.int64).reshape(-1, table.shape[1])
    table = np.ascontiguousarray(table, dtype=np.int64)
    if backend() == "numba":
        if tops.shape[0] > 1:
            tops = tops[_maximal_nb(tops, np.int64(d))]
        return _downset_nb(tops, table, np.int64(d))
    return _downset_np(tops, table, d)


# ---------------------------------------------------------------------------
# public entry points


def abs_total(vals: np.ndarray) -> int:
    """Sum of absolute values as a Python int."""
    if vals.dtype == object:
        return int(sum(abs(int(v)) for v in vals))
    if float(np.abs(vals.astype(np.float64)).sum()) < 2.0**60:
        return int(np.abs(vals).sum())
    return int(sum(abs(int(v)) for v in vals))


def _is_wide(vals: np.ndarray) -> bool:
    """True when coefficients might leave int64 in a sum over ``vals``."""
    if vals.dtype == object:
        return True
    if backend() == "numba":
        return _abs_sum_nb(vals) >= 0.5 * SAFE_BOUND
    return abs_total(vals) >= SAFE_BOUND


def demazure_step(keys, vals, node, level, theta, delta, P: Packing, cap_terms: int, sort: bool = True):
    """Apply the Demazure operator at ``node`` to a packed character.

    ``theta`` holds the highest root in simple-root coordinates (used for
    node 0), ``delta`` the packed increment of the simple root alpha_node.
    Returns (keys, vals), sorted unless ``sort`` is false.
    """
    wide = _is_wide(vals)
    if wide:
        vals = vals.astype(object)
    if backend() == "numba" and not wide:
        ok, ov, status, used = _step_nb(
            keys, vals, node, level, np.asarray(theta, dtype=np.int64), np.int64(delta),
            P.shifts, np.int64(P.mask), np.int64(P.off), P.n, np.int64(cap_terms),
        )
        if status == 1:
            raise RangeOverflow("string left the packed field range")
        if status == 2:
            raise BudgetExceeded(int(used), cap_terms)
        if ok.size > cap_terms:
            raise BudgetExceeded(int(ok.size), cap_terms)
        if not sort:
            return ok, ov
        order = np.argsort(ok)
        return ok[order], ov[order]
    return _step_np(keys, vals, node, level, np.asarray(theta, dtype=np.int64), np.int64(delta), P, cap_terms)


def dot_reduce(keys, vals, cartan: np.ndarray, P: Packing) -> tuple:
    """Straighten every term by the rho-shifted action and collect signs.

    For a Weyl-invariant character this yields its expansion in irreducible
    characters: keys now encode (degree, dominant highest weight).
    """
    cartan = np.asarray(cartan, dtype=np.int64)
    if backend() == "numba" and vals.dtype != object:
        k2, v2, status = _dot_nb(keys, vals, cartan, P.shifts, np.int64(P.mask), np.int64(P.off), P.n)
        if status:
            raise RangeOverflow("straightened weight left the packed field range")
        order = np.argsort(k2, kind="stable")
        return _reduce_sorted_nb(k2[order], v2[order])
    k2, v2 = _dot_np(keys, vals, cartan, P)
    return _reduce_sorted_np(k2, v2)


def convolve(ka, va, kb, vb, P: Packing, cap_terms: int) -> tuple:
    """Product of two packed characters (weights and degrees add)."""
    zero = P.pack(np.zeros((1, P.n), np.int64), np.zeros(1, np.int64))[0]
    wide = (
        va.dtype == object or vb.dtype == object
        or abs_total(va) * abs_total(vb) >= SAFE_BOUND
    )
    if backend() == "numba" and not wide:
        ok, ov, status = _convolve_nb(ka, va, kb, vb, np.int64(zero), P.shifts, np.int64(P.mask), P.n, np.int64(2 * cap_terms))
        if status == 1:
            raise RangeOverflow("product left the packed field range")
        if status == 2 or ok.size > cap_terms:
            raise BudgetExceeded(int(max(ok.size, cap_terms + 1)), cap_terms, "product")
        return ok, ov
    if wide:
        va = va.astype(object)
        vb = vb.astype(object)
    acc_k = np.empty(0, np.int64)
    acc_v = np.empty(0, dtype=va.dtype)
    step = max(1, (4 * cap_terms) // max(1, kb.size))
    for a in range(0, ka.size, step):
        sk = (ka[a:a + step, None] + kb[None, :] - zero).ravel()
        sv = (va[a:a + step, None] * vb[None, :]).ravel()
        if not _all_in_range_np(sk, P):
            raise RangeOverflow("product left the packed field range")
        acc_k, acc_v = _reduce_sorted_np(np.concatenate([acc_k, sk]), np.concatenate([acc_v, sv]))
        if acc_k.size > 2 * cap_terms:
            raise BudgetExceeded(int(acc_k.size), cap_terms, "product")
    if acc_k.size > cap_terms:
        raise BudgetExceeded(int(acc_k.size), cap_terms, "product")
    return acc_k, acc_v


def klimyk(ka, va, kb, vb, cartan: np.ndarray, P: Packing, cap_terms: int) -> tuple:
    """Irreducible expansion of (sum va * ch V(ka)) * (sum vb * e(kb)).

    ``kb`` must describe a Weyl-invariant character; each product
    ch V(kappa) * B is then the rho-shifted straightening of e(kappa) * B.
    """
    cartan = np.asarray(cartan, dtype=np.int64)
    zero = P.pack(np.zeros((1, P.n), np.int64), np.zeros(1, np.int64))[0]
    wide = (
        va.dtype == object or vb.dtype == object
        or abs_total(va) * abs_total(vb) >= SAFE_BOUND
    )
    if backend() == "numba" and not wide:
        ok, ov, status = _klimyk_nb(ka, va, kb, vb, np.int64(zero), cartan, P.shifts, np.int64(P.mask), np.int64(P.off), P.n, np.int64(2 * cap_terms))
        if status == 1:
            raise RangeOverflow("product left the packed field range")
        if status == 2 or ok.size > cap_terms:
            raise BudgetExceeded(int(max(ok.size, cap_terms + 1)), cap_terms, "product expansion")
        return ok, ov
    if wide:
        va = va.astype(object)
        vb = vb.astype(object)
    acc_k = np.empty(0, np.int64)
    acc_v = np.empty(0, dtype=va.dtype)
    step = max(1, (4 * cap_terms) // max(1, kb.size))
    for a in range(0, ka.size, step):
        sk = (ka[a:a + step, None] + kb[None, :] - zero).ravel()
        sv = (va[a:a + step, None] * vb[None, :]).ravel()
        if not _all_in_range_np(sk, P):
            raise RangeOverflow("product left the packed field range")
        dk, dv = _dot_np(sk, sv, cartan, P)
        acc_k, acc_v = _reduce_sorted_np(np.concatenate([acc_k, dk]), np.concatenate([acc_v, dv]))
        if acc_k.size > 2 * cap_terms:
            raise BudgetExceeded(int(acc_k.size), cap_terms, "product expansion")
    if acc_k.size > cap_terms:
        raise BudgetExceeded(int(acc_k.size), cap_terms, "product expansion")
    return acc_k, acc_v
