"""Action of Steenrod operations on polynomial algebras.

This is the independent oracle for the Adem rewriting engine: operations
act on Z_p[t_1..t_g] (p = 2, |t| = 1, total square t -> t + t^2) or on
Z_p[y_1..y_g] (p odd, |y| = 2, total power y -> y + y^p), via the
multinomial expansion

    Sq^i(t^e) = C(e, i) t^{e+i},    P^i(y^e) = C(e, i) y^{e+i(p-1)},

extended multiplicatively over monomials (Cartan) and linearly.  The
composite-action check compares adem_reduce(m1 o m2) with the action of
m2 followed by m1 on every monomial input of each input slice.

The p = 2 batch path packs monomials into int64 codes (8 bits per
exponent) and runs sparse-row kernels under numba (numpy fallback via
STEENWEB_BACKEND); mod-2 coefficients live in the parity of code
multiplicity.  The odd-p path uses small dense matrices mod p.
"""

from __future__ import annotations

import numpy as np

from .backend import HAVE_NUMBA, maybe_njit
from .steenrod import (
    Prime,
    SteenrodElement,
    adem_reduce,
    admissible_monomials,
    binom_mod_p,
)

# ---------------------------------------------------------------------------
# reference action on dict polynomials (any p, any g)
# ---------------------------------------------------------------------------


def _splittings(e: tuple, i: int, p: int):
    """Yield (j, coeff) with sum(j) = i and coeff = prod C(e_l, j_l) mod p != 0."""
    g = len(e)

    def rec(l, left):
        if l == g - 1:
            c = binom_mod_p(e[l], left, p)
            if c:
                yield (left,), c
            return
        for jl in range(min(e[l], left) + 1):
            c = binom_mod_p(e[l], jl, p)
            if not c:
                continue
            for tail, ct in rec(l + 1, left - jl):
                yield (jl,) + tail, (c * ct) % p
        return

    yield from rec(0, i)


def op_step(prime: Prime, i: int, poly: dict) -> dict:
    """One operation of index i applied to {exponent tuple: coeff}."""
    p = prime.p
    shift = 1 if p == 2 else p - 1
    out: dict = {}
    for e, c in poly.items():
        for j, cf in _splittings(e, i, p):
            m = tuple(a + b * shift for a, b in zip(e, j))
            v = (out.get(m, 0) + c * cf) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def act_reference(prime: Prime, exponents, poly: dict) -> dict:
    """Action of the composition monomial on a polynomial (rightmost first)."""
    for i in reversed(tuple(exponents)):
        poly = op_step(prime, i, poly)
    return poly


def act_element(e: SteenrodElement, poly: dict) -> dict:
    out: dict = {}
    p = e.prime.p
    for mon, c in e.terms.items():
        for m, cf in act_reference(e.prime, mon, poly).items():
            v = (out.get(m, 0) + c * cf) % p
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def slice_monomials(g: int, s: int):
    """All exponent tuples of length g with sum s (lex order)."""
    if g == 1:
        return [(s,)]
    out = []
    for e0 in range(s + 1):
        for tail in slice_monomials(g - 1, s - e0):
            out.append((e0,) + tail)
    return out


# ---------------------------------------------------------------------------
# packed sparse kernels, p = 2, g = 4
# ---------------------------------------------------------------------------
# A "matrix" from an input slice is (indptr, codes): row r holds the sorted
# monomial codes of the image of the r-th input monomial; mod-2 coefficients
# are presence bits.  Codes pack 4 exponents, 8 bits each.


def pack4(e) -> int:
    """Pack up to 4 exponents, 8 bits each (shorter tuples zero-padded)."""
    out = 0
    for k, v in enumerate(e):
        out |= v << (8 * k)
    return out


def unpack4(c: int) -> tuple:
    return (c & 255, (c >> 8) & 255, (c >> 16) & 255, (c >> 24) & 255)


@maybe_njit(cache=True)
def _count_splits4(code, i):  # pragma: no cover - compiled
    e1 = code & 255
    e2 = (code >> 8) & 255
    e3 = (code >> 16) & 255
    e4 = (code >> 24) & 255
    n = 0
    j1 = e1
    while True:
        if j1 <= i:
            j2 = e2
            while True:
                if j1 + j2 <= i:
                    j3 = e3
                    while True:
                        if j1 + j2 + j3 <= i:
                            j4 = i - j1 - j2 - j3
                            if (j4 & ~e4) == 0:
                                n += 1
                        if j3 == 0:
                            break
                        j3 = (j3 - 1) & e3
                if j2 == 0:
                    break
                j2 = (j2 - 1) & e2
        if j1 == 0:
            break
        j1 = (j1 - 1) & e1
    return n


@maybe_njit(cache=True)
def _fill_splits4(code, i, buf, pos):  # pragma: no cover - compiled
    e1 = code & 255
    e2 = (code >> 8) & 255
    e3 = (code >> 16) & 255
    e4 = (code >> 24) & 255
    j1 = e1
    while True:
        if j1 <= i:
            j2 = e2
            while True:
                if j1 + j2 <= i:
                    j3 = e3
                    while True:
                        if j1 + j2 + j3 <= i:
                            j4 = i - j1 - j2 - j3
                            if (j4 & ~e4) == 0:
                                buf[pos] = code + (
                                    j1 | (j2 << 8) | (j3 << 16) | (j4 << 24)
                                )
                                pos += 1
                        if j3 == 0:
                            break
                        j3 = (j3 - 1) & e3
                if j2 == 0:
                    break
                j2 = (j2 - 1) & e2
        if j1 == 0:
            break
        j1 = (j1 - 1) & e1
    return pos


@maybe_njit(cache=True)
def _apply_sq_rows(i, indptr, codes):  # pragma: no cover - compiled
    rows = indptr.shape[0] - 1
    # pass 1: pre-dedupe sizes
    total = 0
    for k in range(codes.shape[0]):
        total += _count_splits4(codes[k], i)
    buf = np.empty(total, dtype=np.int64)
    out_indptr = np.empty(rows + 1, dtype=np.int64)
    out_indptr[0] = 0
    w = 0
    for r in range(rows):
        start = w
        for k in range(indptr[r], indptr[r + 1]):
            w = _fill_splits4(codes[k], i, buf, w)
        seg = buf[start:w]
        seg.sort()
        # parity dedupe in place
        out = start
        k = start
        while k < w:
            run = 1
            while k + run < w and buf[k + run] == buf[k]:
                run += 1
            if run & 1:
                buf[out] = buf[k]
                out += 1
            k += run
        w = out
        out_indptr[r + 1] = w
    return out_indptr, buf[:w].copy()


@maybe_njit(cache=True)
def _xor_merge_rows(indptr_a, codes_a, indptr_b, codes_b):  # pragma: no cover
    rows = indptr_a.shape[0] - 1
    buf = np.empty(codes_a.shape[0] + codes_b.shape[0], dtype=np.int64)
    out_indptr = np.empty(rows + 1, dtype=np.int64)
    out_indptr[0] = 0
    w = 0
    for r in range(rows):
        ia, ea = indptr_a[r], indptr_a[r + 1]
        ib, eb = indptr_b[r], indptr_b[r + 1]
        while ia < ea and ib < eb:
            ca, cb = codes_a[ia], codes_b[ib]
            if ca < cb:
                buf[w] = ca
                w += 1
                ia += 1
            elif cb < ca:
                buf[w] = cb
                w += 1
                ib += 1
            else:
                ia += 1
                ib += 1
        while ia < ea:
            buf[w] = codes_a[ia]
            w += 1
            ia += 1
        while ib < eb:
            buf[w] = codes_b[ib]
            w += 1
            ib += 1
        out_indptr[r + 1] = w
    return out_indptr, buf[:w].copy()


def _apply_sq_rows_py(i, indptr, codes):
    rows = len(indptr) - 1
    out_indptr = np.empty(rows + 1, dtype=np.int64)
    out_indptr[0] = 0
    out: list = []
    for r in range(rows):
        acc: set = set()
        for k in range(indptr[r], indptr[r + 1]):
            e = unpack4(int(codes[k]))
            for j, _ in _splittings(e, i, 2):
                acc ^= {pack4(tuple(a + b for a, b in zip(e, j)))}
        out.extend(sorted(acc))
        out_indptr[r + 1] = len(out)
    return out_indptr, np.array(out, dtype=np.int64)


def apply_sq_rows(i, mat):
    """Apply Sq^i to every row of a packed sparse matrix."""
    indptr, codes = mat
    if HAVE_NUMBA:
        return _apply_sq_rows(np.int64(i), indptr, codes)
    return _apply_sq_rows_py(int(i), indptr, codes)


def xor_merge(mat_a, mat_b):
    if HAVE_NUMBA:
        return _xor_merge_rows(mat_a[0], mat_a[1], mat_b[0], mat_b[1])
    rows = len(mat_a[0]) - 1
    out_indptr = np.empty(rows + 1, dtype=np.int64)
    out_indptr[0] = 0
    out: list = []
    for r in range(rows):
        sa = set(int(c) for c in mat_a[1][mat_a[0][r] : mat_a[0][r + 1]])
        sb = set(int(c) for c in mat_b[1][mat_b[0][r] : mat_b[0][r + 1]])
        out.extend(sorted(sa ^ sb))
        out_indptr[r + 1] = len(out)
    return out_indptr, np.array(out, dtype=np.int64)


def mats_equal(mat_a, mat_b) -> bool:
    return np.array_equal(mat_a[0], mat_b[0]) and np.array_equal(mat_a[1], mat_b[1])


def identity_mat(g: int, d: int):
    codes = np.array(sorted(pack4(e) for e in slice_monomials(g, d)), dtype=np.int64)
    indptr = np.arange(len(codes) + 1, dtype=np.int64)
    return indptr, codes


class _LazyChainCache:
    """Matrices of admissible monomials applied after a fixed seed matrix.

    mat(mon) = Sq^{mon[0]} applied to mat(mon[1:]); tails of admissible
    monomials are admissible, so the cache is shared across requests.
    """

    def __init__(self, seed_mat):
        self.mats = {(): seed_mat}

    def mat(self, mon: tuple):
        got = self.mats.get(mon)
        if got is not None:
            return got
        out = apply_sq_rows(mon[0], self.mat(mon[1:]))
        self.mats[mon] = out
        return out


def composite_action_check_mod2(g: int = 4, max_total: int = 20, input_max=None):
    """Compare adem_reduce(m1 o m2) with the two-step action, p = 2.

    All ordered pairs of nonempty admissible monomials with
    deg m1 + deg m2 <= max_total act on every monomial of Z_2[t_1..t_g]
    in each degree d <= input_max (default max_total).  Returns a report
    dict with pair/check/mismatch counts.
    """
    two = Prime(2)
    if input_max is None:
        input_max = max_total
    adm = {d: [tuple(m) for m in admissible_monomials(two, d)] for d in range(max_total + 1)}
    pairs = [
        (m1, m2)
        for d1 in range(1, max_total)
        for d2 in range(1, max_total + 1 - d1)
        for m1 in adm[d1]
        for m2 in adm[d2]
    ]
    reductions = {}
    for m1, m2 in pairs:
        e = adem_reduce(SteenrodElement.monomial(two, m1 + m2))
        reductions[m1 + m2] = sorted(e.terms)  # mod 2: coefficients are 1
    by_m2: dict = {}
    for m1, m2 in pairs:
        by_m2.setdefault(m2, []).append(m1)
    mismatches = []
    checks = 0
    for d in range(input_max + 1):
        lhs_cache = _LazyChainCache(identity_mat(g, d))
        for m2, m1s in sorted(by_m2.items()):
            rhs_cache = _LazyChainCache(lhs_cache.mat(m2))
            for m1 in m1s:
                rhs = rhs_cache.mat(m1)
                terms = reductions[m1 + m2]
                if terms:
                    lhs = lhs_cache.mat(terms[0])
                    for t in terms[1:]:
                        lhs = xor_merge(lhs, lhs_cache.mat(t))
                else:
                    n_rows = len(rhs[0]) - 1
                    lhs = (np.zeros(n_rows + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))
                checks += 1
                if not mats_equal(lhs, rhs):
                    mismatches.append({"m1": list(m1), "m2": list(m2), "input_degree": d})
    return {
        "p": 2,
        "generators": g,
        "max_total_degree": max_total,
        "input_max_degree": input_max,
        "pairs": len(pairs),
        "checks": checks,
        "mismatches": mismatches,
        "mismatch_count": len(mismatches),
    }


# ---------------------------------------------------------------------------
# dense path, odd p
# ---------------------------------------------------------------------------


class _DenseAction:
    """Dense mod-p matrices of single operations between exponent slices."""

    def __init__(self, prime: Prime, g: int):
        self.p = prime.p
        self.prime = prime
        self.g = g
        self.slices: dict = {}
        self.single: dict = {}
        self.chains: dict = {}

    def slice(self, s: int):
        got = self.slices.get(s)
        if got is None:
            mons = slice_monomials(self.g, s)
            got = (mons, {m: i for i, m in enumerate(mons)})
            self.slices[s] = got
        return got

    def op_matrix(self, i: int, s: int):
        """Matrix of the i-th operation from exponent-sum slice s (rows = source)."""
        key = (i, s)
        got = self.single.get(key)
        if got is not None:
            return got
        p = self.p
        src, _ = self.slice(s)
        tgt_mons, tgt_idx = self.slice(s + i * (p - 1))
        M = np.zeros((len(src), len(tgt_mons)), dtype=np.int64)
        for r, e in enumerate(src):
            for j, cf in _splittings(e, i, p):
                m = tuple(a + b * (p - 1) for a, b in zip(e, j))
                M[r, tgt_idx[m]] = (M[r, tgt_idx[m]] + cf) % p
        self.single[key] = M
        return M

    def chain_matrix(self, mon: tuple, s: int):
        """Matrix of a composition monomial from exponent-sum slice s.

        Memoized; intended for admissible monomials (tails of admissible
        monomials are admissible, so the cache stays small).
        """
        key = (mon, s)
        got = self.chains.get(key)
        if got is not None:
            return got
        if not mon:
            n = len(self.slice(s)[0])
            out = np.eye(n, dtype=np.int64)
        else:
            tail = self.chain_matrix(mon[1:], s)
            s_mid = s + sum(mon[1:]) * (self.p - 1)
            head = self.op_matrix(mon[0], s_mid)
            out = (tail @ head) % self.p
        self.chains[key] = out
        return out


def composite_action_check_oddp(p: int, g: int = 3, max_total: int = 40, input_max=None):
    """Odd-p analogue of the composite-action check, on Z_p[y_1..y_g].

    Degrees are cohomological: operations raise degree by 2i(p-1), inputs
    of degree d correspond to exponent sum d/2.
    """
    prime = Prime(p)
    if input_max is None:
        input_max = max_total
    unit = 2 * (p - 1)
    maxsum = max_total // unit  # operation exponent-sum budget
    adm = {}
    for s in range(maxsum + 1):
        adm[s] = [tuple(m) for m in admissible_monomials(prime, s * unit)]
    pairs = [
        (m1, m2)
        for s1 in range(1, maxsum)
        for s2 in range(1, maxsum + 1 - s1)
        for m1 in adm[s1]
        for m2 in adm[s2]
    ]
    act = _DenseAction(prime, g)
    mismatches = []
    checks = 0
    for m1, m2 in pairs:
        red = adem_reduce(SteenrodElement.monomial(prime, m1 + m2))
        for d in range(0, input_max + 1, 2):
            s = d // 2
            s_mid = s + sum(m2) * (p - 1)
            rhs = (act.chain_matrix(m2, s) @ act.chain_matrix(m1, s_mid)) % p
            lhs = np.zeros_like(rhs)
            for t, c in red.terms.items():
                lhs = (lhs + c * act.chain_matrix(t, s)) % p
            checks += 1
            if not np.array_equal(lhs, rhs):
                mismatches.append({"m1": list(m1), "m2": list(m2), "input_degree": d})
    return {
        "p": p,
        "generators": g,
        "max_total_degree": max_total,
        "input_max_degree": input_max,
        "pairs": len(pairs),
        "checks": checks,
        "mismatches": mismatches,
        "mismatch_count": len(mismatches),
    }
