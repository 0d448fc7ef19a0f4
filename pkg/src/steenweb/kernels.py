"""Exact linear-algebra kernels (mod-p, GF(2), and integer rank).

Everything here is exact: prime-field arithmetic on int64 arrays,
packed GF(2) words, and fraction-free integer elimination.  No floats.

Each kernel has a numba ``@njit`` build and a pure-numpy build; the
active one is chosen by :mod:`steenweb.backend` (STEENWEB_BACKEND).
"""

from __future__ import annotations

import numpy as np

from .backend import HAVE_NUMBA, maybe_njit

# ---------------------------------------------------------------------------
# mod-p elimination
# ---------------------------------------------------------------------------


def _inv_mod(a: int, p: int) -> int:
    return pow(int(a), p - 2, p)


@maybe_njit(cache=True)
def _rank_mod_p_jit(A, p):  # pragma: no cover - compiled
    m, n = A.shape
    M = A % p
    rank = 0
    for col in range(n):
        piv = -1
        for row in range(rank, m):
            if M[row, col] != 0:
                piv = row
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(n):
                tmp = M[rank, k]
                M[rank, k] = M[piv, k]
                M[piv, k] = tmp
        # inverse by Fermat (p prime, exponent small)
        inv = 1
        base = M[rank, col] % p
        e = p - 2
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        for k in range(col, n):
            M[rank, k] = (M[rank, k] * inv) % p
        for row in range(m):
            if row != rank and M[row, col] != 0:
                f = M[row, col]
                for k in range(col, n):
                    M[row, k] = (M[row, k] - f * M[rank, k]) % p
        rank += 1
        if rank == m:
            break
    return rank


def _rank_mod_p_np(A, p):
    M = np.asarray(A, dtype=np.int64) % p
    m, n = M.shape
    rank = 0
    for col in range(n):
        piv = np.nonzero(M[rank:, col])[0]
        if piv.size == 0:
            continue
        piv = rank + piv[0]
        if piv != rank:
            M[[rank, piv]] = M[[piv, rank]]
        M[rank] = (M[rank] * _inv_mod(M[rank, col], p)) % p
        rows = np.nonzero(M[:, col])[0]
        rows = rows[rows != rank]
        M[rows] = (M[rows] - np.outer(M[rows, col], M[rank])) % p
        rank += 1
        if rank == m:
            break
    return rank


def rank_mod_p(A, p: int) -> int:
    """Rank of an integer matrix over the prime field F_p."""
    A = np.ascontiguousarray(A, dtype=np.int64)
    if A.size == 0:
        return 0
    if HAVE_NUMBA:
        return int(_rank_mod_p_jit(A.copy(), np.int64(p)))
    return int(_rank_mod_p_np(A, p))


def rref_mod_p(A, p: int):
    """Reduced row-echelon form over F_p.

    Returns (R, pivot_cols).  Deterministic: first nonzero pivot per column.
    """
    M = np.asarray(A, dtype=np.int64).copy() % p
    m, n = M.shape
    pivots = []
    rank = 0
    for col in range(n):
        piv = np.nonzero(M[rank:, col])[0]
        if piv.size == 0:
            continue
        piv = rank + piv[0]
        if piv != rank:
            M[[rank, piv]] = M[[piv, rank]]
        M[rank] = (M[rank] * _inv_mod(M[rank, col], p)) % p
        rows = np.nonzero(M[:, col])[0]
        rows = rows[rows != rank]
        if rows.size:
            M[rows] = (M[rows] - np.outer(M[rows, col], M[rank])) % p
        pivots.append(col)
        rank += 1
        if rank == m:
            break
    return M, pivots


def nullspace_mod_p(A, p: int):
    """Basis (rows) of {x : A x = 0} over F_p, in echelon order."""
    A = np.asarray(A, dtype=np.int64)
    m, n = A.shape
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    R, pivots = rref_mod_p(A, p)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for bi, fc in enumerate(free):
        basis[bi, fc] = 1
        for ri, pc in enumerate(pivots):
            basis[bi, pc] = (-R[ri, fc]) % p
    return basis


def solve_mod_p(A, b, p: int):
    """One solution of A x = b over F_p, or None if inconsistent."""
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    m, n = A.shape
    aug = np.concatenate([A % p, (b % p).reshape(m, 1)], axis=1)
    R, pivots = rref_mod_p(aug, p)
    if n in pivots:
        return None
    x = np.zeros(n, dtype=np.int64)
    for ri, pc in enumerate(pivots):
        x[pc] = R[ri, n]
    return x


# ---------------------------------------------------------------------------
# exact integer rank (rank over Q)
# ---------------------------------------------------------------------------


@maybe_njit(cache=True)
def _rank_int_bareiss_jit(A):  # pragma: no cover - compiled
    m, n = A.shape
    M = A.copy()
    rank = 0
    prev = np.int64(1)
    for col in range(n):
        piv = -1
        for row in range(rank, m):
            if M[row, col] != 0:
                piv = row
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(n):
                tmp = M[rank, k]
                M[rank, k] = M[piv, k]
                M[piv, k] = tmp
        for row in range(rank + 1, m):
            for k in range(col + 1, n):
                M[row, k] = (M[rank, col] * M[row, k] - M[row, col] * M[rank, k]) // prev
            M[row, col] = 0
        prev = M[rank, col]
        rank += 1
        if rank == m:
            break
    return rank


def _rank_int_bareiss_np(A):
    M = np.asarray(A, dtype=np.int64).copy()
    m, n = M.shape
    rank = 0
    prev = 1
    for col in range(n):
        piv = np.nonzero(M[rank:, col])[0]
        if piv.size == 0:
            continue
        piv = rank + piv[0]
        if piv != rank:
            M[[rank, piv]] = M[[piv, rank]]
        below = M[rank + 1 :]
        if below.shape[0]:
            upd = (M[rank, col] * below[:, col + 1 :] - np.outer(below[:, col], M[rank, col + 1 :]))
            below[:, col + 1 :] = upd // prev
            below[:, col] = 0
        prev = int(M[rank, col])
        rank += 1
        if rank == m:
            break
    return rank


def _rank_int_exact(A) -> int:
    # arbitrary-precision Bareiss for matrices whose minors may overflow int64
    M = [[int(x) for x in row] for row in A]
    m = len(M)
    n = len(M[0]) if m else 0
    rank = 0
    prev = 1
    for col in range(n):
        piv = next((r for r in range(rank, m) if M[r][col] != 0), None)
        if piv is None:
            continue
        if piv != rank:
            M[rank], M[piv] = M[piv], M[rank]
        for row in range(rank + 1, m):
            for k in range(col + 1, n):
                M[row][k] = (M[rank][col] * M[row][k] - M[row][col] * M[rank][k]) // prev
            M[row][col] = 0
        prev = M[rank][col]
        rank += 1
        if rank == m:
            break
    return rank


def rank_int(A) -> int:
    """Exact rank over Q of an integer matrix.

    Uses fraction-free elimination in int64 when a Hadamard bound shows the
    intermediate minors fit; falls back to arbitrary precision otherwise.
    """
    A = np.ascontiguousarray(A, dtype=np.int64)
    m, n = A.shape
    if A.size == 0:
        return 0
    amax = int(np.max(np.abs(A)))
    if amax == 0:
        return 0
    k = min(m, n)
    # |minor of size k| <= (n * amax^2)^(k/2); stay well under 2^63
    if (n * amax * amax) ** ((k + 1) // 2) < 2**60:
        if HAVE_NUMBA:
            return int(_rank_int_bareiss_jit(A.copy()))
        return int(_rank_int_bareiss_np(A))
    return _rank_int_exact(A)


# ---------------------------------------------------------------------------
# GF(2), packed one-word rows (up to 64 columns)
# ---------------------------------------------------------------------------


@maybe_njit(cache=True)
def _gf2_rank_jit(rows):  # pragma: no cover - compiled
    basis = np.zeros(64, dtype=np.uint64)
    rank = 0
    for i in range(rows.shape[0]):
        v = rows[i]
        while v != np.uint64(0):
            h = 0
            t = v
            while t > np.uint64(1):
                t >>= np.uint64(1)
                h += 1
            if basis[h] != np.uint64(0):
                v ^= basis[h]
            else:
                basis[h] = v
                rank += 1
                break
    return rank


def _gf2_rank_np(rows):
    basis = {}
    rank = 0
    for v in rows:
        v = int(v)
        while v:
            h = v.bit_length() - 1
            if h in basis:
                v ^= basis[h]
            else:
                basis[h] = v
                rank += 1
                break
    return rank


def gf2_rank(rows) -> int:
    """Rank over GF(2) of bit-packed rows (python ints or uint64 array)."""
    arr = np.asarray(rows, dtype=np.uint64)
    if arr.size == 0:
        return 0
    if HAVE_NUMBA:
        return int(_gf2_rank_jit(arr))
    return _gf2_rank_np(arr)


def gf2_nullspace(rows, width: int) -> list[int]:
    """Basis of {v in GF(2)^width : for every row r, popcount(v & r) even}.

    Rows are bit-packed ints with bit j = coefficient of coordinate j.
    Returned vectors are bit-packed ints, one per free column, ordered by
    free-column index (deterministic).
    """
    work: list[int] = []
    pivcols: list[int] = []
    for r in rows:
        r = int(r)
        for c, pr in zip(pivcols, work):
            if (r >> c) & 1:
                r ^= pr
        if r:
            c = (r & -r).bit_length() - 1
            # full reduction: clear the new pivot column from earlier rows
            for i in range(len(work)):
                if (work[i] >> c) & 1:
                    work[i] ^= r
            work.append(r)
            pivcols.append(c)
    pivot_set = set(pivcols)
    basis = []
    for fc in range(width):
        if fc in pivot_set:
            continue
        v = 1 << fc
        for c, pr in zip(pivcols, work):
            if (pr >> fc) & 1:
                v |= 1 << c
        basis.append(v)
    return basis


def popcount(x: int) -> int:
    return int(x).bit_count()
