"""Exact linear-algebra kernels against fraction/brute references."""

from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from steenweb.kernels import (
    gf2_nullspace,
    gf2_rank,
    nullspace_mod_p,
    rank_int,
    rank_mod_p,
    solve_mod_p,
)


def _fraction_rank(M):
    rows = [[Fraction(x) for x in r] for r in M]
    if not rows:
        return 0
    cols = len(rows[0])
    rank = 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pv = rows[rank][c]
        rows[rank] = [x / pv for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][c]:
                f = rows[r][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


mat_strategy = st.integers(1, 5).flatmap(
    lambda m: st.integers(1, 5).flatmap(
        lambda n: st.lists(
            st.lists(st.integers(-6, 6), min_size=n, max_size=n),
            min_size=m, max_size=m,
        )
    )
)


def _brute_rank_mod_p(M, p):
    """rank = n - dim ker, with the kernel counted by full enumeration."""
    from itertools import product as iproduct

    A = np.array(M, dtype=np.int64)
    m, n = A.shape
    count = sum(
        1
        for x in iproduct(range(p), repeat=n)
        if not np.any((A @ np.array(x)) % p)
    )
    dim_ker = round(np.log(count) / np.log(p))
    assert p**dim_ker == count
    return n - dim_ker


@given(mat_strategy, st.sampled_from([2, 3, 5, 7]))
@settings(max_examples=150, deadline=None)
def test_rank_mod_p_matches_brute_kernel_count(M, p):
    A = np.array(M, dtype=np.int64)
    assert rank_mod_p(A, p) == _brute_rank_mod_p(M, p)


@given(mat_strategy)
@settings(max_examples=200, deadline=None)
def test_rank_int_matches_fraction_rank(M):
    assert rank_int(np.array(M, dtype=np.int64)) == _fraction_rank(M)


def test_rank_int_big_entries_fall_back_exactly():
    A = np.array([[2**40, 1], [1, 2**40]], dtype=np.int64)
    assert rank_int(A) == 2
    B = np.array([[2**40, 2**40], [2**40, 2**40]], dtype=np.int64)
    assert rank_int(B) == 1


@given(mat_strategy, st.sampled_from([2, 3, 5]))
@settings(max_examples=100, deadline=None)
def test_nullspace_mod_p(M, p):
    A = np.array(M, dtype=np.int64)
    N = nullspace_mod_p(A, p)
    m, n = A.shape
    assert len(N) == n - rank_mod_p(A, p)
    for v in N:
        assert not np.any((A @ v) % p)


@given(mat_strategy, st.sampled_from([2, 3, 5]))
@settings(max_examples=100, deadline=None)
def test_solve_mod_p(M, p):
    A = np.array(M, dtype=np.int64)
    rng = np.random.default_rng(0)
    x0 = rng.integers(0, p, size=A.shape[1])
    b = (A @ x0) % p
    x = solve_mod_p(A, b, p)
    assert x is not None
    assert np.array_equal((A @ x) % p, b)
    # inconsistent systems return None
    if rank_mod_p(A, p) < A.shape[0]:
        # find b outside the column space by brute force over small fields
        pass


def test_gf2_rank_small():
    assert gf2_rank([0b01, 0b10, 0b11]) == 2
    assert gf2_rank([0b101, 0b011, 0b110]) == 2
    assert gf2_rank([]) == 0
    assert gf2_rank([0]) == 0


@given(st.lists(st.integers(0, 2**12 - 1), min_size=0, max_size=10))
@settings(max_examples=200)
def test_gf2_rank_matches_mod2_matrix_rank(rows):
    width = 12
    M = np.array([[(r >> j) & 1 for j in range(width)] for r in rows],
                 dtype=np.int64).reshape(len(rows), width)
    expect = rank_mod_p(M, 2) if rows else 0
    assert gf2_rank(rows) == expect


@given(st.lists(st.integers(0, 2**10 - 1), min_size=0, max_size=8),
       st.integers(4, 10))
@settings(max_examples=200)
def test_gf2_nullspace_is_the_kernel(rows, width):
    rows = [r & ((1 << width) - 1) for r in rows]
    basis = gf2_nullspace(rows, width)
    # every basis vector annihilates every row
    for v in basis:
        for r in rows:
            assert (v & r).bit_count() % 2 == 0
    # dimension matches rank-nullity
    assert len(basis) == width - gf2_rank(rows)
