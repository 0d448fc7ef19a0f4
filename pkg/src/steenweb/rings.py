"""Finite graded-commutative algebras with exact coefficients.

A GradedAlgebra stores per-degree ranks, dense multiplication tables,
and (over Z_p) optional operation tables.  Coefficients are either the
prime field Z_p (int64 arrays, reduced eagerly) or Q (Fraction entries
in nested lists).  No floating point anywhere.

Instances are immutable once built and validated; analyses may share
them freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from .kernels import rank_int, rank_mod_p
from .steenrod import Prime


class RingError(Exception):
    pass


class SchemaError(RingError):
    """Malformed ring-literal document."""


@dataclass(frozen=True)
class CoefficientField:
    """Z_p (kind='Zp', with prime) or the rationals (kind='Q')."""

    kind: str
    prime: Prime | None = None

    def __post_init__(self):
        if self.kind == "Zp":
            if self.prime is None:
                raise ValueError("Zp needs a prime")
        elif self.kind != "Q":
            raise ValueError("kind must be 'Zp' or 'Q'")

    @property
    def p(self):
        return self.prime.p if self.kind == "Zp" else None

    def __repr__(self):
        return "Q" if self.kind == "Q" else f"Z_{self.prime.p}"


def Zp(p: int) -> CoefficientField:
    return CoefficientField("Zp", Prime(p))


QQ = CoefficientField("Q")


def _fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise SchemaError(f"not an exact rational: {v!r}")


class GradedAlgebra:
    """Graded-commutative algebra on [0..n] with dense product tables.

    products[(i, j)] maps a pair of basis indices to the coordinate vector
    of e^i_a * e^j_b in degree i+j: a Z_p table is an int64 array of shape
    (d_i, d_j, d_{i+j}); a Q table is a nested list of Fractions.  Degrees
    with i + j > n multiply to zero and store no table.

    steenrod maps (k, from_deg) to the matrix of the k-th operation
    (Sq^k or P^k) with rows indexed by the source basis.
    """

    def __init__(self, n, field, dims, products, steenrod=None, labels=None,
                 poincare=True, name=""):
        self.n = int(n)
        self.field = field
        self.dims = [int(d) for d in dims]
        if len(self.dims) != self.n + 1:
            raise RingError("dims must have length n+1")
        if self.dims[0] != 1:
            raise RingError("degree 0 must have rank 1")
        self.products = products
        self.steenrod = steenrod
        self.labels = labels or {}
        self.poincare = bool(poincare)
        self.name = name or f"ring_n{self.n}"

    # -- scalar helpers -----------------------------------------------------

    def zero_vec(self, deg):
        d = self.dims[deg] if 0 <= deg <= self.n else 0
        if self.field.kind == "Zp":
            return np.zeros(d, dtype=np.int64)
        return [Fraction(0)] * d

    def coerce_vec(self, deg, vec):
        if self.field.kind == "Zp":
            v = np.asarray(vec, dtype=np.int64) % self.field.p
        else:
            v = [_fraction(x) for x in vec]
        if len(v) != self.dims[deg]:
            raise RingError(f"vector has wrong length for degree {deg}")
        return v

    def table(self, i, j):
        return self.products.get((i, j))

    def mult(self, i, vi, j, vj):
        """Product of elements of degrees i and j (coordinates in i+j)."""
        if i + j > self.n:
            return self.zero_vec(i + j)  # empty vector
        t = self.table(i, j)
        out = self.zero_vec(i + j)
        if t is None:
            return out
        if self.field.kind == "Zp":
            vi = np.asarray(vi, dtype=np.int64) % self.field.p
            vj = np.asarray(vj, dtype=np.int64) % self.field.p
            return np.einsum("a,b,abt->t", vi, vj, t) % self.field.p
        for a, ca in enumerate(vi):
            if ca == 0:
                continue
            for b, cb in enumerate(vj):
                if cb == 0:
                    continue
                row = t[a][b]
                for tt, cv in enumerate(row):
                    if cv:
                        out[tt] += ca * cb * cv
        return out

    def mult_matrix(self, k, x, i):
        """Matrix of left multiplication by x in degree k, from H^i to H^{i+k}.

        Rows index the target basis, columns the source basis.
        """
        di, dt = self.dims[i], self.dims[i + k]
        if self.field.kind == "Zp":
            M = np.zeros((dt, di), dtype=np.int64)
        else:
            M = [[Fraction(0)] * di for _ in range(dt)]
        t = self.table(k, i)
        if t is None:
            return M
        if self.field.kind == "Zp":
            # t[a, b, :] = e^k_a * e^i_b
            return np.einsum("a,abt->tb", np.asarray(x, dtype=np.int64) % self.field.p, t) % self.field.p
        for a, ca in enumerate(x):
            if ca == 0:
                continue
            for b in range(di):
                row = t[a][b]
                for tt, cv in enumerate(row):
                    if cv:
                        M[tt][b] += ca * cv
        return M

    def unit(self):
        v = self.zero_vec(0)
        if self.field.kind == "Zp":
            v[0] = 1
        else:
            v[0] = Fraction(1)
        return v

    def op_apply(self, k, deg, vec):
        """Apply the k-th operation to an element of the given degree."""
        if self.steenrod is None:
            raise RingError("no operation tables")
        shift = k if self.field.p == 2 else 2 * k * (self.field.p - 1)
        tgt = deg + shift
        if k == 0:
            return np.asarray(vec, dtype=np.int64) % self.field.p
        if tgt > self.n:
            return np.zeros(self.dims[tgt] if tgt <= self.n else 0, dtype=np.int64)
        M = self.steenrod.get((k, deg))
        if M is None:
            return np.zeros(self.dims[tgt], dtype=np.int64)
        return (np.asarray(vec, dtype=np.int64) % self.field.p) @ M % self.field.p

    def vec_is_zero(self, v):
        if self.field.kind == "Zp":
            return not np.any(np.asarray(v) % self.field.p)
        return all(x == 0 for x in v)

    def __repr__(self):
        return f"GradedAlgebra({self.name}, n={self.n}, {self.field}, dims={self.dims})"


# ---------------------------------------------------------------------------
# ranks and Betti-type invariants
# ---------------------------------------------------------------------------


def rank_matrix(A: GradedAlgebra, M) -> int:
    """Exact rank of a matrix in the algebra's coefficient field."""
    if A.field.kind == "Zp":
        M = np.asarray(M, dtype=np.int64)
        if M.size == 0:
            return 0
        return rank_mod_p(M, A.field.p)
    return rank_fraction_matrix(M)


def rank_fraction_matrix(M) -> int:
    """Rank over Q of a nested list of Fractions (denominators cleared rowwise)."""
    rows = len(M)
    if rows == 0 or len(M[0]) == 0:
        return 0
    cleared = []
    for row in M:
        den = 1
        for x in row:
            den = den * x.denominator // np.gcd(den, x.denominator)
        cleared.append([int(x * den) for x in row])
    arr_ok = all(abs(v) < 2**62 for row in cleared for v in row)
    if arr_ok:
        return rank_int(np.array(cleared, dtype=np.int64))
    from .kernels import _rank_int_exact

    return _rank_int_exact(cleared)


def betti(A: GradedAlgebra):
    return list(A.dims)


def b_odd(A: GradedAlgebra) -> int:
    return sum(A.dims[1::2])


def euler(A: GradedAlgebra) -> int:
    return sum((-1) ** i * d for i, d in enumerate(A.dims))


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    ring: str
    failures: list = dc_field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def add(self, axiom, witness):
        self.failures.append({"axiom": axiom, "witness": witness})

    def to_json(self):
        return {"ring": self.ring, "ok": self.ok, "failures": self.failures}


def _basis_vec(A, deg, idx):
    v = A.zero_vec(deg)
    if A.field.kind == "Zp":
        v[idx] = 1
    else:
        v[idx] = Fraction(1)
    return v


def validate(A: GradedAlgebra) -> ValidationReport:
    """Check every structural axiom; failures carry a witness tuple."""
    rep = ValidationReport(A.name)
    n = A.n
    if A.dims[0] != 1:
        rep.add("unit-rank", {"d0": A.dims[0]})
        return rep

    # unit acts as identity
    one = A.unit()
    for j in range(n + 1):
        for b in range(A.dims[j]):
            eb = _basis_vec(A, j, b)
            left = A.mult(0, one, j, eb)
            right = A.mult(j, eb, 0, one)
            if not _vec_eq(A, left, eb) or not _vec_eq(A, right, eb):
                rep.add("unit-identity", {"degree": j, "index": b})

    # graded commutativity
    for i in range(n + 1):
        for j in range(i, n + 1 - i):
            for a in range(A.dims[i]):
                for b in range(A.dims[j]):
                    ab = A.mult(i, _basis_vec(A, i, a), j, _basis_vec(A, j, b))
                    ba = A.mult(j, _basis_vec(A, j, b), i, _basis_vec(A, i, a))
                    sign = -1 if (i % 2) and (j % 2) else 1
                    if not _vec_eq(A, ab, _scale(A, sign, ba)):
                        rep.add("graded-commutativity", {"i": i, "a": a, "j": j, "b": b})

    # associativity on basis triples
    for i in range(n + 1):
        for j in range(n + 1 - i):
            for k in range(n + 1 - i - j):
                for a in range(A.dims[i]):
                    ea = _basis_vec(A, i, a)
                    for b in range(A.dims[j]):
                        eb = _basis_vec(A, j, b)
                        ab = A.mult(i, ea, j, eb)
                        for c in range(A.dims[k]):
                            ec = _basis_vec(A, k, c)
                            lhs = A.mult(i + j, ab, k, ec)
                            rhs = A.mult(i, ea, j + k, A.mult(j, eb, k, ec))
                            if not _vec_eq(A, lhs, rhs):
                                rep.add(
                                    "associativity",
                                    {"i": i, "a": a, "j": j, "b": b, "k": k, "c": c},
                                )

    # Poincare duality
    if A.poincare:
        if A.dims[n] != 1:
            rep.add("poincare-top-rank", {"dn": A.dims[n]})
        else:
            for i in range(n + 1):
                j = n - i
                di, dj = A.dims[i], A.dims[j]
                if di != dj:
                    rep.add("poincare-rank-symmetry", {"i": i, "di": di, "dj": dj})
                    continue
                if di == 0:
                    continue
                if A.field.kind == "Zp":
                    P = np.zeros((di, dj), dtype=np.int64)
                else:
                    P = [[Fraction(0)] * dj for _ in range(di)]
                for a in range(di):
                    for b in range(dj):
                        v = A.mult(i, _basis_vec(A, i, a), j, _basis_vec(A, j, b))
                        if A.field.kind == "Zp":
                            P[a, b] = v[0]
                        else:
                            P[a][b] = v[0]
                if rank_matrix(A, P) != di:
                    rep.add("poincare-nondegenerate", {"i": i})

    # operation tables
    if A.steenrod is not None:
        _validate_steenrod(A, rep)
    return rep


def _validate_steenrod(A: GradedAlgebra, rep: ValidationReport):
    p = A.field.p
    unit_shift = 1 if p == 2 else 2 * (p - 1)
    kmax = A.n // unit_shift
    for deg in range(A.n + 1):
        for b in range(A.dims[deg]):
            eb = _basis_vec(A, deg, b)
            # top-power rule and vanishing
            for k in range(1, kmax + 1):
                img = A.op_apply(k, deg, eb)
                frame = k if p == 2 else 2 * k
                if frame == deg:
                    # expect x^p, by repeated multiplication
                    power = eb
                    acc_deg = deg
                    for _ in range(p - 1):
                        power = A.mult(acc_deg, power, deg, eb)
                        acc_deg += deg
                    if acc_deg <= A.n and not _vec_eq(A, img, power):
                        rep.add("op-top-power", {"k": k, "degree": deg, "index": b})
                elif frame > deg:
                    if img.size and np.any(img):
                        rep.add("op-vanishing", {"k": k, "degree": deg, "index": b})

    # Cartan formula on all basis pairs
    for i in range(A.n + 1):
        for j in range(A.n + 1 - i):
            for a in range(A.dims[i]):
                ea = _basis_vec(A, i, a)
                for b in range(A.dims[j]):
                    eb = _basis_vec(A, j, b)
                    ab = A.mult(i, ea, j, eb)
                    for k in range(1, kmax + 1):
                        tgt = i + j + k * unit_shift
                        if tgt > A.n:
                            break
                        lhs = A.op_apply(k, i + j, ab)
                        rhs = np.zeros(A.dims[tgt], dtype=np.int64)
                        for u in range(k + 1):
                            fa = A.op_apply(u, i, ea)
                            fb = A.op_apply(k - u, j, eb)
                            da, db = i + u * unit_shift, j + (k - u) * unit_shift
                            if da > A.n or db > A.n:
                                continue
                            rhs = (rhs + A.mult(da, fa, db, fb)) % p
                        if not np.array_equal(lhs % p, rhs):
                            rep.add("op-cartan", {"k": k, "i": i, "a": a, "j": j, "b": b})
    return rep


def _vec_eq(A, u, v):
    if A.field.kind == "Zp":
        u = np.asarray(u) % A.field.p
        v = np.asarray(v) % A.field.p
        return u.shape == v.shape and np.array_equal(u, v)
    return len(u) == len(v) and all(x == y for x, y in zip(u, v))


def _scale(A, c, v):
    if A.field.kind == "Zp":
        return (c * np.asarray(v)) % A.field.p
    return [c * x for x in v]
