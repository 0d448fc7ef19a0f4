"""Constructors for the model graded algebras, plus ring-literal JSON I/O.

Builders return validated GradedAlgebra instances.  Over Z_p the single-
generator families carry operation tables derived from the total
operation of a degree-one (p = 2) or degree-two (p odd) class: the
generator of degree k is modelled as the m-th power of that class
(m = k or k/2), which forces

    total(x) = sum_j C(m, j) x^{1 + j(p-1)/m}

whenever every surviving binomial has m | j(p-1); other degrees get no
tables.  The quaternionic family at odd p inherits total(y) =
y + 2 y^{(p+1)/2} + y^p this way (a modelling constant, fixed by the
squared-class embedding).
"""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np

from .kernels import rref_mod_p
from .rings import (
    QQ,
    CoefficientField,
    GradedAlgebra,
    RingError,
    SchemaError,
    Zp,
    validate,
)
from .steenrod import binom_mod_p


def _build_validated(A: GradedAlgebra) -> GradedAlgebra:
    rep = validate(A)
    if not rep.ok:
        raise RingError(f"builder produced an invalid ring: {rep.failures[:3]}")
    return A


def _table(field, di, dj, dt):
    if field.kind == "Zp":
        return np.zeros((di, dj, dt), dtype=np.int64)
    return [[[Fraction(0) for _ in range(dt)] for _ in range(dj)] for _ in range(di)]


def _set(field, t, a, b, c, v):
    if field.kind == "Zp":
        t[a, b, c] = v % field.p
    else:
        t[a][b][c] = Fraction(v)


# ---------------------------------------------------------------------------
# single-generator truncated rings (spheres, CP, HP, RP-like)
# ---------------------------------------------------------------------------


def _trunc_operation_tables(field, k, q):
    """Operation tables for Z_p[x]/x^{q+1}, |x| = k, or None if no standard model."""
    if field.kind != "Zp":
        return None
    if q == 1:
        return {}  # two-class ring: every positive operation lands above n
    p = field.p
    m = k if p == 2 else k // 2
    if p != 2 and k % 2:
        return None
    # total operation on the degree-one/two class t: t + t^p
    # on x = t^m:  sum_j C(m, j) t^{m + j(p-1)}
    base = {}
    for j in range(m + 1):
        c = binom_mod_p(m, j, p)
        if not c:
            continue
        if (j * (p - 1)) % m:
            return None  # power not expressible in x: no standard model
        base[1 + j * (p - 1) // m] = c
    # total(x^e) = base^e truncated at x^{q+1}
    unit_shift = 1 if p == 2 else 2 * (p - 1)
    tables: dict = {}
    tot = {0: 1}
    for e in range(1, q + 1):
        new = {}
        for f1, c1 in tot.items():
            for f2, c2 in base.items():
                f = f1 + f2
                if f > q:
                    continue
                new[f] = (new.get(f, 0) + c1 * c2) % p
        tot = new
        for f, c in tot.items():
            if c == 0 or f == e:
                continue
            raise_deg = (f - e) * k
            if raise_deg % unit_shift:
                raise RingError("inconsistent operation degree")
            s = raise_deg // unit_shift
            M = tables.setdefault((s, e * k), np.zeros((1, 1), dtype=np.int64))
            M[0, 0] = c
    return tables


def build_truncated_poly(k: int, q: int, field: CoefficientField, name=None) -> GradedAlgebra:
    """Z[x]/x^{q+1} with |x| = k: dims 1 at multiples of k up to n = qk."""
    if k < 1 or q < 1:
        raise ValueError("need k >= 1 and q >= 1")
    n = k * q
    dims = [1 if d % k == 0 else 0 for d in range(n + 1)]
    products = {}
    for a in range(q + 1):
        for b in range(q + 1 - a):
            t = _table(field, 1, 1, 1)
            _set(field, t, 0, 0, 0, 1)
            products[(a * k, b * k)] = t
    labels = {a * k: [f"x^{a}" if a > 1 else ("x" if a else "1")] for a in range(q + 1)}
    A = GradedAlgebra(
        n,
        field,
        dims,
        products,
        steenrod=_trunc_operation_tables(field, k, q),
        labels=labels,
        poincare=True,
        name=name or f"trunc_k{k}_q{q}_{field}",
    )
    return _build_validated(A)


def build_sphere(n: int, field: CoefficientField) -> GradedAlgebra:
    """H^*(S^n): one class in degree 0 and one in degree n."""
    if n < 1:
        raise ValueError("need n >= 1")
    A = build_truncated_poly(n, 1, field, name=f"sphere{n}_{field}")
    A.labels = {0: ["1"], n: ["vol"]}
    return A


def build_cp(m: int, field: CoefficientField) -> GradedAlgebra:
    """Complex projective space: truncated ring on a degree-2 class."""
    if m < 1:
        raise ValueError("need m >= 1")
    return build_truncated_poly(2, m, field, name=f"cp{m}_{field}")


def build_hp(m: int, field: CoefficientField) -> GradedAlgebra:
    """Quaternionic projective space: truncated ring on a degree-4 class."""
    if m < 1:
        raise ValueError("need m >= 1")
    return build_truncated_poly(4, m, field, name=f"hp{m}_{field}")


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------


def product_basis(A: GradedAlgebra, B: GradedAlgebra, d: int):
    """Basis of degree d of the tensor product: (i, a, b), ordered."""
    out = []
    for i in range(max(0, d - B.n), min(d, A.n) + 1):
        for a in range(A.dims[i]):
            for b in range(B.dims[d - i]):
                out.append((i, a, b))
    return out


def build_product(A: GradedAlgebra, B: GradedAlgebra, name=None) -> GradedAlgebra:
    """Tensor product with graded signs (Kunneth tables)."""
    if A.field != B.field:
        raise RingError("factors must share the coefficient field")
    field = A.field
    n = A.n + B.n
    bases = {d: product_basis(A, B, d) for d in range(n + 1)}
    index = {d: {t: i for i, t in enumerate(bases[d])} for d in range(n + 1)}
    dims = [len(bases[d]) for d in range(n + 1)]
    products = {}
    for i in range(n + 1):
        for j in range(n + 1 - i):
            di, dj, dt = dims[i], dims[j], dims[i + j]
            if di == 0 or dj == 0 or dt == 0:
                continue
            t = _table(field, di, dj, dt)
            nonzero = False
            for ai, (ia, aa, ab) in enumerate(bases[i]):
                for bi, (ja, ba, bb) in enumerate(bases[j]):
                    # (x_a ox y_b)(x_c ox y_d) = (-1)^{|y_b||x_c|} x_a x_c ox y_b y_d
                    sign = -1 if ((i - ia) % 2) and (ja % 2) else 1
                    va = A.mult(ia, _unit_vec(A, ia, aa), ja, _unit_vec(A, ja, ba))
                    vb = B.mult(i - ia, _unit_vec(B, i - ia, ab), j - ja, _unit_vec(B, j - ja, bb))
                    for s, cs in _enum(A, va):
                        for u, cu in _enum(B, vb):
                            c = sign * cs * cu
                            if c == 0:
                                continue
                            ti = index[i + j][(ia + ja, s, u)]
                            if field.kind == "Zp":
                                t[ai, bi, ti] = (t[ai, bi, ti] + c) % field.p
                            else:
                                t[ai][bi][ti] += Fraction(c)
                            nonzero = True
            if nonzero or i + j <= n:
                products[(i, j)] = t
    steenrod = None
    if field.kind == "Zp" and A.steenrod is not None and B.steenrod is not None:
        steenrod = _product_operation_tables(A, B, bases, index, dims)
    labels = {}
    for d in range(n + 1):
        labels[d] = [
            f"{_label(A, i, a)}*{_label(B, d - i, b)}" for (i, a, b) in bases[d]
        ]
    P = GradedAlgebra(
        n, field, dims, products, steenrod=steenrod, labels=labels,
        poincare=A.poincare and B.poincare,
        name=name or f"({A.name})x({B.name})",
    )
    return _build_validated(P)


def _product_operation_tables(A, B, bases, index, dims):
    p = A.field.p
    unit_shift = 1 if p == 2 else 2 * (p - 1)
    n = A.n + B.n
    tables = {}
    for d in range(n + 1):
        for k in range(1, (n - d) // unit_shift + 1):
            tgt = d + k * unit_shift
            if dims[d] == 0 or dims[tgt] == 0:
                continue
            M = np.zeros((dims[d], dims[tgt]), dtype=np.int64)
            nonzero = False
            for r, (i, a, b) in enumerate(bases[d]):
                for u in range(k + 1):
                    fa = A.op_apply(u, i, _unit_vec(A, i, a))
                    fb = B.op_apply(k - u, d - i, _unit_vec(B, d - i, b))
                    da = i + u * unit_shift
                    db = (d - i) + (k - u) * unit_shift
                    if da > A.n or db > B.n or fa.size == 0 or fb.size == 0:
                        continue
                    for s, cs in _enum(A, fa):
                        for v, cv in _enum(B, fb):
                            ti = index[tgt][(da, s, v)]
                            M[r, ti] = (M[r, ti] + cs * cv) % p
                            nonzero = True
            if nonzero:
                tables[(k, d)] = M
    return tables


def _unit_vec(A, deg, idx):
    v = A.zero_vec(deg)
    if A.field.kind == "Zp":
        v[idx] = 1
    else:
        v[idx] = Fraction(1)
    return v


def _enum(A, vec):
    for i, c in enumerate(vec):
        if (c % A.field.p if A.field.kind == "Zp" else c) != 0:
            yield i, int(c) if A.field.kind == "Zp" else c


def _label(A, deg, idx):
    try:
        return A.labels[deg][idx]
    except (KeyError, IndexError):
        return f"e{deg}_{idx}"


# ---------------------------------------------------------------------------
# the 6-dimensional connected-sum family
# ---------------------------------------------------------------------------


def build_connected_sum_m6(g: int, field: CoefficientField) -> GradedAlgebra:
    """(S^2 x S^4) # g(S^3 x S^3): Betti (1, 0, 1, 2g, 1, 0, 1), over Q.

    x.z = top, u_i.v_i = top = -v_i.u_i; every other product of positive
    degrees vanishes.
    """
    if g < 1:
        raise ValueError("need g >= 1")
    if field.kind != "Q":
        raise RingError("the 6-manifold family is modelled rationally only")
    n = 6
    dims = [1, 0, 1, 2 * g, 1, 0, 1]
    products = {}

    def tab(i, j):
        key = (i, j)
        if key not in products:
            products[key] = _table(field, dims[i], dims[j], dims[i + j])
        return products[key]

    for d in range(7):
        if dims[d]:
            t = tab(0, d)
            for b in range(dims[d]):
                _set(field, t, 0, b, b, 1)
            if d:
                t = tab(d, 0)
                for b in range(dims[d]):
                    _set(field, t, b, 0, b, 1)
    _set(field, tab(2, 4), 0, 0, 0, 1)
    _set(field, tab(4, 2), 0, 0, 0, 1)
    for i in range(g):
        u, v = i, g + i
        _set(field, tab(3, 3), u, v, 0, 1)
        _set(field, tab(3, 3), v, u, 0, -1)
    labels = {
        0: ["1"],
        2: ["x"],
        3: [f"u{i+1}" for i in range(g)] + [f"v{i+1}" for i in range(g)],
        4: ["z"],
        6: ["top"],
    }
    A = GradedAlgebra(n, field, dims, products, labels=labels, poincare=True,
                      name=f"m6_g{g}_Q")
    return _build_validated(A)


# ---------------------------------------------------------------------------
# basis disguise (random but seeded isomorphism; used by the test corpus)
# ---------------------------------------------------------------------------


def _random_invertible_mod_p(rng, d, p):
    from .kernels import rank_mod_p

    while True:
        M = rng.integers(0, p, size=(d, d))
        if rank_mod_p(M.astype(np.int64), p) == d:
            return M.astype(np.int64)


def _inv_mod_p(M, p):
    d = M.shape[0]
    aug = np.concatenate([M % p, np.eye(d, dtype=np.int64)], axis=1)
    R, piv = rref_mod_p(aug, p)
    if piv != list(range(d)):
        raise RingError("matrix not invertible")
    return R[:, d:]


def change_basis_mod_p(A: GradedAlgebra, mats: dict, name=None) -> GradedAlgebra:
    """Apply degreewise invertible substitutions f_a = sum_b P[a,b] e_b (Z_p).

    Degree 0 keeps the unit basis.  Operation tables are dropped (the
    disguised rings are used for ring-level analyses only).
    """
    if A.field.kind != "Zp":
        raise RingError("basis disguise implemented for Z_p rings")
    p = A.field.p
    P = {d: (mats.get(d) if d != 0 else None) for d in range(A.n + 1)}
    for d in range(A.n + 1):
        if P[d] is None:
            P[d] = np.eye(A.dims[d], dtype=np.int64)
    pinv = {d: _inv_mod_p(P[d], p) for d in range(A.n + 1)}
    products = {}
    for (i, j), t in A.products.items():
        # f_a f_b = sum P_i[a,s] P_j[b,u] T[s,u,t] e_t; convert e_t via P^{-1}
        tn = np.einsum("as,bu,sut->abt", P[i], P[j], t) % p
        tn = np.einsum("abt,tc->abc", tn, pinv[i + j]) % p
        products[(i, j)] = tn
    B = GradedAlgebra(A.n, A.field, A.dims, products, steenrod=None,
                      labels=None, poincare=A.poincare,
                      name=name or (A.name + "_disguised"))
    return B


# ---------------------------------------------------------------------------
# ring-literal JSON
# ---------------------------------------------------------------------------


def _coord_to_json(field, v):
    if field.kind == "Zp":
        return int(v)
    v = Fraction(v)
    return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def ring_to_json(A: GradedAlgebra) -> dict:
    doc = {
        "n": A.n,
        "field": "Q" if A.field.kind == "Q" else {"p": A.field.p},
        "dims": list(A.dims),
        "products": [],
        "poincare": A.poincare,
    }
    if A.name:
        doc["name"] = A.name
    for (i, j) in sorted(A.products):
        t = A.products[(i, j)]
        for a in range(A.dims[i]):
            for b in range(A.dims[j]):
                row = t[a, b] if A.field.kind == "Zp" else t[a][b]
                if (np.any(row) if A.field.kind == "Zp" else any(row)):
                    doc["products"].append(
                        {
                            "i": i,
                            "a": a,
                            "j": j,
                            "b": b,
                            "coords": [_coord_to_json(A.field, v) for v in row],
                        }
                    )
    if A.steenrod is not None:
        ops = []
        opname = "Sq" if A.field.p == 2 else "P"
        for (k, from_deg) in sorted(A.steenrod):
            M = A.steenrod[(k, from_deg)]
            if np.any(M):
                ops.append(
                    {
                        "op": opname,
                        "k": k,
                        "from_deg": from_deg,
                        "matrix": [[int(v) for v in row] for row in M],
                    }
                )
        doc["steenrod"] = ops
    return doc


def ring_from_json(doc: dict, check: bool = True) -> GradedAlgebra:
    try:
        n = int(doc["n"])
        fdoc = doc["field"]
        field = QQ if fdoc == "Q" else Zp(int(fdoc["p"]))
        dims = [int(d) for d in doc["dims"]]
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad ring literal: {e}")
    if len(dims) != n + 1:
        raise SchemaError("dims must have length n+1")
    products = {}
    for entry in doc.get("products", []):
        try:
            i, a, j, b = (int(entry[x]) for x in ("i", "a", "j", "b"))
            coords = entry["coords"]
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad product entry: {e}")
        if not (0 <= i <= n and 0 <= j <= n and i + j <= n):
            raise SchemaError(f"product degrees out of range: {entry}")
        if not (0 <= a < dims[i] and 0 <= b < dims[j]) or len(coords) != dims[i + j]:
            raise SchemaError(f"product indices out of range: {entry}")
        if (i, j) not in products:
            products[(i, j)] = _table(field, dims[i], dims[j], dims[i + j])
        t = products[(i, j)]
        for c, v in enumerate(coords):
            val = int(v) if field.kind == "Zp" else _fraction_json(v)
            if field.kind == "Zp":
                t[a, b, c] = val % field.p
            else:
                t[a][b][c] = val
    steenrod = None
    if doc.get("steenrod"):
        if field.kind != "Zp":
            raise SchemaError("operation tables require a Z_p field")
        steenrod = {}
        unit_shift = 1 if field.p == 2 else 2 * (field.p - 1)
        want = "Sq" if field.p == 2 else "P"
        for entry in doc["steenrod"]:
            try:
                op, k, from_deg = entry["op"], int(entry["k"]), int(entry["from_deg"])
                M = np.array(entry["matrix"], dtype=np.int64) % field.p
            except (KeyError, TypeError, ValueError) as e:
                raise SchemaError(f"bad operation entry: {e}")
            if op != want:
                raise SchemaError(f"operation {op} invalid over {field}")
            tgt = from_deg + k * unit_shift
            if tgt > n or M.shape != (dims[from_deg], dims[tgt]):
                raise SchemaError(f"operation matrix shape mismatch: {entry}")
            steenrod[(k, from_deg)] = M
    A = GradedAlgebra(
        n, field, dims, products, steenrod=steenrod,
        poincare=bool(doc.get("poincare", True)),
        name=doc.get("name", ""),
    )
    if check:
        rep = validate(A)
        if not rep.ok:
            raise SchemaError(f"ring fails validation: {rep.failures[:3]}")
    return A


def _fraction_json(v):
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise SchemaError(f"not an exact rational: {v!r}")


def save_ring(A: GradedAlgebra, path):
    with open(path, "w") as fh:
        json.dump(ring_to_json(A), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_ring(path, check: bool = True) -> GradedAlgebra:
    with open(path) as fh:
        return ring_from_json(json.load(fh), check=check)
