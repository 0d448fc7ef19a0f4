"""Torus isotropy models and the fixed-point-web certificate search.

A model is an integer weight matrix W (rank r, one column per invariant
2-plane, n = 2 * #columns).  An involution is a vector v in Z_2^r; its
sign on plane i is (-1)^{<v, W_i mod 2>}.  Everything downstream --
fixed sets, codimensions, kernel dimensions, transversality, the graph
of involutions, and the five-case search for a transverse pair with
2k1 + 2k2 <= dim(ambient) -- derives from W alone, so certificates are
self-verifying.

Involutions are stored as bitmasks over rows (bit j = coordinate j);
the deterministic "lex" order is on the coordinate tuple (v_1,...,v_r).
Plane sets are bitmasks over columns.
"""

from __future__ import annotations

import numpy as np

from .backend import HAVE_NUMBA, maybe_njit
from .kernels import gf2_nullspace, gf2_rank, rank_int

MAX_RANK_FOR_ENUM = 20  # 2^r involutions are enumerated explicitly


class WebError(Exception):
    pass


class InfeasibleParameters(WebError):
    pass


class EffectivenessLoss(WebError):
    """Reduced model has a plane with zero weight under the smaller torus."""


class GateRankDeficit(WebError):
    """Reduced model violates the rank >= 2*log2(dim) requirement."""


class ModelDegenerate(WebError):
    """Chain construction found all intersection numbers zero."""


class CertificateInvariantBreach(WebError):
    """An emitted certificate failed its own re-verification."""


# ---------------------------------------------------------------------------
# the model
# ---------------------------------------------------------------------------


class IsotropyModel:
    def __init__(self, n: int, r: int, W):
        W = np.asarray(W, dtype=np.int64)
        if n % 2 or n < 2:
            raise InfeasibleParameters(f"n={n} must be even and positive")
        if W.shape != (r, n // 2):
            raise InfeasibleParameters(f"W must be {r} x {n // 2}")
        if r < 1 or r > n // 2:
            raise InfeasibleParameters(f"rank r={r} impossible with {n // 2} planes")
        if any(not np.any(W[:, i]) for i in range(n // 2)):
            raise InfeasibleParameters("zero weight column")
        if rank_int(W) != r:
            raise InfeasibleParameters("weight matrix is rank-deficient")
        self.n = n
        self.r = r
        self.planes = n // 2
        self.W = W
        self.full_mask = (1 << self.planes) - 1
        # row j as a parity bitmask over planes
        self.rowmask = [
            int(sum((int(W[j, i]) & 1) << i for i in range(self.planes)))
            for j in range(r)
        ]
        # column i as a parity bitmask over rows
        self.colvec = [
            int(sum((int(W[j, i]) & 1) << j for j in range(r)))
            for i in range(self.planes)
        ]
        self._masks = None

    # -- involution machinery ------------------------------------------------

    def lex_key(self, g: int) -> int:
        """Integer whose ordering equals lex order on (v_1, ..., v_r)."""
        out = 0
        for j in range(self.r):
            out = (out << 1) | ((g >> j) & 1)
        return out

    def mask(self, g: int) -> int:
        """Planes where the involution g acts by -1."""
        if self._masks is not None:
            return self._masks[g]
        m = 0
        gg = g
        while gg:
            j = (gg & -gg).bit_length() - 1
            m ^= self.rowmask[j]
            gg &= gg - 1
        return m

    def all_masks(self):
        if self._masks is None:
            if self.r > MAX_RANK_FOR_ENUM:
                raise InfeasibleParameters(f"r={self.r} too large to enumerate")
            masks = [0] * (1 << self.r)
            for g in range(1, 1 << self.r):
                low = (g & -g).bit_length() - 1
                masks[g] = masks[g & (g - 1)] ^ self.rowmask[low]
            self._masks = masks
        return self._masks

    def codim(self, g: int) -> int:
        return 2 * self.mask(g).bit_count()

    def subgroup_planes(self, gens) -> int:
        """Bitmask of planes fixed by every element of <gens>."""
        m = 0
        for g in gens:
            m |= self.mask(g)
        return self.full_mask & ~m

    def rank_on_planes(self, planes_mask: int) -> int:
        cols = _mask_indices(planes_mask)
        if not cols:
            return 0
        return rank_int(self.W[:, cols])

    def dim_ker_on_planes(self, planes_mask: int) -> int:
        return self.r - self.rank_on_planes(planes_mask)

    def rank2_on_planes(self, planes_mask: int) -> int:
        rows = [rm & planes_mask for rm in self.rowmask]
        return gf2_rank(np.array(rows, dtype=np.uint64))

    def mod2_nullspace_on_planes(self, planes_mask: int):
        """Involutions acting by +1 on every selected plane (basis list)."""
        rows = [self.colvec[i] for i in _mask_indices(planes_mask)]
        return gf2_nullspace(rows, self.r)

    def vec(self, g: int):
        return [(g >> j) & 1 for j in range(self.r)]

    def from_vec(self, v) -> int:
        return sum((int(b) & 1) << j for j, b in enumerate(v))

    def to_json(self):
        return {"n": self.n, "r": self.r, "W": [[int(x) for x in row] for row in self.W]}

    def __repr__(self):
        return f"IsotropyModel(n={self.n}, r={self.r})"


def model_from_json(doc) -> IsotropyModel:
    return IsotropyModel(int(doc["n"]), int(doc["r"]), doc["W"])


def _mask_indices(mask: int):
    out = []
    while mask:
        i = (mask & -mask).bit_length() - 1
        out.append(i)
        mask &= mask - 1
    return out


def _span_elements(basis):
    """All nonzero elements of the GF(2) span (ascending by generated index)."""
    out = [0]
    for b in basis:
        out = out + [x ^ b for x in out]
    return sorted(set(out) - {0})


def _gf2_in_span(basis_echelon, v):
    for b in basis_echelon:
        h = b.bit_length() - 1
        if (v >> h) & 1:
            v ^= b
    return v == 0


def _gf2_echelon(vectors):
    basis = []
    for v in vectors:
        for b in basis:
            if (v >> (b.bit_length() - 1)) & 1:
                v ^= b
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return basis


# ---------------------------------------------------------------------------
# fixed sets, transversality, the graph
# ---------------------------------------------------------------------------


def fixed_set(model: IsotropyModel, gens) -> dict:
    """Descriptor of F(H): fixed planes, codimension, dimension, kernel."""
    gens = [g for g in gens if g]
    planes = model.subgroup_planes(gens)
    codim = model.n - 2 * planes.bit_count()
    return {
        "generators": [model.vec(g) for g in gens],
        "fixed_planes": _mask_indices(planes),
        "codim": codim,
        "dim": model.n - codim,
        "dim_ker": model.dim_ker_on_planes(planes),
    }


def is_transverse(model: IsotropyModel, s: int, t: int) -> bool:
    """No plane where both act by -1; cross-checked against additivity."""
    if s == 0 or t == 0 or s == t:
        raise WebError("transversality needs two distinct nonidentity involutions")
    ms, mt = model.mask(s), model.mask(t)
    disjoint = (ms & mt) == 0
    additive = (ms | mt).bit_count() * 2 == ms.bit_count() * 2 + mt.bit_count() * 2
    if disjoint != additive:
        raise CertificateInvariantBreach("transversality characterizations disagree")
    return disjoint


class GammaGraph:
    """Involutions with codim = 0 mod 4 and dim_ker <= 1; edges mark
    non-transverse pairs (a shared -1 plane)."""

    def __init__(self, model: IsotropyModel, vertices, masks):
        self.model = model
        self.vertices = vertices  # ints, sorted by lex order
        self.masks = masks  # aligned with vertices
        self.vertex_set = set(vertices)

    def has_edge(self, a: int, b: int) -> bool:
        return (self.model.mask(a) & self.model.mask(b)) != 0

    def rank2(self) -> int:
        if not self.vertices:
            return 0
        return gf2_rank(np.array(self.vertices, dtype=np.uint64))

    def is_complete(self) -> bool:
        for i in range(len(self.vertices)):
            for j in range(i + 1, len(self.vertices)):
                if self.masks[i] & self.masks[j] == 0:
                    return False
        return True

    def closed_under_product(self) -> bool:
        # a set of 2^rank - 1 nonzero vectors inside its own span is the
        # full span minus zero, hence closed
        return (len(self.vertices) + 1) == (1 << self.rank2())

    def to_json(self):
        edges = []
        for i in range(len(self.vertices)):
            for j in range(i + 1, len(self.vertices)):
                if self.masks[i] & self.masks[j]:
                    edges.append([self.model.vec(self.vertices[i]),
                                  self.model.vec(self.vertices[j])])
        return {
            "vertices": [self.model.vec(v) for v in self.vertices],
            "edges": edges,
        }


def build_gamma(model: IsotropyModel) -> GammaGraph:
    # involutions with zero sign mask act trivially on every plane; an
    # effective action has none, so they are modelling artifacts of a
    # degenerate mod-2 reduction and are excluded
    masks_all = model.all_masks()
    kers = _batch_dim_ker(model)
    verts = [
        g
        for g in range(1, 1 << model.r)
        if masks_all[g] and masks_all[g].bit_count() % 2 == 0 and kers[g] <= 1
    ]
    verts.sort(key=model.lex_key)
    return GammaGraph(model, verts, [masks_all[g] for g in verts])


# ---------------------------------------------------------------------------
# batch kernels (numba with python fallback)
# ---------------------------------------------------------------------------


_MODP = np.int64((1 << 31) - 1)


@maybe_njit(cache=True)
def _batch_rank_cols_modp_jit(W, masks, p):  # pragma: no cover - compiled
    m = masks.shape[0]
    r, c = W.shape
    out = np.empty(m, dtype=np.int64)
    sub = np.empty((r, c), dtype=np.int64)
    for t in range(m):
        mask = masks[t]
        nc = 0
        for i in range(c):
            if (mask >> i) & 1:
                for j in range(r):
                    sub[j, nc] = W[j, i] % p
                nc += 1
        # division-free elimination mod p (rows may pick up unit factors)
        rank = 0
        for col in range(nc):
            piv = -1
            for row in range(rank, r):
                if sub[row, col] != 0:
                    piv = row
                    break
            if piv < 0:
                continue
            if piv != rank:
                for k in range(nc):
                    tmp = sub[rank, k]
                    sub[rank, k] = sub[piv, k]
                    sub[piv, k] = tmp
            pv = sub[rank, col]
            for row in range(rank + 1, r):
                f = sub[row, col]
                if f != 0:
                    for k in range(col, nc):
                        sub[row, k] = (pv * sub[row, k] - f * sub[rank, k]) % p
            rank += 1
            if rank == r:
                break
        out[t] = rank
    return out


def _batch_rank_cols(model: IsotropyModel, masks):
    """Exact rank over Q of W restricted to each column mask.

    A single modular elimination (p = 2^31 - 1) certifies full-rank
    masks; the rest get an exact integer confirmation.
    """
    masks_arr = np.array(masks, dtype=np.int64)
    if HAVE_NUMBA and len(masks) > 32:
        ranks = _batch_rank_cols_modp_jit(model.W % _MODP, masks_arr, _MODP)
        ranks = np.asarray(ranks)
        out = np.empty(len(masks), dtype=np.int64)
        for i, m in enumerate(masks):
            full = min(model.r, int(m).bit_count())
            if ranks[i] >= full:
                out[i] = ranks[i]
            else:
                out[i] = model.rank_on_planes(int(m))  # rank drop: confirm exactly
        return out
    return np.array([model.rank_on_planes(int(m)) for m in masks], dtype=np.int64)


_dim_ker_cache: dict = {}


def _batch_dim_ker(model: IsotropyModel):
    """dim_ker of F(g) for every involution g (index = g)."""
    got = getattr(model, "_kers", None)
    if got is not None:
        return got
    masks_all = model.all_masks()
    planes = [model.full_mask & ~masks_all[g] for g in range(1 << model.r)]
    ranks = _batch_rank_cols(model, planes)
    kers = [model.r - int(x) for x in ranks]
    model._kers = kers
    return kers


@maybe_njit(cache=True)
def _case3_best_jit(masks, codims, lexkeys, n):  # pragma: no cover - compiled
    nv = masks.shape[0]
    best = np.int64(2**62)
    bi = -1
    bj = -1
    count = 0
    for i in range(nv):
        for j in range(i + 1, nv):
            if masks[i] & masks[j] == 0:
                count += 1
                prio = ((codims[i] + codims[j]) << 44) | (lexkeys[i] << 22) | lexkeys[j]
                if prio < best:
                    best = prio
                    bi = i
                    bj = j
    return bi, bj, count


def _case3_best(gamma: GammaGraph):
    model = gamma.model
    nv = len(gamma.vertices)
    if nv < 2:
        return None, 0
    if HAVE_NUMBA and nv > 64 and model.r <= 20:
        masks = np.array(gamma.masks, dtype=np.int64)
        codims = np.array([m.bit_count() * 2 for m in gamma.masks], dtype=np.int64)
        lexkeys = np.array([model.lex_key(v) for v in gamma.vertices], dtype=np.int64)
        bi, bj, count = _case3_best_jit(masks, codims, lexkeys, model.n)
        if bi < 0:
            return None, 0
        return (gamma.vertices[int(bi)], gamma.vertices[int(bj)]), int(count)
    best = None
    best_prio = None
    count = 0
    for i in range(nv):
        for j in range(i + 1, nv):
            if gamma.masks[i] & gamma.masks[j] == 0:
                count += 1
                prio = (
                    gamma.masks[i].bit_count() * 2 + gamma.masks[j].bit_count() * 2,
                    model.lex_key(gamma.vertices[i]),
                    model.lex_key(gamma.vertices[j]),
                )
                if best_prio is None or prio < best_prio:
                    best_prio = prio
                    best = (gamma.vertices[i], gamma.vertices[j])
    return best, count


@maybe_njit(cache=True)
def _case2_filter_jit(masks, rowmasks, full, r, cap):  # pragma: no cover
    nv = masks.shape[0]
    out = np.empty((cap, 2), dtype=np.int64)
    wrote = 0
    bvals = np.zeros(64, dtype=np.int64)
    bhigh = np.zeros(64, dtype=np.int64)
    stop = r - 2  # rank >= r-2 means corank <= 2: reject early
    for i in range(nv):
        for j in range(i + 1, nv):
            planes = full & ~(masks[i] | masks[j])
            rank = 0
            for row in range(r):
                v = rowmasks[row] & planes
                for b in range(rank):
                    if (v >> bhigh[b]) & 1:
                        v ^= bvals[b]
                if v != 0:
                    h = 0
                    t = v
                    while t > 1:
                        t >>= 1
                        h += 1
                    bvals[rank] = v
                    bhigh[rank] = h
                    rank += 1
                    if rank >= stop:
                        break
            if rank < stop and wrote < cap:
                out[wrote, 0] = i
                out[wrote, 1] = j
                wrote += 1
    return out[:wrote]


def _case2_candidates(gamma: GammaGraph, cap=65536):
    """Pairs whose joint fixed planes have GF(2) corank >= 3 (necessary
    for rational kernel dimension >= 3), in lex pair order."""
    model = gamma.model
    nv = len(gamma.vertices)
    if nv < 2:
        return []
    if HAVE_NUMBA and nv > 64:
        masks = np.array(gamma.masks, dtype=np.int64)
        rowmasks = np.array(model.rowmask, dtype=np.int64)
        idx = _case2_filter_jit(masks, rowmasks, np.int64(model.full_mask),
                                np.int64(model.r), np.int64(cap))
        return [(gamma.vertices[int(i)], gamma.vertices[int(j)]) for i, j in idx]
    out = []
    for i in range(nv):
        for j in range(i + 1, nv):
            planes = model.full_mask & ~(gamma.masks[i] | gamma.masks[j])
            if model.r - model.rank2_on_planes(planes) >= 3:
                out.append((gamma.vertices[i], gamma.vertices[j]))
    return out


# ---------------------------------------------------------------------------
# induction gate
# ---------------------------------------------------------------------------


def _balanced_div(a: int, b: int) -> int:
    """Quotient with remainder in (-|b|/2, |b|/2] (tames entry growth)."""
    q, rem = divmod(a, b)
    if 2 * rem > abs(b):
        q += 1 if b > 0 else -1
    return q


def _left_kernel_split(W):
    """Unimodular split Z^r = K + L with K the saturated left kernel of W.

    Integer row reduction with a tracked transform; returns (L_rows, reduced)
    where reduced = L_rows @ W has full row rank and L spans a complement
    of K.  Entries stay exact (python ints, balanced remainders).
    """
    r, c = W.shape
    B = [[int(x) for x in row] for row in W]
    T = [[1 if i == j else 0 for j in range(r)] for i in range(r)]
    rank = 0
    for col in range(c):
        while True:
            piv = None
            for row in range(rank, r):
                if B[row][col] != 0 and (
                    piv is None or abs(B[row][col]) < abs(B[piv][col])
                ):
                    piv = row
            if piv is None:
                break
            B[rank], B[piv] = B[piv], B[rank]
            T[rank], T[piv] = T[piv], T[rank]
            done = True
            for row in range(rank + 1, r):
                if B[row][col] == 0:
                    continue
                q = _balanced_div(B[row][col], B[rank][col])
                if q:
                    B[row] = [a - q * b for a, b in zip(B[row], B[rank])]
                    T[row] = [a - q * b for a, b in zip(T[row], T[rank])]
                if B[row][col] != 0:
                    done = False
            if done:
                rank += 1
                break
        if rank == r:
            break
    L = [T[i] for i in range(rank)]
    reduced = [B[i] for i in range(rank)]
    return L, reduced


def _size_reduce_rows(rows):
    """Unimodular row ops shrinking entries (pairwise Gauss reduction)."""
    rows = [list(r) for r in rows]

    def norm2(v):
        return sum(x * x for x in v)

    for _ in range(64):
        improved = False
        order = sorted(range(len(rows)), key=lambda i: norm2(rows[i]))
        for i in order:
            for j in order:
                if i == j:
                    continue
                den = norm2(rows[j])
                if den == 0:
                    continue
                q = _balanced_div(sum(a * b for a, b in zip(rows[i], rows[j])), den)
                if q:
                    cand = [a - q * b for a, b in zip(rows[i], rows[j])]
                    if norm2(cand) < norm2(rows[i]):
                        rows[i] = cand
                        improved = True
        if not improved:
            break
    return rows


def induction_gate(model: IsotropyModel, gens) -> tuple:
    """Decide "large" vs "recurse" for F(H), building the reduced model.

    Large when dim F(H) > n / 2^{d/2} (checked exactly as
    dim^2 * 2^d > n^2), d = kernel dimension on F(H).  Otherwise the
    torus is cut to a complement of the kernel lattice and the columns
    to the fixed planes.
    """
    gens = [g for g in gens if g]
    if not gens:
        raise WebError("induction gate needs a nontrivial subgroup")
    planes = model.subgroup_planes(gens)
    dim = 2 * planes.bit_count()
    if dim % 4:
        raise WebError("gate requires dim F(H) = 0 mod 4")
    if dim == model.n:
        raise WebError("subgroup acts trivially on every plane")
    d = model.dim_ker_on_planes(planes)
    info = {
        "subgroup": [model.vec(g) for g in gens],
        "fixed_planes": _mask_indices(planes),
        "dim": dim,
        "dim_ker": d,
    }
    if dim * dim * (1 << d) > model.n * model.n:
        return ("large", None, info)
    if dim == 0:
        raise GateRankDeficit("fixed set has dimension zero")
    cols = _mask_indices(planes)
    Wsub = model.W[:, cols]
    L, reduced = _left_kernel_split(Wsub)
    if len(L) != model.r - d:
        raise GateRankDeficit("kernel split rank mismatch")
    reduced = _size_reduce_rows(reduced)
    if any(abs(v) >= 2**62 for row in reduced for v in row):
        raise GateRankDeficit("reduced weights overflow the integer kernels")
    Wred = np.array(reduced, dtype=np.int64)
    for i in range(Wred.shape[1]):
        if not np.any(Wred[:, i]):
            raise EffectivenessLoss(f"plane {cols[i]} has zero reduced weight")
    r_new = model.r - d
    if (1 << r_new) < dim * dim:
        raise GateRankDeficit(
            f"reduced rank {r_new} below 2*log2(dim F(H)) = 2*log2({dim})"
        )
    reduced_model = IsotropyModel(dim, r_new, Wred)
    info["torus_complement"] = [list(map(int, row)) for row in L]
    info["reduced"] = reduced_model.to_json()
    return ("recurse", reduced_model, info)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def _pair_certificate(model, case, ambient_gens, inv1, inv2, intersection_gens,
                      actors=None, trace=None):
    """Assemble (and numerically check) a transverse-pair certificate."""
    amb_planes = model.subgroup_planes(ambient_gens)
    amb_dim = 2 * amb_planes.bit_count()
    m1 = model.mask(inv1) & amb_planes
    m2 = model.mask(inv2) & amb_planes
    k1 = 2 * m1.bit_count()
    k2 = 2 * m2.bit_count()
    if m1 & m2:
        return None  # not transverse inside the ambient fixed set
    if k1 == 0 or k2 == 0:
        return None
    if amb_dim % 4:
        return None
    if 2 * k1 + 2 * k2 > amb_dim:
        return None
    inter = amb_planes & ~(m1 | m2)
    expect = model.subgroup_planes(intersection_gens)
    if inter != expect:
        return None
    cert = {
        "case": case,
        "model": model.to_json(),
        "ambient": {
            "generators": [model.vec(g) for g in ambient_gens if g],
            "dim": amb_dim,
        },
        "pair": {
            "inv1": {"vector": model.vec(inv1), "codim_in_ambient": k1},
            "inv2": {"vector": model.vec(inv2), "codim_in_ambient": k2},
        },
        "intersection_generators": [model.vec(g) for g in intersection_gens if g],
        "inequality": {"lhs": 2 * k1 + 2 * k2, "rhs": amb_dim, "holds": True},
        "target": "b_odd(ambient) = 0",
    }
    if actors:
        cert["actors"] = actors
    if trace:
        cert["trace"] = trace
    return cert


def _case1(model: IsotropyModel, gamma: GammaGraph, notes, depth):
    r = model.r
    j = gamma.rank2()
    if j > r - 2:
        return None
    parity = 0
    for row in range(r):
        if model.rowmask[row].bit_count() % 2:
            parity |= 1 << row
    if parity:
        kernel_basis = gf2_nullspace([parity], r)
    else:
        kernel_basis = [1 << row for row in range(r - 1)]
    # every member of the subgroup has codim divisible by 4
    for g in _span_elements(kernel_basis):
        assert model.codim(g) % 4 == 0, "parity-kernel member with codim != 0 mod 4"
    gamma_ech = _gf2_echelon(list(gamma.vertices))
    candidates = [
        g
        for g in _span_elements(kernel_basis)
        if model.mask(g) and not _gf2_in_span(gamma_ech, g)
    ]
    candidates.sort(key=lambda g: (model.codim(g), model.lex_key(g)))
    for cand in candidates:
        planes = model.full_mask & ~model.mask(cand)
        null2 = model.mod2_nullspace_on_planes(planes)
        iotas = [
            g
            for g in _span_elements(null2)
            if model.mask(g) and model.mask(g) != model.mask(cand)
        ]
        iotas.sort(key=model.lex_key)
        for iota in iotas:
            cert = _pair_certificate(
                model, 1, [], iota, iota ^ cand, [iota, cand],
                actors={"independent_rank": j, "candidate": model.vec(cand),
                        "kernel_involution": model.vec(iota)},
            )
            if cert:
                return cert
        gate = _try_gate(model, [cand], notes, depth)
        if gate:
            return gate
    return None


def _case2_pair(model, sigma, tau, notes, depth):
    """Construction for one pair with a large joint kernel."""
    planes_tau = model.full_mask & ~model.mask(tau)
    planes_h = planes_tau & ~model.mask(sigma)
    null2 = model.mod2_nullspace_on_planes(planes_h)
    mask_tau = model.mask(tau)
    union = mask_tau | model.mask(sigma)
    iotas = [
        g
        for g in _span_elements(null2)
        if (model.mask(g) | mask_tau) == model.mask(g)  # mask contains mask(tau)
        and model.mask(g) != mask_tau
        and model.mask(g) != union
    ]
    iotas.sort(key=model.lex_key)
    for iota in iotas:
        cert = _pair_certificate(
            model, 2, [tau], iota, iota ^ sigma, [sigma, tau],
            actors={"sigma": model.vec(sigma), "tau": model.vec(tau),
                    "kernel_involution": model.vec(iota)},
        )
        if cert:
            return cert
    gate = _try_gate(model, [tau], notes, depth)
    if gate:
        return gate
    return _try_gate(model, [sigma], notes, depth)


def _case2(model, gamma, notes, depth):
    for sigma, tau in _case2_candidates(gamma):
        planes_h = model.subgroup_planes([sigma, tau])
        if model.dim_ker_on_planes(planes_h) < 3:
            continue
        for a, b in ((sigma, tau), (tau, sigma)):
            cert = _case2_pair(model, a, b, notes, depth)
            if cert:
                return cert
    return None


def _case3(model, gamma, notes, depth, scan):
    pair, count = scan
    if pair is None:
        return None
    sigma, tau = pair
    if not is_transverse(model, sigma, tau):
        raise CertificateInvariantBreach("case-3 pair not transverse")
    cert = _pair_certificate(
        model, 3, [], sigma, tau, [sigma, tau],
        actors={"disjoint_pairs_in_graph": count},
    )
    if cert:
        return cert
    return _try_gate(model, [sigma, tau], notes, depth)


def _case4(model, gamma, notes, depth):
    if gamma.closed_under_product():
        return None  # no product can leave the graph
    masks_all = model.all_masks()
    kers = _batch_dim_ker(model)
    best = None
    for i in range(len(gamma.vertices)):
        for j in range(i + 1, len(gamma.vertices)):
            s, t = gamma.vertices[i], gamma.vertices[j]
            e = s ^ t
            if e == 0 or e in gamma.vertex_set:
                continue
            assert masks_all[e].bit_count() % 2 == 0, "parity congruence violated"
            prio = (masks_all[e].bit_count() * 2, model.lex_key(s), model.lex_key(t))
            if best is None or prio < best[0]:
                best = (prio, s, t, e)
    if best is None:
        return None
    _, s, t, e = best
    if kers[e] != 2:
        notes.append(
            {"note": "product involution kernel dimension != 2; routed to case-2 retry",
             "pair": [model.vec(s), model.vec(t)], "dim_ker": kers[e]}
        )
        cert = _case2_pair(model, s, t, notes, depth)
        if cert:
            return cert
    mask_e = masks_all[e]
    null2 = model.mod2_nullspace_on_planes(model.full_mask & ~mask_e)
    rhos = [
        g for g in _span_elements(null2)
        if model.mask(g) and model.mask(g) != mask_e
        and (model.mask(g) | mask_e) == mask_e
    ]
    rhos.sort(key=model.lex_key)
    for rho in rhos:
        cert = _pair_certificate(
            model, 4, [], rho, rho ^ e, [rho, e],
            actors={"sigma": model.vec(s), "tau": model.vec(t),
                    "product": model.vec(e), "kernel_involution": model.vec(rho)},
        )
        if cert:
            return cert
    return _try_gate(model, [e], notes, depth)


def case5_chain(model: IsotropyModel, gamma: GammaGraph):
    """Chain construction on a complete multiplicatively closed graph.

    Selects rho_1, ..., rho_l (l = floor((m+1)/2)) with maximal restricted
    codimensions inside a descending tower of index-2 subgroups chosen so
    restricted codimensions stay divisible by 4, then sweeps rho_j to
    bound the pairwise intersection numbers and extracts the transverse
    pair.  Raises ModelDegenerate when every intersection number is zero.
    """
    group = sorted(set(gamma.vertices) | {0})
    basis = _gf2_echelon(list(gamma.vertices))
    m = len(basis)
    l = (m + 1) // 2
    members = _span_elements(basis)
    rhos = []
    ks = []
    planes_tower = [model.full_mask]  # P_0 = all planes
    current = members
    for i in range(1, l + 1):
        Pprev = planes_tower[-1]
        if i > 1:
            # index-<=2 subgroup where restricted codim is 0 mod 4
            kernel = [g for g in current
                      if (model.mask(g) & Pprev).bit_count() % 2 == 0]
            if len(kernel) < len(current):
                current = kernel
            else:
                current = kernel
        span_prev = _gf2_echelon(rhos)
        pool = [g for g in current if g and not _gf2_in_span(span_prev, g)]
        if not pool:
            raise ModelDegenerate(f"chain ran out of involutions at step {i}")
        pool.sort(key=lambda g: (-(model.mask(g) & Pprev).bit_count(),
                                 model.lex_key(g)))
        rho = pool[0]
        k = 2 * (model.mask(rho) & Pprev).bit_count()
        rhos.append(rho)
        ks.append(k)
        planes_tower.append(Pprev & ~model.mask(rho))

    dims = [2 * p.bit_count() for p in planes_tower]
    claims = {
        "dims_mod4": [d % 4 == 0 for d in dims],
        "halving": [ks[h] >= 2 * ks[h + 1] for h in range(len(ks) - 1)],
        "terminal_zero": ks[-1] == 0,
    }
    trace = {
        "m": m,
        "l": l,
        "rhos_initial": [model.vec(g) for g in rhos],
        "codims": ks,
        "tower_dims": dims,
        "claims": claims,
    }
    if not all(claims["dims_mod4"]) or not all(claims["halving"]) or not claims["terminal_zero"]:
        return None, trace

    j = next(idx for idx, k in enumerate(ks) if k == 0) + 1  # 1-based
    rho_j = rhos[j - 1]
    # intersection numbers l_i inside P_{i-1} minus P_i
    def ell(idx, rj):
        Q = planes_tower[idx - 1] & model.mask(rhos[idx - 1])
        return 2 * (model.mask(rj) & Q).bit_count()

    sweep = []
    settled = {}  # idx -> value fixed by the sweep so far
    for idx in range(j - 1, 0, -1):
        li = ell(idx, rho_j)
        if li > ks[idx - 1] - li:
            before = li
            rho_j ^= rhos[idx - 1]
            li = ell(idx, rho_j)
            sweep.append({"step": idx, "l_before": before, "l_after": li})
            assert li == ks[idx - 1] - before
        settled[idx] = li
        # multiplying by rho_{idx-1} must not disturb already-settled values
        for prev_idx, val in settled.items():
            assert ell(prev_idx, rho_j) == val, "sweep disturbed a settled value"
    ls = [ell(idx, rho_j) for idx in range(1, j)]
    assert all(ls[idx] <= ks[idx] // 2 for idx in range(j - 1))
    trace["rho_j_after_sweep"] = model.vec(rho_j)
    trace["sweep"] = sweep
    trace["intersection_numbers"] = ls
    if not any(ls):
        raise ModelDegenerate("all intersection numbers vanish for the chain")
    i = max(idx + 1 for idx, v in enumerate(ls) if v > 0)  # 1-based
    trace["emit_index"] = i
    return (rhos, ks, rho_j, i, planes_tower), trace


def _case5(model, gamma, notes, depth, complete):
    if not gamma.vertices:
        return None
    if not gamma.closed_under_product() or not complete:
        return None
    m = gamma.rank2()
    if m < model.r - 1:
        return None
    try:
        chain, trace = case5_chain(model, gamma)
    except ModelDegenerate as e:
        notes.append({"note": "model-degenerate", "detail": str(e)})
        return None
    if chain is None:
        notes.append({"note": "chain claims failed", "trace": trace})
        return None
    rhos, ks, rho_j, i, planes_tower = chain
    ambient_gens = rhos[: i - 1]
    cert = _pair_certificate(
        model, 5, ambient_gens, rho_j, rho_j ^ rhos[i - 1],
        ambient_gens + [rhos[i - 1], rho_j],
        actors={"rho_i": model.vec(rhos[i - 1]), "rho_j": model.vec(rho_j)},
        trace=trace,
    )
    if cert:
        return cert
    return _try_gate(model, [rhos[0]], notes, depth)


def _try_gate(model, gens, notes, depth):
    try:
        verdict, reduced, info = induction_gate(model, gens)
    except (WebError,) as e:
        notes.append({"gate_error": type(e).__name__, "detail": str(e),
                      "subgroup": [model.vec(g) for g in gens if g]})
        return None
    if verdict == "large":
        return None  # inequality failed although the fixed set is large: no help
    assert reduced.n < model.n
    inner = find_certificate(reduced, _depth=depth + 1)
    if inner["status"] != "certificate":
        notes.append({"note": "recursion flagged", "inner": inner})
        return None
    return {
        "case": "recurse",
        "model": model.to_json(),
        "gate": info,
        "inner": inner["certificate"],
    }


def find_certificate(model: IsotropyModel, _depth=0) -> dict:
    """Run the five-case search; certificate, or an explicit flag.

    Deterministic; every returned certificate has been re-verified.  The
    rank hypothesis r >= ceil(2 log2 n) is not enforced here (small or
    under-symmetric models simply end up flagged more often).
    """
    if model.n % 4:
        raise InfeasibleParameters("certificate search needs n = 0 mod 4")
    if _depth > 40:
        raise WebError("recursion depth exceeded")
    notes: list = []
    gamma = build_gamma(model)
    scan = _case3_best(gamma)
    complete = scan[0] is None
    cert = _case1(model, gamma, notes, _depth)
    if cert is None:
        cert = _case2(model, gamma, notes, _depth)
    if cert is None:
        cert = _case3(model, gamma, notes, _depth, scan)
    if cert is None:
        cert = _case4(model, gamma, notes, _depth)
    if cert is None:
        cert = _case5(model, gamma, notes, _depth, complete)
    if cert is None:
        return {
            "status": "flagged",
            "reason": "search-exhausted",
            "model": model.to_json(),
            "gamma_size": len(gamma.vertices),
            "notes": notes,
        }
    ok, report = verify_certificate(model, cert)
    if not ok:
        raise CertificateInvariantBreach(f"emitted certificate failed: {report}")
    out = {"status": "certificate", "certificate": cert}
    if notes:
        out["notes"] = notes
    return out


# ---------------------------------------------------------------------------
# independent re-verification
# ---------------------------------------------------------------------------


def _raw_mask(W, vec):
    """Sign mask recomputed directly from the matrix and the vector."""
    r, c = W.shape
    m = 0
    for i in range(c):
        s = 0
        for j in range(r):
            if vec[j] and (int(W[j, i]) & 1):
                s ^= 1
        if s:
            m |= 1 << i
    return m


def verify_certificate(model: IsotropyModel, cert: dict) -> tuple:
    """Re-check a certificate from the raw weight matrix only."""
    W = np.asarray(cert["model"]["W"], dtype=np.int64)
    if not np.array_equal(W, model.W):
        return False, "certificate refers to a different model"
    n = int(cert["model"]["n"])
    full = (1 << W.shape[1]) - 1
    if cert["case"] == "recurse":
        return _verify_recursive(model, cert)
    amb_masks = [_raw_mask(W, v) for v in cert["ambient"]["generators"]]
    amb_planes = full
    for m in amb_masks:
        amb_planes &= ~m
    amb_dim = 2 * amb_planes.bit_count()
    if amb_dim != cert["ambient"]["dim"]:
        return False, "ambient dimension mismatch"
    if amb_dim % 4:
        return False, "ambient dimension not divisible by 4"
    v1 = cert["pair"]["inv1"]["vector"]
    v2 = cert["pair"]["inv2"]["vector"]
    m1 = _raw_mask(W, v1) & amb_planes
    m2 = _raw_mask(W, v2) & amb_planes
    if m1 & m2:
        return False, "pair not transverse in ambient"
    k1, k2 = 2 * m1.bit_count(), 2 * m2.bit_count()
    if k1 != cert["pair"]["inv1"]["codim_in_ambient"]:
        return False, "codim k1 mismatch"
    if k2 != cert["pair"]["inv2"]["codim_in_ambient"]:
        return False, "codim k2 mismatch"
    if k1 == 0 or k2 == 0:
        return False, "degenerate pair member"
    ineq = cert["inequality"]
    if ineq["lhs"] != 2 * k1 + 2 * k2 or ineq["rhs"] != amb_dim:
        return False, "inequality operands mismatch"
    if 2 * k1 + 2 * k2 > amb_dim:
        return False, "inequality violated"
    inter = amb_planes & ~(m1 | m2)
    expect = full
    for v in cert["intersection_generators"]:
        expect &= ~_raw_mask(W, v)
    if inter != (expect & amb_planes):
        return False, "intersection is not the stated fixed set"
    if cert["case"] == 5:
        okc, msg = _verify_case5_trace(model, cert)
        if not okc:
            return False, msg
    return True, "ok"


def _verify_case5_trace(model, cert):
    tr = cert.get("trace")
    if not tr:
        return False, "case-5 certificate without trace"
    W = model.W
    rhos = [ _raw_mask(W, v) for v in tr["rhos_initial"] ]
    planes = (1 << W.shape[1]) - 1
    dims, ks = [2 * planes.bit_count()], []
    for mask in rhos:
        ks.append(2 * (mask & planes).bit_count())
        planes &= ~mask
        dims.append(2 * planes.bit_count())
    if ks != tr["codims"]:
        return False, "chain codims mismatch"
    if any(d % 4 for d in dims):
        return False, "chain dimension not 0 mod 4"
    if any(ks[h] < 2 * ks[h + 1] for h in range(len(ks) - 1)):
        return False, "halving claim violated"
    if ks[-1] != 0:
        return False, "chain did not terminate at codim 0"
    return True, "ok"


def _verify_recursive(model, cert):
    gens = [model.from_vec(v) for v in cert["gate"]["subgroup"]]
    try:
        verdict, reduced, info = induction_gate(model, gens)
    except WebError as e:
        return False, f"gate replay failed: {e}"
    if verdict != "recurse":
        return False, "gate replay did not recurse"
    if info["reduced"] != cert["gate"]["reduced"]:
        return False, "reduced model mismatch on replay"
    inner = cert["inner"]
    return verify_certificate(reduced, inner)


# ---------------------------------------------------------------------------
# model generation
# ---------------------------------------------------------------------------


def random_model(n: int, r: int, seed: int, weight_bound: int = 2) -> IsotropyModel:
    """Seeded random valid model; deterministic for fixed arguments."""
    if n % 2 or r < 1 or r > n // 2:
        raise InfeasibleParameters(f"no rank-{r} model on {n // 2} planes")
    if weight_bound < 1:
        raise InfeasibleParameters("weight bound must be >= 1")
    rng = np.random.default_rng(seed)
    c = n // 2
    for _ in range(10000):
        W = rng.integers(-weight_bound, weight_bound + 1, size=(r, c))
        W = W.astype(np.int64)
        if any(not np.any(W[:, i]) for i in range(c)):
            continue
        if rank_int(W) != r:
            continue
        return IsotropyModel(n, r, W)
    raise InfeasibleParameters("could not sample a valid model")


def exhaustive_models(n: int, r: int, weight_bound: int = 1):
    """All valid models modulo column permutation (ascending column order)."""
    from itertools import combinations_with_replacement, product as iproduct

    if n % 2 or r < 1 or r > n // 2:
        raise InfeasibleParameters(f"no rank-{r} model on {n // 2} planes")
    c = n // 2
    cols = [
        v
        for v in iproduct(range(-weight_bound, weight_bound + 1), repeat=r)
        if any(v)
    ]
    cols.sort()
    for combo in combinations_with_replacement(range(len(cols)), c):
        W = np.array([cols[i] for i in combo], dtype=np.int64).T
        if rank_int(W) != r:
            continue
        yield IsotropyModel(n, r, W)


def _sign_canonical(col):
    """Column up to global sign: flip so the first nonzero entry is positive."""
    lead = next(v for v in col if v)
    return col if lead > 0 else tuple(-v for v in col)


def exhaustive_sign_classes(n: int, r: int, weight_bound: int = 1):
    """Exhaustive sweep grouped by columnwise sign flips.

    Negating a column changes no sign mask, no codimension, and no rank
    of a column subset, so every check outcome is shared across a class;
    yields (canonical model, class size) covering exactly the models of
    exhaustive_models.
    """
    from itertools import combinations_with_replacement, product as iproduct

    if n % 2 or r < 1 or r > n // 2:
        raise InfeasibleParameters(f"no rank-{r} model on {n // 2} planes")
    c = n // 2
    cols = sorted(
        v for v in iproduct(range(-weight_bound, weight_bound + 1), repeat=r) if any(v)
    )
    classes: dict = {}
    for combo in combinations_with_replacement(range(len(cols)), c):
        key = tuple(sorted(_sign_canonical(cols[i]) for i in combo))
        classes[key] = classes.get(key, 0) + 1
    for key in sorted(classes):
        W = np.array(key, dtype=np.int64).T
        if rank_int(W) != r:
            continue
        yield IsotropyModel(n, r, W), classes[key]
