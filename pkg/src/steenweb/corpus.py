"""The shipped ring corpus and the seeded random-ring generators.

Corpus entries are built by name; `materialize(dir)` writes them out as
ring-literal JSON (the data directory shipped with the package).  The
environment variable STEENWEB_DATA overrides the corpus location.

Random rings are assembled from the model families (truncated rings on
admissible generator degrees, projective families, products with a
low-degree sphere factor), then disguised by a seeded basis change, so
they are always valid and always realizable -- which is exactly what the
minimal-period theorems assume.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .builders import (
    _random_invertible_mod_p,
    build_connected_sum_m6,
    build_cp,
    build_hp,
    build_product,
    build_sphere,
    build_truncated_poly,
    change_basis_mod_p,
    load_ring,
    save_ring,
)
from .rings import QQ, CoefficientField, GradedAlgebra, Zp

_FIELDS = {"z2": Zp(2), "z3": Zp(3), "z5": Zp(5), "q": QQ}

# generator degrees with a standard operation model, per field tag
_TRUNC_DEGREES = {
    "z2": (1, 2, 4, 8),
    "z3": (2, 4, 12),   # 2*lam*3^r with lam | 2
    "z5": (2, 4, 8, 10),  # 2*lam*5^r with lam | 4
    "q": (2, 4, 6),
}


def _registry():
    reg = {}
    for tag, field in _FIELDS.items():
        for n in (3, 4, 6, 8, 11, 12):
            reg[f"s{n}_{tag}"] = (build_sphere, (n, field))
        for m in range(2, 9):
            reg[f"cp{m}_{tag}"] = (build_cp, (m, field))
        for m in range(2, 5):
            reg[f"hp{m}_{tag}"] = (build_hp, (m, field))
        for j, m in ((1, 2), (2, 2), (3, 2), (3, 3)):
            reg[f"s{j}xhp{m}_{tag}"] = (
                lambda j=j, m=m, field=field: build_product(
                    build_sphere(j, field), build_hp(m, field),
                    name=f"s{j}xhp{m}_{field}",
                ),
                (),
            )
        reg[f"s3xs5_{tag}"] = (
            lambda field=field: build_product(
                build_sphere(3, field), build_sphere(5, field),
                name=f"s3xs5_{field}",
            ),
            (),
        )
        reg[f"s2xs4_{tag}"] = (
            lambda field=field: build_product(
                build_sphere(2, field), build_sphere(4, field),
                name=f"s2xs4_{field}",
            ),
            (),
        )
        reg[f"s1xcp3_{tag}"] = (
            lambda field=field: build_product(
                build_sphere(1, field), build_cp(3, field),
                name=f"s1xcp3_{field}",
            ),
            (),
        )
        reg[f"cp2xcp2_{tag}"] = (
            lambda field=field: build_product(
                build_cp(2, field), build_cp(2, field),
                name=f"cp2xcp2_{field}",
            ),
            (),
        )
        for k in _TRUNC_DEGREES[tag]:
            q = {1: 6, 2: 5, 4: 3, 6: 2, 8: 2, 10: 2, 12: 2}[k]
            reg[f"trunc_k{k}q{q}_{tag}"] = (build_truncated_poly, (k, q, field))
    for g in (1, 2, 3):
        reg[f"m6_g{g}_q"] = (build_connected_sum_m6, (g, QQ))
    return reg


_REGISTRY = _registry()


def corpus_names(field_tag=None):
    names = sorted(_REGISTRY)
    if field_tag is None:
        return names
    return [n for n in names if n.endswith("_" + field_tag)]


def build_corpus_ring(name: str) -> GradedAlgebra:
    if name not in _REGISTRY:
        raise KeyError(f"unknown corpus ring {name!r}")
    fn, args = _REGISTRY[name]
    ring = fn(*args)
    ring.name = name
    return ring


def data_dir() -> Path:
    env = os.environ.get("STEENWEB_DATA")
    if env:
        return Path(env)
    return Path(__file__).parent / "data"


def corpus_ring(name: str) -> GradedAlgebra:
    """Load a corpus ring from the data directory, else build it."""
    path = data_dir() / f"{name}.json"
    if path.exists():
        ring = load_ring(path)
        ring.name = name
        return ring
    return build_corpus_ring(name)


def materialize(directory=None, include_web=True):
    """Write every corpus entry (and the web instances) as JSON files."""
    directory = Path(directory) if directory else data_dir()
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in corpus_names():
        ring = build_corpus_ring(name)
        save_ring(ring, directory / f"{name}.json")
        written.append(f"{name}.json")
    if include_web:
        import json

        for fname, model in sorted(web_instances().items()):
            with open(directory / fname, "w") as fh:
                json.dump(model.to_json(), fh, indent=1, sort_keys=True)
                fh.write("\n")
            written.append(fname)
    return written


def web_instances() -> dict:
    """Deterministic weight-matrix instances shipped with the corpus."""
    from .web import IsotropyModel, random_model

    out = {}
    # n=32, r=10: two graph vertices with disjoint negative plane sets
    # (rows 0 and 1 odd on separate plane pairs, everything else even)
    W = np.zeros((10, 16), dtype=np.int64)
    W[0, 0] = W[0, 1] = 1
    W[1, 2] = W[1, 3] = 1
    for j in range(2, 10):
        W[j, j + 2] = 2
    W[0, 12] = W[1, 13] = W[2, 14] = W[3, 15] = 2
    out["web_case3_n32_r10.json"] = IsotropyModel(32, 10, W)
    # an under-symmetric model that exercises the flag path
    out["web_small_n8_r4.json"] = IsotropyModel(
        8, 4, [[1, 0, 0, 1], [0, 1, 0, 1], [0, 0, 1, 1], [1, 1, 1, 2]]
    )
    out["web_random_n16_r8_seed7.json"] = random_model(16, 8, seed=7, weight_bound=2)
    out["web_random_n32_r10_seed3.json"] = random_model(32, 10, seed=3, weight_bound=2)
    return out


# ---------------------------------------------------------------------------
# seeded random rings
# ---------------------------------------------------------------------------


def _family_choices(field: CoefficientField, max_total_dim: int):
    """Parameter grid of periodic families with a valid theorem window.

    Every entry is (builder, minimal-period) with p*l <= c (odd p) or
    2l <= c (p = 2) guaranteed, so the random suite always has a usable
    witness.
    """
    p = field.p if field.kind == "Zp" else None
    out = []
    qmin = 2 if p in (None, 2) else p
    degrees = {
        2: (1, 2, 4, 8),
        3: (2, 4, 12),
        5: (2, 4, 8, 10),
        None: (2, 4, 6),
    }[p]
    for k in degrees:
        for q in range(qmin, 13):
            if q + 1 > max_total_dim:
                continue
            out.append(("trunc", k, q, 0))
            if 2 * (q + 1) > max_total_dim:
                continue
            # an extra sphere factor of degree j < k keeps the period at k
            for j in range(1, k):
                out.append(("trunc", k, q, j))
    return out


def random_periodic_ring(field: CoefficientField, seed: int,
                         max_total_dim: int = 12) -> GradedAlgebra:
    """Seeded, validated, realizable ring with a minimal-period witness
    inside the theorem window; basis-disguised over Z_p."""
    rng = np.random.default_rng(seed)
    choices = _family_choices(field, max_total_dim)
    kind, k, q, j = choices[int(rng.integers(0, len(choices)))]
    ring = build_truncated_poly(k, q, field)
    if j:
        ring = build_product(build_sphere(j, field), ring,
                             name=f"s{j}x{ring.name}")
    if field.kind == "Zp":
        ring = _disguise(ring, rng)
    ring.name = f"random_{field}_{seed}"
    return ring


def random_table_ring(field: CoefficientField, seed: int,
                      max_total_dim: int = 12) -> GradedAlgebra:
    """Seeded random validated algebra (products of small blocks, then a
    basis disguise); used for oracle-equivalence runs, periodicity not
    guaranteed."""
    rng = np.random.default_rng(seed)
    blocks = []
    total = 1
    for _ in range(int(rng.integers(1, 4))):
        kind = int(rng.integers(0, 4))
        if kind == 0:
            n = int(rng.integers(1, 7))
            blk, d = build_sphere(n, field), 2
        elif kind == 1:
            m = int(rng.integers(1, 4))
            blk, d = build_cp(m, field), m + 1
        elif kind == 2:
            m = int(rng.integers(1, 3))
            blk, d = build_hp(m, field), m + 1
        else:
            # odd-degree generators square to zero away from Z_2: keep k even
            if field.kind == "Zp" and field.p == 2:
                k = int(rng.integers(1, 5))
            else:
                k = 2 * int(rng.integers(1, 3))
            q = int(rng.integers(1, 5))
            blk, d = build_truncated_poly(k, q, field), q + 1
        if total * d > max_total_dim:
            break
        blocks.append(blk)
        total *= d
    if not blocks:
        blocks = [build_sphere(int(rng.integers(1, 7)), field)]
    ring = blocks[0]
    for blk in blocks[1:]:
        ring = build_product(ring, blk)
    if field.kind == "Zp":
        ring = _disguise(ring, rng)
    ring.name = f"table_{field}_{seed}"
    return ring


def _disguise(ring: GradedAlgebra, rng) -> GradedAlgebra:
    p = ring.field.p
    mats = {
        d: _random_invertible_mod_p(rng, ring.dims[d], p)
        for d in range(1, ring.n + 1)
        if ring.dims[d]
    }
    return change_basis_mod_p(ring, mats)
