"""Batch verification suites.

Each suite returns a JSON-ready dict (deterministic for a fixed seed: no
timestamps, sorted keys downstream) with a top-level "result" of "pass"
or "fail", counts, and the first few failures if any.  The CLI `verify`
subcommand and the acceptance tests both run these.
"""

from __future__ import annotations

import numpy as np

from . import corpus
from .action import composite_action_check_mod2, composite_action_check_oddp
from .kernels import solve_mod_p
from .periodicity import (
    check_bodd_corollary,
    check_odd_p_theorem,
    check_power_of_two_theorem,
    find_witness,
    rational_gcd_periodicity,
)
from .rings import Zp, validate
from .steenrod import (
    BaseCaseSignal,
    Prime,
    SteenrodElement,
    adem_reduce,
    admissible_monomials,
    hit_decompose,
    leading_coefficient_check,
    sq_power_of_two_decomposition,
    sq_relation_element,
)
from .web import (
    exhaustive_sign_classes,
    find_certificate,
    random_model,
    verify_certificate,
)

DEFAULT_SEED = 20260811


def suite_adem_oracle(p: int = 2, dmax=None, generators=None) -> dict:
    """Composite-action oracle over the polynomial algebra."""
    if p == 2:
        dmax = 20 if dmax is None else dmax
        generators = 4 if generators is None else generators
        rep = composite_action_check_mod2(g=generators, max_total=dmax)
    else:
        dmax = 40 if dmax is None else dmax
        generators = 3 if generators is None else generators
        rep = composite_action_check_oddp(p, g=generators, max_total=dmax)
    return {
        "suite": "adem-oracle",
        "params": {"p": p, "dmax": dmax, "generators": generators},
        "pairs": rep["pairs"],
        "checks": rep["checks"],
        "failures": rep["mismatches"][:5],
        "result": "pass" if rep["mismatch_count"] == 0 else "fail",
    }


def suite_hit_lemma(p: int = 3, kmax: int = 200) -> dict:
    """Constructive decompositions of P^k verified under full reduction."""
    prime = Prime(p)
    checked = 0
    failures = []
    for k in range(1, kmax + 1):
        kk = k
        while kk % p == 0:
            kk //= p
        lam = kk % p
        for m in range(1, lam + 1):
            hd = hit_decompose(prime, k, m)
            ok = hd.verify()
            try:
                c0 = leading_coefficient_check(prime, k, m)
                ok = ok and c0 % p != 0
            except BaseCaseSignal:
                ok = ok and hd.mu == 0 and hd.m == hd.lam
            checked += 1
            if not ok:
                failures.append({"k": k, "m": m})
    return {
        "suite": "hit-lemma",
        "params": {"p": p, "kmax": kmax},
        "checks": checked,
        "failures": failures[:5],
        "result": "pass" if not failures else "fail",
    }


def _sq_l_in_pair_span(l: int) -> bool:
    """Brute force: is Sq^l a combination of the reduced Sq^i Sq^{l-i}?"""
    two = Prime(2)
    basis = admissible_monomials(two, l)
    index = {m: i for i, m in enumerate(basis)}
    rows = []
    for i in range(1, l):
        e = adem_reduce(SteenrodElement.monomial(two, (i, l - i)))
        row = [0] * len(basis)
        for mon, c in e.terms.items():
            row[index[mon]] = c
        rows.append(row)
    target = [0] * len(basis)
    target[index[(l,)]] = 1
    if not rows:
        return False
    sol = solve_mod_p(np.array(rows, dtype=np.int64).T, np.array(target), 2)
    return sol is not None


def suite_sq_decomposition(lmax: int = 256, brute_max: int = 32) -> dict:
    """Sq^l decompositions verify exactly; powers of two have none."""
    two = Prime(2)
    checked = 0
    failures = []
    for l in range(1, lmax + 1):
        kind, pairs = sq_power_of_two_decomposition(l)
        if kind == "power-of-two":
            if l <= brute_max and l >= 2 and _sq_l_in_pair_span(l):
                failures.append({"l": l, "reason": "unexpected relation"})
            checked += 1
            continue
        rel = sq_relation_element(l, pairs)
        if adem_reduce(rel) != SteenrodElement.monomial(two, (l,)):
            failures.append({"l": l, "reason": "relation does not reduce to Sq^l"})
        if any(not (0 < i < l) for i, _ in pairs):
            failures.append({"l": l, "reason": "index out of range"})
        checked += 1
    return {
        "suite": "sq-decomposition",
        "params": {"lmax": lmax, "brute_max": brute_max},
        "checks": checked,
        "failures": failures[:5],
        "result": "pass" if not failures else "fail",
    }


def _minimal_period_protocol(field_tag, p, count, seed, check_fn):
    counts = {"pass": 0, "fail": 0, "inapplicable": 0}
    failures = []
    ring_names = []
    for name in corpus.corpus_names(field_tag):
        ring = corpus.corpus_ring(name)
        v = check_fn(ring)
        counts[v["result"]] += 1
        if v["result"] == "fail":
            failures.append({"ring": name, "verdict": v})
        ring_names.append(name)
    for i in range(count):
        ring = corpus.random_periodic_ring(Zp(p), seed + i)
        if not validate(ring).ok:
            failures.append({"ring": ring.name, "reason": "validation failed"})
            continue
        v = check_fn(ring)
        counts[v["result"]] += 1
        if v["result"] == "fail":
            failures.append({"ring": ring.name, "seed": seed + i, "verdict": v})
    return counts, failures, ring_names


def suite_power_of_two(count: int = 500, seed: int = DEFAULT_SEED) -> dict:
    counts, failures, rings = _minimal_period_protocol(
        "z2", 2, count, seed, check_power_of_two_theorem
    )
    return {
        "suite": "power-of-two",
        "params": {"count": count, "seed": seed},
        "corpus_rings": len(rings),
        "counts": counts,
        "failures": failures[:5],
        "result": "pass" if not failures else "fail",
    }


def suite_odd_p(p: int = 3, count: int = 500, seed: int = DEFAULT_SEED) -> dict:
    counts, failures, rings = _minimal_period_protocol(
        f"z{p}", p, count, seed, check_odd_p_theorem
    )
    return {
        "suite": "odd-p",
        "params": {"p": p, "count": count, "seed": seed},
        "corpus_rings": len(rings),
        "counts": counts,
        "failures": failures[:5],
        "result": "pass" if not failures else "fail",
    }


def suite_gcd_closure() -> dict:
    """Difference-closure of inducing degrees on every periodic Q-corpus ring."""
    checked = 0
    failures = []
    for name in corpus.corpus_names("q"):
        ring = corpus.corpus_ring(name)
        for k in range(1, ring.n // 3 + 1):
            if find_witness(ring, k, ring.n) is None:
                continue
            v = rational_gcd_periodicity(ring, k)
            checked += 1
            if v["result"] != "pass":
                failures.append({"ring": name, "k": k, "verdict": v})
    return {
        "suite": "gcd-closure",
        "params": {},
        "checks": checked,
        "failures": failures[:5],
        "result": "pass" if not failures else "fail",
    }


def suite_bodd() -> dict:
    counts = {"pass": 0, "fail": 0, "inapplicable": 0}
    failures = []
    for name in corpus.corpus_names("q"):
        ring = corpus.corpus_ring(name)
        v = check_bodd_corollary(ring)
        counts[v["result"]] += 1
        if v["result"] == "fail":
            failures.append({"ring": name, "verdict": v})
    return {
        "suite": "bodd",
        "params": {},
        "counts": counts,
        "failures": failures[:5],
        "result": "pass" if not failures else "fail",
    }


def _pair_invariants(model) -> dict | None:
    """Transversality-additivity equivalence and the mod-4 parity congruence."""
    masks = model.all_masks()
    top = 1 << model.r
    for s in range(1, top):
        for t in range(s + 1, top):
            ms, mt = masks[s], masks[t]
            disjoint = (ms & mt) == 0
            additive = (ms | mt).bit_count() == ms.bit_count() + mt.bit_count()
            if disjoint != additive:
                return {"pair": [model.vec(s), model.vec(t)],
                        "reason": "additivity mismatch"}
            lhs = 2 * masks[s ^ t].bit_count()
            rhs = 2 * ms.bit_count() + 2 * mt.bit_count()
            if (lhs - rhs) % 4:
                return {"pair": [model.vec(s), model.vec(t)],
                        "reason": "parity congruence"}
    return None


def suite_web_exhaustive(nmax: int = 8, rmax: int = 4, weight_bound: int = 1) -> dict:
    """Sweep all valid weight matrices (mod column permutation) and check
    pair invariants plus re-verification of every emitted certificate.

    Models are processed one representative per column-sign class (sign
    flips change no mask, codimension, or subset rank); multiplicities
    keep the full count.
    """
    total_models = 0
    classes = 0
    cases: dict = {}
    flagged = 0
    failures = []
    for n in range(2, nmax + 1, 2):
        for r in range(1, min(rmax, n // 2) + 1):
            for model, mult in exhaustive_sign_classes(n, r, weight_bound):
                classes += 1
                total_models += mult
                bad = _pair_invariants(model)
                if bad:
                    bad.update({"n": n, "r": r, "W": model.to_json()["W"]})
                    failures.append(bad)
                    continue
                if n % 4 == 0:
                    res = find_certificate(model)
                    if res["status"] == "certificate":
                        ok, rep = verify_certificate(model, res["certificate"])
                        if not ok:
                            failures.append(
                                {"n": n, "r": r, "W": model.to_json()["W"],
                                 "reason": f"re-verification failed: {rep}"}
                            )
                        case = str(res["certificate"]["case"])
                        cases[case] = cases.get(case, 0) + mult
                    else:
                        flagged += mult
    return {
        "suite": "web-exhaustive",
        "params": {"nmax": nmax, "rmax": rmax, "weight_bound": weight_bound},
        "models": total_models,
        "sign_classes": classes,
        "cases": cases,
        "flagged": flagged,
        "failures": failures[:5],
        "result": "pass" if not failures else "fail",
    }


def suite_web_random(count: int = 1000, seed: int = DEFAULT_SEED,
                     sizes=((16, 8), (32, 10), (64, 12)),
                     weight_bound: int = 2) -> dict:
    """Seeded random models: verified certificate or an explicit flag."""
    cases: dict = {}
    flagged = 0
    failures = []
    outcomes = 0
    for i in range(count):
        n, r = sizes[i % len(sizes)]
        model = random_model(n, r, seed=seed + i, weight_bound=weight_bound)
        res = find_certificate(model)
        outcomes += 1
        if res["status"] == "certificate":
            ok, rep = verify_certificate(model, res["certificate"])
            if not ok:
                failures.append({"seed": seed + i, "n": n, "r": r,
                                 "reason": f"re-verification failed: {rep}"})
            case = str(res["certificate"]["case"])
            cases[case] = cases.get(case, 0) + 1
        elif res["status"] == "flagged":
            flagged += 1
        else:
            failures.append({"seed": seed + i, "reason": "unknown status"})
    if outcomes != count:
        failures.append({"reason": "dropped instances",
                         "expected": count, "got": outcomes})
    return {
        "suite": "web-random",
        "params": {"count": count, "seed": seed, "sizes": [list(s) for s in sizes],
                   "weight_bound": weight_bound},
        "cases": cases,
        "flagged": flagged,
        "flagged_rate": f"{flagged}/{count}",
        "failures": failures[:5],
        "result": "pass" if not failures else "fail",
    }


SUITES = {
    "adem-oracle": suite_adem_oracle,
    "hit-lemma": suite_hit_lemma,
    "sq-decomposition": suite_sq_decomposition,
    "power-of-two": suite_power_of_two,
    "odd-p": suite_odd_p,
    "gcd-closure": suite_gcd_closure,
    "bodd": suite_bodd,
    "web-exhaustive": suite_web_exhaustive,
    "web-random": suite_web_random,
}
