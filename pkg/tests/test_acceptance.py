"""Acceptance criteria.

One test per criterion; each prints a single PASS/FAIL line (run with
`pytest tests/test_acceptance.py -s` to see them live).  Tolerances and
bounds are pinned here, not configurable.
"""

import subprocess
import sys
import time

from steenweb import verify as V

RESULTS = []


def _report(num, name, ok, detail=""):
    line = f"ACCEPTANCE {num:>2} ({name}): {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    print(line, flush=True)
    RESULTS.append((num, ok))
    assert ok, line


def test_criterion_01_adem_oracle():
    t0 = time.time()
    r2 = V.suite_adem_oracle(p=2, dmax=20, generators=4)
    r3 = V.suite_adem_oracle(p=3, dmax=40, generators=3)
    elapsed = time.time() - t0
    ok = (
        r2["result"] == "pass"
        and r3["result"] == "pass"
        and elapsed <= 300.0
    )
    _report(1, "adem-oracle equivalence", ok,
            f"p2 pairs={r2['pairs']} p3 pairs={r3['pairs']} "
            f"checks={r2['checks'] + r3['checks']} {elapsed:.0f}s")


def test_criterion_02_hit_lemma():
    r3 = V.suite_hit_lemma(p=3, kmax=200)
    r5 = V.suite_hit_lemma(p=5, kmax=200)
    ok = r3["result"] == "pass" and r5["result"] == "pass"
    _report(2, "hit-decomposition lemma", ok,
            f"checks={r3['checks'] + r5['checks']}")


def test_criterion_03_sq_decomposition():
    r = V.suite_sq_decomposition(lmax=256, brute_max=32)
    _report(3, "sq-decomposition", r["result"] == "pass",
            f"checks={r['checks']}")


def test_criterion_04_power_of_two():
    r = V.suite_power_of_two(count=500, seed=V.DEFAULT_SEED)
    ok = r["result"] == "pass" and r["counts"]["fail"] == 0
    _report(4, "power-of-two periodicity", ok,
            f"counts={r['counts']}")


def test_criterion_05_odd_p():
    r3 = V.suite_odd_p(p=3, count=500, seed=V.DEFAULT_SEED)
    r5 = V.suite_odd_p(p=5, count=500, seed=V.DEFAULT_SEED + 10_000)
    ok = r3["result"] == "pass" and r5["result"] == "pass"
    _report(5, "odd-p periodicity", ok,
            f"z3={r3['counts']} z5={r5['counts']}")


def test_criterion_06_gcd_closure():
    r = V.suite_gcd_closure()
    _report(6, "gcd-closure", r["result"] == "pass", f"checks={r['checks']}")


def test_criterion_07_bodd():
    r = V.suite_bodd()
    ok = r["result"] == "pass" and r["counts"]["fail"] == 0
    _report(7, "b_odd corollary", ok, f"counts={r['counts']}")


def test_criterion_08_web_exhaustive():
    t0 = time.time()
    r = V.suite_web_exhaustive(nmax=8, rmax=4, weight_bound=1)
    elapsed = time.time() - t0
    ok = r["result"] == "pass" and elapsed <= 600.0
    _report(8, "web exhaustive soundness", ok,
            f"models={r['models']} cases={r['cases']} "
            f"flagged={r['flagged']} {elapsed:.0f}s")


def test_criterion_09_web_random():
    r = V.suite_web_random(count=1000, seed=V.DEFAULT_SEED)
    ok = r["result"] == "pass"
    _report(9, "web randomized coverage", ok,
            f"cases={r['cases']} flagged_rate={r['flagged_rate']}")


def test_criterion_10_determinism():
    def run(args):
        proc = subprocess.run(
            [sys.executable, "-m", "steenweb.cli", "verify", *args],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    pairs = [
        ("power-of-two", "--count", "25", "--seed", "11"),
        ("web-random", "--count", "12", "--seed", "11"),
        ("hit-lemma", "--p", "3", "--kmax", "60"),
    ]
    ok = True
    for args in pairs:
        if run(args) != run(args):
            ok = False
            break
    _report(10, "byte-identical verify output", ok,
            f"suites={[a[0] for a in pairs]}")


def test_zz_summary():
    done = {n for n, _ in RESULTS}
    print(f"\nacceptance summary: {len(done)}/10 criteria executed, "
          f"{sum(1 for _, ok in RESULTS if ok)} passed", flush=True)
