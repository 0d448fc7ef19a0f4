"""Compare the numba and pure-numpy kernel backends on identical workloads.

Run twice, once per backend (the backend is fixed at import time):

    STEENWEB_BACKEND=numba  python benchmarks/bench_kernels.py
    STEENWEB_BACKEND=numpy  python benchmarks/bench_kernels.py

or let the script spawn both and print a comparison table:

    python benchmarks/bench_kernels.py --compare
"""

import argparse
import json
import os
import subprocess
import sys
import time


def bench_once():
    import numpy as np

    from steenweb.action import composite_action_check_mod2
    from steenweb.backend import BACKEND
    from steenweb.kernels import gf2_rank, rank_int, rank_mod_p
    from steenweb.web import find_certificate, random_model

    results = {"backend": BACKEND}
    rng = np.random.default_rng(0)

    # mod-p ranks on small dense matrices (the periodicity hot loop)
    mats = [rng.integers(-3, 4, size=(10, 12)) for _ in range(2000)]
    rank_mod_p(mats[0], 5)  # warm the jit
    t0 = time.perf_counter()
    acc = 0
    for m in mats:
        acc += rank_mod_p(m, 5)
    results["rank_mod_p_2000x10x12"] = time.perf_counter() - t0

    # exact integer ranks (the web kernel-dimension loop)
    rank_int(mats[0])
    t0 = time.perf_counter()
    for m in mats:
        acc += rank_int(m)
    results["rank_int_2000x10x12"] = time.perf_counter() - t0

    # packed GF(2) ranks
    rows = [rng.integers(0, 2**48, size=12).astype(np.uint64) for _ in range(5000)]
    gf2_rank(rows[0])
    t0 = time.perf_counter()
    for r in rows:
        acc += gf2_rank(r)
    results["gf2_rank_5000x12"] = time.perf_counter() - t0

    # the operation-action oracle at a mid scale
    t0 = time.perf_counter()
    rep = composite_action_check_mod2(g=3, max_total=12)
    assert rep["mismatch_count"] == 0
    results["action_oracle_g3_d12"] = time.perf_counter() - t0

    # one full certificate search
    model = random_model(32, 10, seed=1, weight_bound=2)
    t0 = time.perf_counter()
    res = find_certificate(model)
    assert res["status"] == "certificate"
    results["certificate_n32_r10"] = time.perf_counter() - t0

    results["checksum"] = acc
    return results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--compare", action="store_true",
                    help="run both backends in subprocesses")
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    if not args.compare:
        out = bench_once()
        if args.json:
            print(json.dumps(out, indent=1, sort_keys=True))
        else:
            print(f"backend: {out['backend']}")
            for k, v in out.items():
                if isinstance(v, float):
                    print(f"  {k:<28} {v * 1000:9.1f} ms")
        return

    reports = {}
    for backend in ("numpy", "numba"):
        env = dict(os.environ, STEENWEB_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, __file__, "--json"],
            capture_output=True, text=True, env=env,
        )
        if proc.returncode != 0:
            print(f"{backend}: failed\n{proc.stderr}", file=sys.stderr)
            continue
        reports[backend] = json.loads(proc.stdout)

    if len(reports) == 2:
        assert reports["numpy"]["checksum"] == reports["numba"]["checksum"], \
            "backends disagree on exact results"
        print(f"{'workload':<28} {'numpy':>10} {'numba':>10} {'speedup':>8}")
        for k in reports["numba"]:
            if not isinstance(reports["numba"][k], float):
                continue
            a, b = reports["numpy"][k], reports["numba"][k]
            print(f"{k:<28} {a * 1000:8.1f}ms {b * 1000:8.1f}ms {a / b:7.1f}x")
    else:
        for backend, rep in reports.items():
            print(backend, json.dumps(rep, indent=1))


if __name__ == "__main__":
    main()
