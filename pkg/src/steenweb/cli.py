"""Command-line surface.

    steenweb reduce "Sq2 . Sq2" --prime 2
    steenweb ring minimal-period --file cp6_z2.json
    steenweb ring classify --file s3xhp2_q.json
    steenweb web analyze --file model.json
    steenweb web random --n 16 --r 8 --count 100 --seed 7
    steenweb verify hit-lemma --p 3 --kmax 200

Exit codes: 0 pass, 1 check failed, 2 input error, 3 internal invariant
breach.  JSON output (--format json) is byte-stable for a fixed seed;
tables are for people and carry no stability promise.  The corpus
directory comes from STEENWEB_DATA when set.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import corpus as corpus_mod
from . import verify as verify_mod
from .builders import load_ring
from .periodicity import (
    HypothesisViolation,
    NotFourPeriodic,
    PeriodicityError,
    check_bodd_corollary,
    classify_4periodic,
    minimal_period,
    rational_gcd_periodicity,
)
from .rings import SchemaError, validate
from .steenrod import ParseError, Prime, adem_reduce, format_element, parse_element
from .web import (
    CertificateInvariantBreach,
    InfeasibleParameters,
    WebError,
    IsotropyModel,
    exhaustive_models,
    find_certificate,
    model_from_json,
    random_model,
    verify_certificate,
)

EXIT_PASS, EXIT_CHECK, EXIT_INPUT, EXIT_BREACH = 0, 1, 2, 3


def _emit(doc, args) -> None:
    if getattr(args, "fmt", "json") == "json":
        text = json.dumps(doc, indent=1, sort_keys=True)
    else:
        text = _as_table(doc)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _as_table(doc, indent=0) -> str:
    # best-effort human rendering; not a stable interface
    lines = []
    pad = "  " * indent
    if isinstance(doc, dict):
        for k in doc:
            v = doc[k]
            if isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.append(_as_table(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {v}")
    elif isinstance(doc, list):
        for v in doc:
            if isinstance(v, (dict, list)):
                lines.append(_as_table(v, indent + 1))
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{doc}")
    return "\n".join(lines)


def _resolve_ring(args, check=True):
    path = corpus_mod.data_dir() / args.file
    if not path.exists():
        path = args.file
    return load_ring(path, check=check)


def cmd_reduce(args) -> int:
    prime = Prime(args.prime)
    element = parse_element(args.expr, prime)
    canonical = adem_reduce(element)
    text = format_element(canonical)
    if args.fmt == "json":
        _emit({"input": args.expr, "p": args.prime, "canonical": text}, args)
    else:
        print(text)
    return EXIT_PASS


def cmd_ring(args) -> int:
    if args.ring_cmd == "validate":
        # schema problems exit 2; axiom failures exit 1 with a witness
        ring = _resolve_ring(args, check=False)
        rep = validate(ring)
        _emit(rep.to_json(), args)
        return EXIT_PASS if rep.ok else EXIT_CHECK
    ring = _resolve_ring(args)
    c = args.range
    if args.ring_cmd == "minimal-period":
        spectrum = minimal_period(ring, c)
        doc = {
            "check": "minimal-period",
            "ring": ring.name,
            "c": spectrum["c"],
            "minimal_period": spectrum["minimal_period"],
            "minimal_element": spectrum["minimal_element"],
            "degrees_with_witness": sorted(spectrum["spectrum"]),
        }
        _emit(doc, args)
        return EXIT_PASS if spectrum["minimal_period"] is not None else EXIT_CHECK
    if args.ring_cmd == "classify":
        doc = classify_4periodic(ring)
        _emit(doc, args)
        return EXIT_PASS
    if args.ring_cmd == "bodd-check":
        doc = check_bodd_corollary(ring, c)
        _emit(doc, args)
        return EXIT_PASS if doc["result"] != "fail" else EXIT_CHECK
    if args.ring_cmd == "gcd-check":
        if args.degree is None:
            raise HypothesisViolation("gcd-check needs --degree k")
        doc = rational_gcd_periodicity(ring, args.degree, c)
        _emit(doc, args)
        return EXIT_PASS if doc["result"] == "pass" else EXIT_CHECK
    raise SchemaError(f"unknown ring subcommand {args.ring_cmd}")


def _load_model(args) -> IsotropyModel:
    path = corpus_mod.data_dir() / args.file
    if not path.exists():
        path = args.file
    with open(path) as fh:
        return model_from_json(json.load(fh))


def cmd_web(args) -> int:
    if args.web_cmd == "analyze":
        model = _load_model(args)
        import math

        if model.r < math.ceil(2 * math.log2(model.n)):
            raise InfeasibleParameters(
                f"analyze requires r >= ceil(2 log2 n) = "
                f"{math.ceil(2 * math.log2(model.n))}, got r={model.r}"
            )
        res = find_certificate(model)
        if res["status"] == "certificate":
            ok, detail = verify_certificate(model, res["certificate"])
            res["verification"] = {"ok": ok, "detail": detail}
            if not ok:
                raise CertificateInvariantBreach(detail)
        _emit(res, args)
        return EXIT_PASS if res["status"] == "certificate" else EXIT_CHECK
    if args.web_cmd == "random":
        out = []
        flagged = 0
        for i in range(args.count):
            model = random_model(args.n, args.r, seed=args.seed + i,
                                 weight_bound=args.weight_bound)
            res = find_certificate(model)
            if res["status"] == "certificate":
                ok, rep = verify_certificate(model, res["certificate"])
                if not ok:
                    raise CertificateInvariantBreach(rep)
            else:
                flagged += 1
            out.append({"seed": args.seed + i, "status": res["status"],
                        "case": res.get("certificate", {}).get("case")})
        _emit({"command": "web-random", "n": args.n, "r": args.r,
               "count": args.count, "seed": args.seed,
               "flagged": flagged, "results": out}, args)
        return EXIT_PASS if flagged == 0 else EXIT_CHECK
    if args.web_cmd == "exhaustive":
        out = {"models": 0, "certificates": 0, "flagged": 0}
        for model in exhaustive_models(args.n, args.r, args.weight_bound):
            out["models"] += 1
            if model.n % 4 == 0:
                res = find_certificate(model)
                if res["status"] == "certificate":
                    out["certificates"] += 1
                else:
                    out["flagged"] += 1
        _emit({"command": "web-exhaustive", "n": args.n, "r": args.r,
               "weight_bound": args.weight_bound, **out}, args)
        return EXIT_PASS
    raise SchemaError(f"unknown web subcommand {args.web_cmd}")


def cmd_verify(args) -> int:
    suite = verify_mod.SUITES[args.suite]
    kwargs = {}
    if args.suite == "adem-oracle":
        kwargs["p"] = args.prime or 2
        if args.dmax:
            kwargs["dmax"] = args.dmax
    elif args.suite == "hit-lemma":
        kwargs["p"] = args.prime or 3
        if args.kmax:
            kwargs["kmax"] = args.kmax
    elif args.suite == "sq-decomposition":
        if args.lmax:
            kwargs["lmax"] = args.lmax
    elif args.suite == "power-of-two":
        kwargs["count"] = args.count
        kwargs["seed"] = args.seed
    elif args.suite == "odd-p":
        kwargs["p"] = args.prime or 3
        kwargs["count"] = args.count
        kwargs["seed"] = args.seed
    elif args.suite == "web-exhaustive":
        if args.n:
            kwargs["nmax"] = args.n
        if args.r:
            kwargs["rmax"] = args.r
        kwargs["weight_bound"] = args.weight_bound
    elif args.suite == "web-random":
        kwargs["count"] = args.count
        kwargs["seed"] = args.seed
        kwargs["weight_bound"] = args.weight_bound
    doc = suite(**kwargs)
    _emit(doc, args)
    return EXIT_PASS if doc["result"] == "pass" else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="steenweb", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", dest="fmt", choices=("json", "table"),
                       default="json")
        p.add_argument("--out", default=None, help="write output to a file")

    p = sub.add_parser("reduce", help="canonical admissible form of an element")
    p.add_argument("expr")
    p.add_argument("--prime", "--p", dest="prime", type=int, required=True)
    common(p)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("ring", help="analyses of a ring-literal file")
    p.add_argument("ring_cmd", choices=("validate", "minimal-period", "classify",
                                        "bodd-check", "gcd-check"))
    p.add_argument("--file", required=True)
    p.add_argument("--range", type=int, default=None, help="verification bound c")
    p.add_argument("--degree", type=int, default=None, help="period k for gcd-check")
    common(p)
    p.set_defaults(fn=cmd_ring)

    p = sub.add_parser("web", help="fixed-point-web certificate search")
    p.add_argument("web_cmd", choices=("analyze", "random", "exhaustive"))
    p.add_argument("--file", default=None)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--r", type=int, default=8)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    p.add_argument("--weight-bound", type=int, default=2)
    common(p)
    p.set_defaults(fn=cmd_web)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=sorted(verify_mod.SUITES))
    p.add_argument("--prime", "--p", dest="prime", type=int, default=None)
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--kmax", type=int, default=None)
    p.add_argument("--lmax", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int, default=verify_mod.DEFAULT_SEED)
    p.add_argument("--weight-bound", type=int, default=2)
    common(p)
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (SchemaError, HypothesisViolation, NotFourPeriodic, InfeasibleParameters,
            FileNotFoundError, KeyError, ValueError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except (CertificateInvariantBreach, AssertionError) as e:
        print(f"internal invariant breach: {e}", file=sys.stderr)
        return EXIT_BREACH
    except (PeriodicityError, WebError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
