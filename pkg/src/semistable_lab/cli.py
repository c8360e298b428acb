"""Command line surface: every verification exposed as a subcommand.

All subcommands print one JSON report of the same shape:

    {"schema": 1, "command": ..., "inputs": {...}, "results": {...},
     "checks": [{"name", "expected", "actual", "pass", "provenance"}]}

and exit nonzero exactly when some check fails.  Output is deterministic
byte for byte for fixed inputs; --meta appends a "meta" object with a
timestamp after the stable region, so consumers hashing reports must
strip that key first.  Integers beyond 2^53 - 1 are serialized as
strings to keep weakly typed consumers exact.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from fractions import Fraction

from . import cyclotomic, families, galois, quadratic, ramification
from .arith import factorize
from .curves import (
    WeierstrassCurve,
    hyperelliptic_odd_disc,
    invariants,
    is_ordinary,
    isogeny_class,
    local_data,
    reduce_model,
)

_INT_EXACT_LIMIT = 2**53 - 1

_MIYAWAKI_PRIMES = {3: [19, 37], 5: [11], 7: []}
_GENUS2_REFERENCE = ((0, -1, 2, -2, 0, 1), (1,))
_CLASS_NUMBER_TABLE = {-3: (1, "trivial"), -4: (1, "trivial"),
                       -164: (8, "paper"), -292: (4, "derived")}
_CONTROLLED_TABLE = {41: (8, 32, "paper"), 3: (1, 4, "trivial"),
                     17: (4, 16, "derived")}


def worker_count() -> int:
    """Worker cap from SEMISTABLE_LAB_THREADS; defaults to 1."""
    raw = os.environ.get("SEMISTABLE_LAB_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise SystemExit(
            f"SEMISTABLE_LAB_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise SystemExit("SEMISTABLE_LAB_THREADS must be at least 1")
    return min(cap, os.cpu_count() or 1)


def _jsonable(value):
    """Recursive conversion to JSON-safe values with exact integers."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return str(value) if abs(value) > _INT_EXACT_LIMIT else value
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, WeierstrassCurve):
        return [value.a1, value.a2, value.a3, value.a4, value.a6]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _check(name: str, expected, actual, provenance: str) -> dict:
    assert provenance in ("paper", "trivial", "derived")
    return {
        "name": name,
        "expected": _jsonable(expected),
        "actual": _jsonable(actual),
        "pass": expected == actual,
        "provenance": provenance,
    }


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _parse_curve(text: str) -> WeierstrassCurve:
    coeffs = _int_list(text)
    if len(coeffs) != 5:
        raise argparse.ArgumentTypeError(
            "curve must be five comma-separated integers a1,a2,a3,a4,a6")
    return WeierstrassCurve(*coeffs)


def _coeff_key(e: WeierstrassCurve) -> tuple[int, int, int, int, int]:
    return (e.a1, e.a2, e.a3, e.a4, e.a6)


# ---------------------------------------------------------------- subcommands


def _cmd_ns_enumerate(args) -> tuple[dict, dict, list[dict]]:
    pairs = families.ns_enumerate(args.bound)
    residues_ok = all(pr.p % 8 == 1 for pr in pairs)
    disc_ok = all(
        invariants(pr.disc_p).disc == pr.p
        and invariants(pr.disc_p_squared).disc == -pr.p**2
        for pr in pairs)
    ordinary_ok = all(
        is_ordinary(pr.disc_p, 2) and is_ordinary(pr.disc_p_squared, 2)
        for pr in pairs)
    results = {
        "count": len(pairs),
        "primes": [pr.p for pr in pairs],
        "pairs": [
            {"p": pr.p, "u": pr.u, "curve_disc_p": pr.disc_p,
             "curve_disc_p_squared": pr.disc_p_squared}
            for pr in pairs
        ],
    }
    if args.bound >= families.EXCEPTIONAL_PRIME:
        results["exceptional"] = {
            "p": families.EXCEPTIONAL_PRIME,
            "curve": families.EXCEPTIONAL_SEED,
        }
    checks = [
        _check("every-prime-is-1-mod-8", True, residues_ok, "paper"),
        _check("discriminants-are-p-and-minus-p-squared", True, disc_ok, "paper"),
        _check("ordinary-at-two", True, ordinary_ok, "paper"),
    ]
    return {"bound": args.bound}, results, checks


def _cmd_miyawaki_search(args) -> tuple[dict, dict, list[dict]]:
    hits = families.miyawaki_search(args.ell, args.bound)
    defining_ok = True
    for p, curves in hits.items():
        for e in curves:
            disc = invariants(e).disc
            v = families.ord_at(disc, p)
            defining_ok &= abs(disc) == p**v
            defining_ok &= local_data(e, p).kind == "multiplicative"
            defining_ok &= families.ord_at(
                invariants(e).j.denominator, p) > 0
    results = {
        "primes": sorted(hits),
        "hits": {p: curves for p, curves in sorted(hits.items())},
    }
    checks = [_check("hits-have-prime-power-conductor-and-torsion",
                     True, defining_ok, "derived")]
    if args.bound == 8:
        checks.append(_check("prime-set-in-documented-box",
                             _MIYAWAKI_PRIMES[args.ell], sorted(hits),
                             "paper"))
    return {"ell": args.ell, "bound": args.bound}, results, checks


def _cmd_dagger(args) -> tuple[dict, dict, list[dict]]:
    rep = families.dagger_report(args.ell, args.p)
    expected_val = 4 if (args.ell, args.p) == (2, 17) else args.ell
    closure_set = set()
    for e in rep.members:
        closure_set.update(_coeff_key(q) for q in isogeny_class(e))
    closure = sorted(closure_set)
    members = sorted(_coeff_key(e) for e in rep.members)
    results = {
        "seed": rep.seed,
        "members": list(rep.members),
        "valuations": list(rep.valuations),
        "dagger": rep.dagger,
        "dagger_valuation": rep.dagger_valuation,
        "congruence_ok": rep.congruence_ok,
        "unramified_signal": rep.unramified_signal,
    }
    checks = [
        _check("distinguished-valuation", expected_val,
               rep.dagger_valuation, "paper"),
        _check("class-closed-under-quotients", members, closure, "derived"),
        _check("conductor-congruence", True, rep.congruence_ok, "derived"),
    ]
    if args.ell == 2:
        checks.append(_check("two-torsion-unramified-signal", True,
                             rep.unramified_signal, "derived"))
    return {"ell": args.ell, "p": args.p}, results, checks


def _cmd_verify_identities(args) -> tuple[dict, dict, list[dict]]:
    rep = galois.build_rep(args.ell, args.d, args.s, args.precision)
    flat = lambda mat: [x for row in mat.rows for x in row]
    checks = []
    for c in galois.verify_identities(rep):
        checks.append(_check(f"identity-{c.name}", flat(c.rhs), flat(c.lhs),
                             "paper"))
    results = {
        "omega": rep.omega,
        "modulus": rep.ctx.modulus,
        "sigma": flat(rep.sigma),
        "tau": flat(rep.tau),
    }
    inputs = {"ell": args.ell, "s": args.s, "precision": args.precision,
              "d": args.d}
    return inputs, results, checks


def _node_payload(node: galois.MaximalNode) -> dict:
    return {
        "lattice": [list(b) for b in node.lattice.basis],
        "ell_part": node.ell_part,
        "sigma_trivial": node.sigma_trivial,
        "kernel_witnesses": len(node.kernels),
    }


def _cmd_isogeny_maximal(args) -> tuple[dict, dict, list[dict]]:
    ell, s, n = args.ell, args.s, args.n
    precision = max(4, n + 2)
    rep1 = galois.build_rep(ell, 1, s, precision)
    rep2 = galois.build_rep(ell, 2, s, precision)
    single = galois.find_ell_maximal(rep1, ell, n)
    product = galois.find_ell_maximal(rep2, ell * ell, n)
    filt1, filt2 = galois.filtration(rep1, 1), galois.filtration(rep2, 1)
    multiplicative = True
    for k1 in galois.stable_submodules(rep1, 1):
        for k2 in galois.stable_submodules(rep1, 1):
            combined = galois.component_transfer(
                galois.product_kernel(k1, k2), ell * ell, filt2)
            split = (galois.component_transfer(k1, ell, filt1)
                     * galois.component_transfer(k2, ell, filt1))
            multiplicative &= combined == split
    results = {
        "nodes": [_node_payload(nd) for nd in single.nodes],
        "maximal_part": single.maximal_part,
        "maximal_count": single.maximal_count,
        "product_nodes": len(product.nodes),
        "product_maximal_part": product.maximal_part,
    }
    checks = [
        _check("maximal-part", ell, single.maximal_part, "paper"),
        _check("maximal-attained-uniquely", 1, single.maximal_count,
               "derived"),
        _check("sigma-trivial-exactly-on-maximal", True,
               single.sigma_trivial_exactly_on_maximal, "paper"),
        _check("product-graph-maximal-part", ell * ell,
               product.maximal_part, "paper"),
        _check("product-transfer-multiplicative", True, multiplicative,
               "derived"),
    ]
    return {"ell": ell, "s": s, "n": n}, results, checks


def _cmd_class_number(args) -> tuple[dict, dict, list[dict]]:
    h = quadratic.class_number(args.disc)
    results = {"disc": args.disc, "class_number": h}
    checks = []
    if args.disc in _CLASS_NUMBER_TABLE:
        expected, tag = _CLASS_NUMBER_TABLE[args.disc]
        checks.append(_check("class-number", expected, h, tag))
    return {"disc": args.disc}, results, checks


def _cmd_controlled_degree(args) -> tuple[dict, dict, list[dict]]:
    rep = quadratic.controlled_two_extension(args.p)
    results = {
        "p": rep.p, "disc": rep.disc, "class_number": rep.h,
        "two_part": rep.n, "gal_MK_order": rep.gal_MK_order,
        "degree_over_Q": rep.degree_over_Q, "dihedral": rep.dihedral,
    }
    checks = [
        _check("degree-is-four-times-two-part", 4 * rep.n,
               rep.degree_over_Q, "trivial"),
    ]
    if args.p in _CONTROLLED_TABLE:
        h, degree, tag = _CONTROLLED_TABLE[args.p]
        checks.append(_check("class-number", h, rep.h, tag))
        checks.append(_check("degree-over-q", degree, rep.degree_over_Q, tag))
    return {"p": args.p}, results, checks


def _cmd_gamma_rank(args) -> tuple[dict, dict, list[dict]]:
    rep = cyclotomic.unit_image_rank(args.ell, args.p)
    spl = cyclotomic.splitting(args.ell, args.p)
    results = {
        "ell": rep.ell, "p": rep.p,
        "gamma_rank": rep.gamma_rank,
        "unit_image_rank": rep.unit_image_rank,
        "bound": rep.bound,
        "splitting": {"f": spl.f, "g": spl.g, "g2": spl.g2,
                      "has_two_primes": spl.has_two_primes},
    }
    checks = [
        _check("gamma-rank-is-prime-count", spl.g2, rep.gamma_rank,
               "trivial"),
        _check("bound-sandwich", True,
               0 <= rep.bound <= rep.gamma_rank, "trivial"),
    ]
    if (args.ell, args.p) == (5, 31):
        checks.append(_check("gamma-rank", 4, rep.gamma_rank, "derived"))
        checks.append(_check("quotient-rank", 3, rep.bound, "paper"))
    elif args.ell == 2 and args.p % 8 == 1:
        checks.append(_check("quotient-rank", 2, rep.bound, "derived"))
    return {"ell": args.ell, "p": args.p}, results, checks


def _cmd_ramification(args) -> tuple[dict, dict, list[dict]]:
    filt = ramification.RamFiltration(tuple(args.orders))
    jumps = ramification.upper_jumps(filt)
    cond = ramification.conductor_exponent(filt)
    verdict = ramification.check_break_bound(filt, args.ell)
    last = filt.last_break
    probes = [Fraction(0)]
    if last is not None:
        probes += [Fraction(k, 2) for k in range(1, 2 * last + 3)]
    roundtrip = all(
        ramification.herbrand_psi(filt, ramification.herbrand_phi(filt, u)) == u
        for u in probes)
    results = {
        "orders": list(filt.orders),
        "upper_jumps": jumps,
        "conductor_exponent": cond,
        "break_bound_ok": verdict,
    }
    checks = [_check("herbrand-roundtrip", True, roundtrip, "derived")]
    return {"orders": list(args.orders), "ell": args.ell}, results, checks


def _cmd_curve_info(args) -> tuple[dict, dict, list[dict]]:
    e = args.curve
    inv = invariants(e)
    results = {
        "curve": e,
        "reduced_model": reduce_model(e),
        "b2": inv.b2, "b4": inv.b4, "b6": inv.b6, "b8": inv.b8,
        "c4": inv.c4, "c6": inv.c6, "disc": inv.disc,
        "j": inv.j,
    }
    if args.primes:
        local = []
        for p in args.primes:
            ld = local_data(e, p)
            local.append({"p": ld.p, "kind": ld.kind,
                          "component_order": ld.component_order})
        results["local"] = local
    checks = [
        _check("b-invariant-relation", 4 * inv.b8,
               inv.b2 * inv.b6 - inv.b4**2, "trivial"),
        _check("discriminant-relation", 1728 * inv.disc,
               inv.c4**3 - inv.c6**2, "trivial"),
    ]
    return {"curve": e, "primes": args.primes or []}, results, checks


def _cmd_genus2_disc(args) -> tuple[dict, dict, list[dict]]:
    p_poly = tuple(args.p_coeffs)
    q_poly = tuple(args.q_coeffs)
    odd = hyperelliptic_odd_disc(p_poly, q_poly)
    factors = factorize(abs(odd)) if odd else {}
    results = {
        "p_coeffs": list(p_poly),
        "q_coeffs": list(q_poly),
        "odd_disc": odd,
        "factorization": {str(q): e for q, e in sorted(factors.items())},
    }
    checks = [_check("odd-part-is-odd", 1, abs(odd) % 2, "trivial")]
    if (p_poly, q_poly) == _GENUS2_REFERENCE:
        checks.append(_check("odd-part-is-power-of-277",
                             [277], sorted(factors), "paper"))
    return {"p_coeffs": list(p_poly), "q_coeffs": list(q_poly)}, results, checks


# ---------------------------------------------------------------- paper suite


def _suite_controlled_degree() -> list[dict]:
    rep = quadratic.controlled_two_extension(41)
    return [
        _check("controlled-degree-41-class-number", 8, rep.h, "paper"),
        _check("controlled-degree-41-degree", 32, rep.degree_over_Q, "paper"),
    ]


def _suite_class_number() -> list[dict]:
    return [_check("class-number-minus-164", 8,
                   quadratic.class_number(-164), "paper")]


def _suite_gamma_rank() -> list[dict]:
    rep = cyclotomic.unit_image_rank(5, 31)
    return [_check("gamma-rank-5-31-quotient-rank", 3, rep.bound, "paper")]


def _suite_identities() -> list[dict]:
    ok = True
    for ell in (2, 3, 5):
        for s in (ell, 2 * ell):
            for precision in (4, 6):
                for d in (1, 2):
                    rep = galois.build_rep(ell, d, s, precision)
                    ok &= galois.identities_pass(rep)
    return [_check("identity-grid-exact", True, ok, "paper")]


def _suite_ns_enumerate() -> list[dict]:
    _, _, checks = _cmd_ns_enumerate(argparse.Namespace(bound=10000))
    return [dict(c, name=f"ns-{c['name']}") for c in checks]


def _suite_dagger() -> list[dict]:
    out = []
    for ell, p in ((2, 17), (2, 73), (3, 19), (3, 37), (5, 11)):
        rep = families.dagger_report(ell, p)
        expected = 4 if (ell, p) == (2, 17) else ell
        out.append(_check(f"dagger-valuation-{ell}-{p}", expected,
                          rep.dagger_valuation, "paper"))
    return out


def _suite_isogeny_maximal() -> list[dict]:
    _, _, checks = _cmd_isogeny_maximal(argparse.Namespace(ell=2, s=2, n=1))
    keep = {"maximal-part", "sigma-trivial-exactly-on-maximal",
            "product-graph-maximal-part"}
    return [dict(c, name=f"isogeny-{c['name']}") for c in checks
            if c["name"] in keep]


def _suite_miyawaki() -> list[dict]:
    out = []
    for ell, expected in sorted(_MIYAWAKI_PRIMES.items()):
        hits = families.miyawaki_search(ell, 8)
        out.append(_check(f"miyawaki-primes-ell-{ell}", expected,
                          sorted(hits), "paper"))
    return out


def _suite_genus2() -> list[dict]:
    odd = hyperelliptic_odd_disc(*_GENUS2_REFERENCE)
    return [_check("genus2-odd-part-power-of-277", [277],
                   sorted(factorize(abs(odd))), "paper")]


def _cmd_paper_suite(args) -> tuple[dict, dict, list[dict]]:
    units = [
        _suite_controlled_degree,
        _suite_class_number,
        _suite_gamma_rank,
        _suite_identities,
        _suite_ns_enumerate,
        _suite_dagger,
        _suite_isogeny_maximal,
        _suite_miyawaki,
        _suite_genus2,
    ]
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        batches = list(pool.map(lambda fn: fn(), units))
    checks = [c for batch in batches for c in batch]
    results = {
        "total": len(checks),
        "passed": sum(1 for c in checks if c["pass"]),
        "failed": [c["name"] for c in checks if not c["pass"]],
        "workers": worker_count(),
    }
    return {}, results, checks


# ------------------------------------------------------------------- wiring


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semistable-lab",
        description="Desk-scale verification suite with JSON reports")
    parser.add_argument("--meta", action="store_true",
                        help="append a meta object (timestamp) after the "
                             "stable region")
    sub = parser.add_subparsers(dest="command", required=True)

    ns = sub.add_parser("ns-enumerate",
                        help="curve pairs attached to primes u^2 + 64")
    ns.add_argument("--bound", type=int, required=True)
    ns.set_defaults(handler=_cmd_ns_enumerate)

    mi = sub.add_parser("miyawaki-search",
                        help="prime-power-conductor curves with rational "
                             "odd torsion")
    mi.add_argument("--ell", type=int, required=True)
    mi.add_argument("--bound", type=int, default=8)
    mi.set_defaults(handler=_cmd_miyawaki_search)

    da = sub.add_parser("dagger",
                        help="distinguished member of a prime-conductor "
                             "isogeny class")
    da.add_argument("--ell", type=int, required=True)
    da.add_argument("--p", type=int, required=True)
    da.set_defaults(handler=_cmd_dagger)

    vi = sub.add_parser("verify-identities",
                        help="exact operator identities for the inertia pair")
    vi.add_argument("--ell", type=int, required=True)
    vi.add_argument("--s", type=int, required=True)
    vi.add_argument("--precision", type=int, default=4)
    vi.add_argument("--d", type=int, default=1)
    vi.set_defaults(handler=_cmd_verify_identities)

    im = sub.add_parser("isogeny-maximal",
                        help="maximal transferred l-part over the stable "
                             "kernel graph")
    im.add_argument("--ell", type=int, required=True)
    im.add_argument("--s", type=int, required=True)
    im.add_argument("--n", type=int, required=True)
    im.set_defaults(handler=_cmd_isogeny_maximal)

    cn = sub.add_parser("class-number",
                        help="reduced-form class number of an imaginary "
                             "quadratic discriminant")
    cn.add_argument("--disc", type=int, required=True)
    cn.set_defaults(handler=_cmd_class_number)

    cd = sub.add_parser("controlled-degree",
                        help="degree of the maximal 2-extension controlled "
                             "at p")
    cd.add_argument("--p", type=int, required=True)
    cd.set_defaults(handler=_cmd_controlled_degree)

    gr = sub.add_parser("gamma-rank",
                        help="local unit ranks and the global unit image "
                             "quotient")
    gr.add_argument("--ell", type=int, required=True)
    gr.add_argument("--p", type=int, required=True)
    gr.set_defaults(handler=_cmd_gamma_rank)

    ra = sub.add_parser("ramification",
                        help="Herbrand transfer, conductor exponent and "
                             "break bound for a filtration")
    ra.add_argument("--orders", type=_int_list, required=True,
                    help="comma-separated non-increasing group orders")
    ra.add_argument("--ell", type=int, required=True)
    ra.set_defaults(handler=_cmd_ramification)

    ci = sub.add_parser("curve-info",
                        help="Weierstrass invariants and reduction data")
    ci.add_argument("--curve", type=_parse_curve, required=True,
                    help="five comma-separated integers a1,a2,a3,a4,a6")
    ci.add_argument("--primes", type=_int_list, default=None)
    ci.set_defaults(handler=_cmd_curve_info)

    g2 = sub.add_parser("genus2-disc",
                        help="odd part of the discriminant of 4P + Q^2")
    g2.add_argument("--p-coeffs", type=_int_list, required=True,
                    help="degree-5 polynomial, constant term first")
    g2.add_argument("--q-coeffs", type=_int_list, default=[0],
                    help="polynomial of degree at most 3, constant first")
    g2.set_defaults(handler=_cmd_genus2_disc)

    ps = sub.add_parser("paper-suite",
                        help="run every check whose expected value is a "
                             "quoted source statement")
    ps.set_defaults(handler=_cmd_paper_suite)
    return parser


def run(argv: list[str] | None = None) -> tuple[dict, int]:
    """Parse argv, execute the subcommand, return (report, exit status)."""
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        inputs, results, checks = args.handler(args)
    except ValueError as exc:
        parser.error(str(exc))
    report = {
        "schema": 1,
        "command": args.command,
        "inputs": _jsonable(inputs),
        "results": _jsonable(results),
        "checks": checks,
    }
    if args.meta:
        report["meta"] = {
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "python": sys.version.split()[0],
        }
    status = 0 if all(c["pass"] for c in checks) else 1
    return report, status


def main(argv: list[str] | None = None) -> int:
    report, status = run(argv)
    print(json.dumps(report, indent=2))
    return status


if __name__ == "__main__":
    raise SystemExit(main())
