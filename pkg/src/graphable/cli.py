"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 budget exhausted, 3 internal
contradiction, contract violation or failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import ceer as cg
from . import forcing as ks
from . import linear_orders as lo
from . import oracles as oc
from . import structures as st
from .errors import BudgetExhausted, ContractViolation, GraphableError, InternalContradiction
from .verify import SUITES, RunConfig, build_report, diameter_two_check, derive_seed, run_suite

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_CONTRADICTION = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _load_json(text: str):
    """Inline JSON, or the path of a JSON file."""
    stripped = text.strip()
    if stripped[:1] in "{[":
        return json.loads(stripped)
    return json.loads(Path(text).read_text())


def _bits(text: str) -> oc.BitStream:
    try:
        return oc.bits_from_string(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(obj, args, text: str | None = None):
    if text is None:
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# ceer-graph

def cmd_ceer_adjacent(args):
    E = cg.ceer_from_descriptor(_load_json(args.ceer))
    adj, graph = cg.adjacent(E, args.x, args.y)
    cert = graph.certificate(args.x, args.y) if adj else None
    if args.dot:
        Path(args.dot).write_text(graph.to_dot())
    if args.format == "dot":
        _emit(None, args, graph.to_dot())
    else:
        _emit({"x": args.x, "y": args.y, "adjacent": adj,
               "certificate": cert.to_json() if cert else None,
               "graph": graph.to_json()}, args)
    return EXIT_OK


def cmd_ceer_connect(args):
    E = cg.ceer_from_descriptor(_load_json(args.ceer))
    z = cg.connect(E, args.x, args.y, args.budget)
    certs = []
    for w in (args.x, args.y):
        _, graph = cg.adjacent(E, w, z)
        certs.append(graph.certificate(w, z).to_json())
    _emit({"x": args.x, "y": args.y, "z": z, "certificates": certs}, args)
    return EXIT_OK


def cmd_ceer_verify(args):
    E = cg.ceer_from_descriptor(_load_json(args.ceer))
    rng = np.random.default_rng(derive_seed(args.seed, "cli-ceer-pairs"))
    results = []
    for _ in range(args.pairs):
        x = int(rng.integers(0, 20))
        y = E(x, int(rng.integers(1, 20)))
        failure = diameter_two_check(E, x, y, args.budget)
        results.append({"property": f"diameter-2/{x}-{y}",
                        "status": "pass" if failure is None else "fail",
                        "counterexample": failure})
    _emit({"suite": "ceer-graph-verify", "results": results}, args)
    return EXIT_OK if all(r["status"] == "pass" for r in results) else EXIT_CONTRADICTION


# ---------------------------------------------------------------------------
# lo-code

def cmd_lo_encode(args):
    base = oc.order_from_descriptor(_load_json(args.order))
    coded, f = lo.encode_order(base, _bits(args.payload))
    table = oc.materialize_prefix(coded, args.prefix)
    _emit({"order": base.descriptor, "payload": args.payload, "prefix": args.prefix,
           "table": table.astype(int).tolist(), "f": [f(n) for n in range(args.prefix)]}, args)
    return EXIT_OK


def cmd_lo_decode(args):
    data = _load_json(args.order_table)
    table = np.asarray(data["table"] if isinstance(data, dict) else data, dtype=bool)
    size = table.shape[0]
    if 2 * args.bits > size:
        raise BudgetExhausted(f"{args.bits} bits need a {2 * args.bits}-element table, got {size}")

    def leq(m, n):
        if max(m, n) >= size:
            raise BudgetExhausted(f"comparison ({m}, {n}) outside the {size}-element table")
        return bool(table[m, n])

    coded = oc.LinearOrderOracle(leq)
    c = "".join(str(lo.decode_payload(coded, n)) for n in range(args.bits))
    _emit({"c": c, "payload": c[0::2], "base_code": c[1::2]}, args)
    return EXIT_OK


def cmd_lo_verify(args):
    cfg = RunConfig(seed=args.seed, lo_seeds=args.seeds, lo_prefix=args.prefix)
    results = run_suite("lo-roundtrip", cfg)
    _emit({"suite": "lo-roundtrip", "results": results}, args)
    return EXIT_OK if all(r["status"] == "pass" for r in results) else EXIT_CONTRADICTION


# ---------------------------------------------------------------------------
# struct-code

def _structure(text: str) -> oc.StructureOracle:
    return oc.structure_from_descriptor(_load_json(text))


def cmd_struct_encode(args):
    M = _structure(args.structure)
    enc = st.encode_structure(M, _bits(args.payload), args.stages, args.budget)
    size = args.table_size
    if size is None:
        size = len(enc.placement.placed) + enc.certificate.max_bound
    tables = oc.materialize_prefix(enc.structure, size)
    _emit({"structure": M.descriptor, "signature": M.signature.to_json(),
           "stages": args.stages, "budget": args.budget, "table_size": size,
           "n_table": {k: v.astype(int).tolist() for k, v in tables.items()},
           "f": enc.placement.placed, "queue": enc.queue[:args.stages],
           "stage_log": [r.to_json() for r in enc.placement.log],
           "certificate": enc.certificate.to_json()}, args)
    return EXIT_OK


def cmd_struct_decode(args):
    data = _load_json(args.table)
    signature = oc.Signature.from_json(_load_json(args.signature) if args.signature
                                       else data["signature"])
    N = st.table_structure(signature, data["n_table"])
    stages = args.stages if args.stages is not None else data["stages"]
    budget = args.budget if args.budget is not None else data["certificate"]["max_bound"]
    dec = st.decode_structure(N, signature, stages, budget)
    _emit(dec.to_json(), args)
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()] if text else []


def cmd_struct_trivial(args):
    M = _structure(args.structure)
    fixed = _int_list(args.fixed)
    if args.other is None:
        w = st.is_trivial_within(M, fixed, args.budget)
        _emit({"fixed": fixed, "budget": args.budget,
               "witness": None if w is None else
               {"formula": str(w.formula), "formula_index": w.formula.index,
                "b": list(w.b), "c": list(w.c)}}, args)
        return EXIT_OK
    N = _structure(args.other)
    mapping = {}
    for item in (args.map or "").split(","):
        if item.strip():
            a, b = item.split(":")
            mapping[int(a)] = int(b)
    if not args.map:
        mapping = {a: a for a in fixed}
    try:
        table = st.trivial_extend_iso(M, N, fixed, mapping, args.prefix)
    except st.IsomorphismCheckFailed as exc:
        _emit({"isomorphism": False, "atom": [exc.atom[0], list(exc.atom[1])]}, args)
        return EXIT_CONTRADICTION
    _emit({"isomorphism": True, "table": table.tolist()}, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# ks-force

_SELECTORS = {
    "identity": lambda x, seed: ks.identity_selector,
    "label-elsewhere": lambda x, seed: ks.label_elsewhere_selector(x, seed),
    "add-forbidden": lambda x, seed: ks.add_forbidden_selector(seed),
    "label-along-path": lambda x, seed: ks.path_labelling_selector(x),
}


def cmd_ks_encode(args):
    x = oc.stream_from_descriptor(_load_json(args.path))
    names = [s for s in args.selectors.split(",") if s]
    unknown = [s for s in names if s not in _SELECTORS]
    if unknown:
        raise UsageError(f"unknown selectors {unknown}; choose from {sorted(_SELECTORS)}")
    sels = [_SELECTORS[s](x, args.seed) for s in names]
    res = ks.build_generic(ks.empty_condition(), sels, x, _bits(args.payload),
                           args.rounds, args.diff_budget)
    _emit({"labels": ks.eval_labels(res, x, res.depth), "coded": res.coded,
           "depth": res.depth, "chain": [c.to_json() for c in res.chain]}, args)
    return EXIT_OK


def cmd_ks_eval(args):
    cond = ks.condition_from_json(_load_json(args.condition))
    x = oc.stream_from_descriptor(_load_json(args.path))
    _emit({"labels": ks.eval_labels(cond, x, args.depth)}, args)
    return EXIT_OK


# ---------------------------------------------------------------------------

def cmd_verify(args):
    report = build_report(args.suite, RunConfig(seed=args.seed))
    _emit(report, args)
    return EXIT_OK if all(r["status"] == "pass" for r in report["results"]) else EXIT_CONTRADICTION


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the output here instead of stdout")
    common.add_argument("--format", choices=["json", "dot"], default="json")

    parser = _Parser(prog="graphable", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    ceer = sub.add_parser("ceer-graph", help="diameter-2 graphing of a ceer").add_subparsers(
        dest="action", required=True)
    p = ceer.add_parser("adjacent", parents=[common])
    p.add_argument("--ceer", required=True, help='descriptor, e.g. {"kind":"mod-k","params":{"k":2}}')
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--dot", help="also write the witness graph as DOT here")
    p.set_defaults(func=cmd_ceer_adjacent)
    p = ceer.add_parser("connect", parents=[common])
    p.add_argument("--ceer", required=True)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--budget", type=int, required=True)
    p.set_defaults(func=cmd_ceer_connect)
    p = ceer.add_parser("verify", parents=[common])
    p.add_argument("--ceer", required=True)
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--budget", type=int, default=1000)
    p.set_defaults(func=cmd_ceer_verify)

    loc = sub.add_parser("lo-code", help="coding bits into a linear order").add_subparsers(
        dest="action", required=True)
    p = loc.add_parser("encode", parents=[common])
    p.add_argument("--order", required=True, help='descriptor, e.g. {"kind":"omega"}')
    p.add_argument("--payload", required=True, help="bit string, zeros afterwards")
    p.add_argument("--prefix", type=int, default=32)
    p.set_defaults(func=cmd_lo_encode)
    p = loc.add_parser("decode", parents=[common])
    p.add_argument("--order-table", required=True, help="output of lo-code encode, or a 0/1 matrix")
    p.add_argument("--bits", type=int, required=True)
    p.set_defaults(func=cmd_lo_decode)
    p = loc.add_parser("verify", parents=[common])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--prefix", type=int, default=200)
    p.set_defaults(func=cmd_lo_verify)

    sc = sub.add_parser("struct-code", help="coding bits into a relational structure").add_subparsers(
        dest="action", required=True)
    p = sc.add_parser("encode", parents=[common])
    p.add_argument("--structure", required=True, help='descriptor, e.g. {"kind":"path-graph"}')
    p.add_argument("--payload", required=True)
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--budget", type=int, default=10 ** 5)
    p.add_argument("--table-size", type=int, help="default: placed positions + certificate bound")
    p.set_defaults(func=cmd_struct_encode)
    p = sc.add_parser("decode", parents=[common])
    p.add_argument("--table", required=True, help="output of struct-code encode")
    p.add_argument("--signature", help="overrides the signature stored with the table")
    p.add_argument("--stages", type=int)
    p.add_argument("--budget", type=int, help="default: the certificate's bound")
    p.set_defaults(func=cmd_struct_decode)
    p = sc.add_parser("trivial-check", parents=[common])
    p.add_argument("--structure", required=True)
    p.add_argument("--fixed", default="", help="comma-separated elements")
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--other", help="second structure: check the extension of --map is an isomorphism")
    p.add_argument("--map", help="a:b pairs on the fixed set (default identity)")
    p.add_argument("--prefix", type=int, default=30)
    p.set_defaults(func=cmd_struct_trivial)

    kf = sub.add_parser("ks-force", help="labelled-tree conditions").add_subparsers(
        dest="action", required=True)
    p = kf.add_parser("encode", parents=[common])
    p.add_argument("--payload", required=True)
    p.add_argument("--path", required=True, help='stream descriptor, e.g. {"kind":"random","seed":3}')
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--diff-budget", type=int, default=4096)
    p.add_argument("--selectors", default="identity,label-elsewhere,add-forbidden")
    p.set_defaults(func=cmd_ks_encode)
    p = kf.add_parser("eval", parents=[common])
    p.add_argument("--condition", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--depth", type=int, required=True)
    p.set_defaults(func=cmd_ks_eval)

    p = sub.add_parser("verify", parents=[common], help="run property suites")
    p.add_argument("--suite", default="all", choices=["all", ""] + list(SUITES))
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format == "dot" and args.func is not cmd_ceer_adjacent:
            raise UsageError("--format dot is only available for ceer-graph adjacent")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except BudgetExhausted as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (st.TrivialityDetected, ks.DiffBudgetExhausted) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InternalContradiction, ContractViolation, ks.SelectorContractViolation) as exc:
        print(f"contradiction: {exc}", file=sys.stderr)
        return EXIT_CONTRADICTION
    except (GraphableError, ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
