"""Property suites run by ``graphable verify``.

Each suite returns a list of ``{"property", "status", "counterexample"}``
entries.  Everything random is derived from ``RunConfig.seed``, so the same
configuration always produces the same report.
"""

from __future__ import annotations

import zlib
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Callable

import numpy as np

from . import ceer as cg
from . import forcing as ks
from . import linear_orders as lo
from . import oracles as oc
from . import structures as st
from .errors import GraphableError

__all__ = ["RunConfig", "SUITES", "run_suite", "build_report", "derive_seed",
           "structure_instances", "order_instances", "trivial_instances"]


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    ceer_budget: int = 1000
    ceer_pairs: int = 100
    ceer_merges: int = 10
    lo_seeds: int = 20
    lo_payload: int = 64
    lo_prefix: int = 200
    struct_instances: int = 20
    struct_payload: int = 32
    struct_stages: int = 40
    struct_budget: int = 10 ** 5
    ks_runs: int = 20
    ks_payload: int = 32
    ks_family: int = 50
    ks_probe_depth: int = 64
    diff_budget: int = 4096

    def to_json(self) -> dict:
        return asdict(self)


def derive_seed(seed: int, label: str, index: int = 0) -> int:
    return oc.mix64(seed, zlib.crc32(label.encode()), index) & 0x7FFFFFFF


def _result(prop: str, failure=None) -> dict:
    return {"property": prop, "status": "pass" if failure is None else "fail",
            "counterexample": failure}


def _random_bits(seed: int, length: int) -> oc.BitStream:
    """``length`` seeded bits followed by zeros."""
    s = oc.bits_to_string(oc.random_stream(seed), length)
    return oc.bits_from_string(s)


# ---------------------------------------------------------------------------
# core oracles

def suite_oracles(cfg: RunConfig) -> list[dict]:
    out = []
    bad = next((k for k in range(10 ** 4) if oc.pair(*oc.unpair(k)) != k), None)
    if bad is None:
        bad = next(([m, n] for m in range(100) for n in range(100)
                    if oc.unpair(oc.pair(m, n)) != (m, n)), None)
    out.append(_result("oracles/pairing-roundtrip", bad))

    a = oc.random_stream(derive_seed(cfg.seed, "join-a"))
    b = oc.random_stream(derive_seed(cfg.seed, "join-b"))
    j = oc.join(a, b)
    bad = next((n for n in range(1000) if j(2 * n) != a(n) or j(2 * n + 1) != b(n)), None)
    out.append(_result("oracles/join-projections", bad))

    for order in (oc.omega_order(), oc.parity_order(), oc.reverse_parity_order()):
        back = oc.decode_order(oc.order_code(order))
        bad = next(([m, n] for m in range(50) for n in range(50)
                    if back.leq(m, n) != order.leq(m, n)), None)
        out.append(_result(f"oracles/order-code-roundtrip/{order.descriptor['kind']}", bad))

    for obj in (oc.random_stream(cfg.seed), oc.block_shuffle_order(cfg.seed), oc.random_graph(cfg.seed)):
        t1, t2 = oc.materialize_prefix(obj, 20), oc.materialize_prefix(obj, 20)
        same = all(np.array_equal(t1[k], t2[k]) for k in t1) if isinstance(t1, dict) \
            else np.array_equal(t1, t2)
        out.append(_result(f"oracles/materialize-determinism/{obj.descriptor['kind']}",
                           None if same else "tables differ"))
    return out


# ---------------------------------------------------------------------------
# ceer graphing

def _ceers(cfg: RunConfig) -> list[tuple[str, cg.CeerEnumeration]]:
    out = [(f"mod-{k}", cg.mod_k_ceer(k)) for k in range(1, 5)]
    for i in range(cfg.ceer_merges):
        s = derive_seed(cfg.seed, "merge", i)
        out.append((f"merge-{i}", cg.random_merge_schedule(s)))
    return out


def diameter_two_check(E: cg.CeerEnumeration, x: int, y: int, budget: int):
    """``None`` if connect/adjacency/certificates all work for ``x ~ y``,
    otherwise a description of what went wrong."""
    try:
        z = cg.connect(E, x, y, budget)
    except GraphableError as exc:
        return {"x": x, "y": y, "error": type(exc).__name__, "message": str(exc)}
    certs = []
    for w in (x, y):
        ok, graph = cg.adjacent(E, w, z)
        if not ok:
            return {"x": x, "y": y, "z": z, "problem": f"{w} not adjacent to {z}"}
        cert = graph.certificate(w, z)
        if cert is None or not cert.replay(E):
            return {"x": x, "y": y, "z": z, "problem": f"no replayable certificate {w}~{z}"}
        certs.append(cert)
    joined = certs[0].compose(certs[1].reversed())
    if not joined.replay(E):
        return {"x": x, "y": y, "z": z, "problem": "composed certificate does not replay"}
    return None


def suite_ceer_diameter2(cfg: RunConfig) -> list[dict]:
    out = []
    for i, (name, E) in enumerate(_ceers(cfg)):
        rng = np.random.default_rng(derive_seed(cfg.seed, "ceer-pairs", i))
        failure = None
        checked = 0
        while checked < cfg.ceer_pairs and failure is None:
            x = int(rng.integers(0, 20))
            y = E(x, int(rng.integers(1, 20)))
            if cg.witness_equivalent(E, x, y, cfg.ceer_budget) is None:
                continue
            failure = diameter_two_check(E, x, y, cfg.ceer_budget)
            checked += 1
        out.append(_result(f"ceer/diameter-2/{name}", failure))
    return out


def suite_ceer_bruteforce(cfg: RunConfig, bound: int = 40) -> list[dict]:
    out = []
    for k in range(1, 5):
        E = cg.mod_k_ceer(k)
        failure = None
        for x in range(bound):
            for y in range(bound):
                if x == y:
                    continue
                adj, _ = cg.adjacent(E, x, y)
                if adj != cg.adjacent(E, y, x)[0]:
                    failure = {"x": x, "y": y, "problem": "asymmetric"}
                elif adj and (x - y) % k:
                    failure = {"x": x, "y": y, "problem": "adjacent but inequivalent"}
                else:
                    try:
                        cg.connect(E, x, y, cfg.ceer_budget)
                        connected = True
                    except cg.BudgetExhausted:
                        connected = False
                    if connected != ((x - y) % k == 0):
                        failure = {"x": x, "y": y, "problem": f"connect succeeded={connected}"}
                if failure:
                    break
            if failure:
                break
        out.append(_result(f"ceer/brute-force/mod-{k}", failure))
    return out


def suite_ceer_enumeration(cfg: RunConfig) -> list[dict]:
    out = []
    for name, E in _ceers(cfg):
        bad = cg.enumeration_violations(E, 30, 100, search=cfg.ceer_budget)
        out.append(_result(f"ceer/enumeration-contract/{name}", bad[0] if bad else None))
    return out


# ---------------------------------------------------------------------------
# linear orders

def order_instances(cfg: RunConfig) -> list[tuple[oc.LinearOrderOracle, oc.BitStream]]:
    out = []
    for i in range(cfg.lo_seeds):
        s = derive_seed(cfg.seed, "lo", i)
        kind = oc.ORDER_KINDS[i % len(oc.ORDER_KINDS)]
        order = oc.order_from_descriptor({"kind": kind, "seed": s, "params": {}})
        out.append((order, _random_bits(s, cfg.lo_payload)))
    return out


def lo_roundtrip_failure(base, payload, prefix: int, payload_bits: int = 128, table: int = 100):
    coded, f = lo.encode_order(base, payload)
    c = oc.join(payload, oc.order_code(base))
    for n in range(payload_bits):
        if lo.decode_payload(coded, n) != c(n):
            return {"check": "payload", "n": n}
    fx = [f(n) for n in range(prefix)]
    for n in range(prefix):
        if fx[n] >= prefix or fx[fx[n]] != n:
            return {"check": "involution", "n": n}
    base_tab = oc.materialize_prefix(base, prefix)
    coded_tab = oc.materialize_prefix(coded, prefix)
    idx = np.asarray(fx)
    bad = np.argwhere(coded_tab != base_tab[np.ix_(idx, idx)])
    if len(bad):
        return {"check": "isomorphism", "pair": bad[0].tolist()}
    back = lo.recover_base_order(coded)
    table = min(table, prefix)
    bad = np.argwhere(oc.materialize_prefix(back, table) != base_tab[:table, :table])
    if len(bad):
        return {"check": "recover-base-order", "pair": bad[0].tolist()}
    for n in range(prefix // 2):
        if lo.recover_isomorphism(base, coded, n) != (fx[2 * n], fx[2 * n + 1]):
            return {"check": "recover-isomorphism", "n": n}
    viol = lo.order_axiom_violations(coded, 30)
    if viol:
        return {"check": "axioms", "violation": viol[0]}
    return None


def suite_lo_roundtrip(cfg: RunConfig) -> list[dict]:
    return [_result(f"lo/roundtrip/{i:02d}-{base.descriptor['kind']}",
                    lo_roundtrip_failure(base, a, cfg.lo_prefix))
            for i, (base, a) in enumerate(order_instances(cfg))]


# ---------------------------------------------------------------------------
# structures

def structure_instances(cfg: RunConfig) -> list[tuple[oc.StructureOracle, oc.BitStream]]:
    out = []
    for i in range(cfg.struct_instances):
        s = derive_seed(cfg.seed, "struct", i)
        kind = ("path-graph", "even-predicate", "random-bits")[i % 3]
        M = oc.structure_from_descriptor({"kind": kind, "seed": s, "params": {}})
        out.append((M, _random_bits(s, cfg.struct_payload)))
    return out


def struct_roundtrip_failure(M, payload, stages: int, budget: int):
    enc = st.encode_structure(M, payload, stages, budget)
    dec = st.decode_structure(enc.structure, M.signature, stages, enc.certificate.max_bound)
    if dec.queue != enc.queue[:stages]:
        return {"check": "queue", "decoded": dec.queue, "encoded": enc.queue[:stages]}
    want = [payload(n) for n in range(len(dec.payload))]
    if dec.payload != want:
        return {"check": "payload", "decoded": dec.payload, "expected": want}
    placed = enc.placement.placed
    if dec.placed != placed[:len(dec.placed)]:
        return {"check": "placement", "decoded": dec.placed}
    missing = sorted(set(range(stages)) - set(placed))
    if missing:
        return {"check": "surjectivity", "unplaced": missing[0]}
    f = np.asarray(placed, dtype=np.int64)
    table = oc.materialize_prefix(enc.structure, len(placed))
    for name, arity in M.signature.relations:
        grids = np.meshgrid(*[f] * arity, indexing="ij")
        bad = np.argwhere(table[name] != M.holds_array(name, *grids))
        if len(bad):
            return {"check": "pullback", "atom": [name, bad[0].tolist()]}
    return None


def suite_struct_roundtrip(cfg: RunConfig) -> list[dict]:
    out = []
    for i, (M, a) in enumerate(structure_instances(cfg)):
        try:
            failure = struct_roundtrip_failure(M, a, cfg.struct_stages, cfg.struct_budget)
        except GraphableError as exc:
            failure = {"error": type(exc).__name__, "message": str(exc)}
        out.append(_result(f"struct/roundtrip/{i:02d}-{M.descriptor['kind']}", failure))
    return out


def _seeded_permutation(seed: int, size: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(size)


def trivial_instances(cfg: RunConfig, window: int = 24):
    """``(name, M, N, F, f_on_F)`` with ``M`` trivial over ``F`` and ``f_on_F``
    the restriction of an isomorphism ``M -> N``."""
    out = []
    for i in range(3):
        s = derive_seed(cfg.seed, "trivial", i)
        rng = np.random.default_rng(s)
        marked = sorted(int(v) for v in rng.choice(window // 2, size=3, replace=False))
        perm = _seeded_permutation(s, window)   # N(n) = M(perm(n)) on the window
        inv = np.argsort(perm)

        def fwd(a, perm=perm):
            a = np.asarray(a, dtype=np.int64)
            return np.where(a < window, perm[np.minimum(a, window - 1)], a)

        for M in (oc.finite_marked_structure(marked), oc.finite_marked_structure(marked, True)):
            N = st.pullback(M, fwd)
            f_on_F = {m: int(inv[m]) for m in marked}
            out.append((f"marked-{i}-{'edges' if len(M.signature.relations) > 1 else 'plain'}",
                        M, N, marked, f_on_F))
    out.append(("complete-graph", oc.complete_graph(), oc.complete_graph(), [], {}))
    out.append(("empty-signature", oc.empty_structure(), oc.empty_structure(), [], {}))
    return out


def random_agreeing_bijection(rng, f_on_F: dict, window: int) -> np.ndarray:
    """Seeded bijection of ``0..window-1`` extending ``f_on_F`` (identity above)."""
    table = np.full(window, -1, dtype=np.int64)
    for a, b in f_on_F.items():
        table[a] = b
    free_src = np.flatnonzero(table < 0)
    free_dst = np.setdiff1d(np.arange(window), list(f_on_F.values()))
    table[free_src] = rng.permutation(free_dst)
    return table


def suite_struct_triviality(cfg: RunConfig, prefix: int = 24) -> list[dict]:
    out = []
    try:
        st.encode_structure(oc.empty_structure(), oc.constant_stream(0), 5, cfg.struct_budget)
        failure = "no TrivialityDetected"
    except st.TrivialityDetected as exc:
        failure = None if exc.stage == 0 else {"stage": exc.stage}
    out.append(_result("struct/triviality/empty-signature-stage-0", failure))

    for name, M, N, F, f_on_F in trivial_instances(cfg, prefix):
        rng = np.random.default_rng(derive_seed(cfg.seed, "bijections:" + name))
        failure = None
        try:
            st.trivial_extend_iso(M, N, F, f_on_F, prefix)
        except st.IsomorphismCheckFailed as exc:
            failure = {"bijection": "canonical", "atom": [exc.atom[0], list(exc.atom[1])]}
        for t in range(10):
            if failure:
                break
            table = random_agreeing_bijection(rng, f_on_F, prefix)

            def g(a, table=table):
                a = np.asarray(a, dtype=np.int64)
                return np.where(a < prefix, table[np.minimum(a, prefix - 1)], a)

            bad = st.check_isomorphism(M, N, g, prefix)
            if bad is not None:
                failure = {"bijection": t, "atom": [bad[0], list(bad[1])]}
        out.append(_result(f"struct/triviality/agreeing-bijections/{name}", failure))

    try:
        st.trivial_extend_iso(oc.even_predicate(), oc.odd_predicate(), [], {}, 30)
        failure = "no IsomorphismCheckFailed"
    except st.IsomorphismCheckFailed as exc:
        failure = None if exc.atom == ("P", (0,)) else {"atom": [exc.atom[0], list(exc.atom[1])]}
    out.append(_result("struct/triviality/even-vs-odd-counterexample", failure))
    return out


# ---------------------------------------------------------------------------
# labelled-tree forcing conditions

def ks_selectors(x: oc.BitStream, seed: int) -> list[ks.DenseSelector]:
    sels = [ks.identity_selector, ks.label_elsewhere_selector(x, seed), ks.add_forbidden_selector(seed)]
    shift = seed % len(sels)
    return sels[shift:] + sels[:shift]


def chain_failure(result: ks.GenericLabelingPrefix, x: oc.BitStream, probes, probe_depth: int):
    """Checks descending chain, bot-permanence and label monotonicity."""
    chain = result.chain
    for i in range(1, len(chain)):
        if not ks.extends(chain[i], chain[i - 1], probe_depth):
            return {"check": "descending", "link": i}
    union = result.marks
    for i, p in enumerate(chain):
        for s, v in union.items():
            if len(s) <= p.depth and p.marks.get(s) != v:
                return {"check": "bot-permanence", "condition": i, "string": s}
    for y in (x,) + tuple(probes):
        for i in range(1, len(chain)):
            p, q = chain[i - 1], chain[i]
            before = ks.eval_labels(p, y, p.depth)
            if not ks.eval_labels(q, y, q.depth).startswith(before):
                return {"check": "monotonicity", "link": i}
    return None


def suite_ks_coding(cfg: RunConfig) -> list[dict]:
    out = []
    for i in range(cfg.ks_runs):
        s = derive_seed(cfg.seed, "ks", i)
        x = oc.random_stream(s)
        payload = _random_bits(s + 1, cfg.ks_payload)
        try:
            res = ks.build_generic(ks.empty_condition(), ks_selectors(x, s), x, payload,
                                   cfg.ks_payload, cfg.diff_budget, cfg.ks_probe_depth)
            got = ks.eval_labels(res, x, res.depth)
            want = oc.bits_to_string(payload, cfg.ks_payload)
            failure = None if got == want else {"read": got, "payload": want}
            if failure is None:
                probes = [oc.random_stream(derive_seed(s, "probe", j)) for j in range(3)]
                failure = chain_failure(res, x, probes, cfg.ks_probe_depth)
        except GraphableError as exc:
            failure = {"error": type(exc).__name__, "message": str(exc)}
        out.append(_result(f"ks/coding/{i:02d}", failure))
    return out


def suite_ks_poset_laws(cfg: RunConfig) -> list[dict]:
    fam = ks.condition_family(derive_seed(cfg.seed, "ks-family"), cfg.ks_family)
    n = len(fam)
    E = np.array([[ks.extends(fam[a], fam[b], cfg.ks_probe_depth) for b in range(n)]
                  for a in range(n)])
    out = []
    bad = np.flatnonzero(~E.diagonal())
    out.append(_result("ks/poset/reflexive", int(bad[0]) if bad.size else None))
    # r <= q and q <= p must give r <= p
    two_step = (E.astype(np.int64) @ E.astype(np.int64)) > 0
    bad = np.argwhere(two_step & ~E)
    failure = None
    if len(bad):
        r, p = (int(v) for v in bad[0])
        q = int(np.flatnonzero(E[r] & E[:, p])[0])
        failure = {"r": r, "q": q, "p": p}
    out.append(_result("ks/poset/transitive", failure))
    probes = [oc.random_stream(derive_seed(cfg.seed, "ks-probe", j)) for j in range(8)]
    failure = None
    for q_i, p_i in np.argwhere(E):
        p, q = fam[p_i], fam[q_i]
        for j, y in enumerate(probes):
            if not ks.eval_labels(q, y, q.depth).startswith(ks.eval_labels(p, y, p.depth)):
                failure = {"q": int(q_i), "p": int(p_i), "probe": j}
                break
        if failure:
            break
    out.append(_result("ks/poset/label-monotonicity", failure))
    return out


def suite_ks_contracts(cfg: RunConfig) -> list[dict]:
    out = []
    x = oc.random_stream(derive_seed(cfg.seed, "ks-contract"))
    for offending in (0, 2, 5):
        sels = [ks.identity_selector] * offending + [ks.path_labelling_selector(x)]
        try:
            ks.build_generic(ks.empty_condition(), sels, x, oc.constant_stream(1),
                             offending + 3, cfg.diff_budget)
            failure = "no SelectorContractViolation"
        except ks.SelectorContractViolation as exc:
            failure = None if exc.round == offending else {"round": exc.round}
        out.append(_result(f"ks/contract/labels-along-path-round-{offending}", failure))

    failure = None
    twin = oc.random_stream(x.descriptor["seed"])   # same path, different object
    for path in (x, twin):
        p = ks.KsCondition(-1, {}, (path,))
        for budget in (1, 10, 100, 1000, 10 ** 4):
            try:
                ks.encode_bit_along(p, x, 1, budget)
                failure = {"budget": budget, "same_object": path is x}
            except ks.DiffBudgetExhausted:
                pass
    out.append(_result("ks/contract/forbidden-path-exhausts-diff-budget", failure))
    return out


SUITES: dict[str, Callable[[RunConfig], list[dict]]] = {
    "oracles": suite_oracles,
    "ceer-diameter2": suite_ceer_diameter2,
    "ceer-bruteforce": suite_ceer_bruteforce,
    "ceer-enumeration": suite_ceer_enumeration,
    "lo-roundtrip": suite_lo_roundtrip,
    "struct-roundtrip": suite_struct_roundtrip,
    "struct-triviality": suite_struct_triviality,
    "ks-coding": suite_ks_coding,
    "ks-poset-laws": suite_ks_poset_laws,
    "ks-contracts": suite_ks_contracts,
}


def run_suite(name: str, cfg: RunConfig) -> list[dict]:
    """Results of suite ``name`` (``"all"`` runs every suite, ``""`` none)."""
    if name == "":
        return []
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise KeyError(f"unknown suite {name!r}; choose from {['all'] + list(SUITES)}")
    results = [r for n in names for r in SUITES[n](cfg)]
    return sorted(results, key=lambda r: r["property"])


def build_report(name: str, cfg: RunConfig) -> dict:
    return {"suite": name, "config": cfg.to_json(),
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "results": run_suite(name, cfg)}
