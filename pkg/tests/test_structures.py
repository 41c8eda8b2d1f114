from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphable import oracles as oc
from graphable import structures as S
from graphable.errors import BudgetExhausted
from graphable.qf import FormulaEnumeration

from test_qf import scalar_truth


def brute_distinguishing(M, placed, budget):
    """Direct transcription of the bounded search with scalar queries."""
    enum = FormulaEnumeration(M.signature)
    unplaced = [e for e in range(len(placed) + budget + 2) if e not in placed]
    for j in range(budget):
        item = enum[j]
        l = item.free_slots
        if l == 0 or item.param_count > len(placed):
            continue
        m = int(round(budget ** (1 / l)))
        while m ** l > budget:
            m -= 1
        while (m + 1) ** l <= budget:
            m += 1
        cands = unplaced[:m]
        order = sorted(permutations(range(m), l), key=lambda t: (max(t), t))
        first = {}
        for idx in order:
            tup = [cands[i] for i in idx]
            first.setdefault(scalar_truth(item.formula, M, placed, tup), tuple(tup))
            if len(first) == 2:
                return j, first[True], first[False]
    return None


def test_path_graph_first_distinction():
    d = S.find_distinguishing(oc.path_graph(), [], 10 ** 4)
    assert str(d.formula) == "R(y1, y2)"
    assert (d.b, d.c) == ((0, 1), (0, 2))


def test_even_predicate_first_distinction():
    d = S.is_trivial_within(oc.even_predicate(), [], 10)
    assert str(d.formula) == "P(y1)" and (d.b, d.c) == ((0,), (1,))


def test_empty_signature_never_distinguishes():
    for budget in (1, 10, 10 ** 5):
        assert S.find_distinguishing(oc.empty_structure(), [], budget) is None


def test_complete_graph_needs_no_edges_to_be_trivial():
    # every pair of distinct elements is an edge, so nothing separates tuples
    assert S.find_distinguishing(oc.complete_graph(), [], 10 ** 4) is None


def test_finite_marked_is_trivial_over_its_marks():
    M = oc.finite_marked_structure([1, 3])
    assert S.is_trivial_within(M, [1, 3], 10 ** 4) is None
    assert S.is_trivial_within(M, [], 100) is not None


@pytest.mark.parametrize("make,placed", [
    (oc.path_graph, []), (oc.path_graph, [0, 2, 1]), (oc.path_graph, [5]),
    (oc.even_predicate, [0, 1]), (lambda: oc.random_graph(4), []),
    (lambda: oc.random_graph(9), [3, 0]), (oc.grid_graph, [0]),
])
def test_search_matches_brute_force(make, placed):
    M = make()
    d = S.find_distinguishing(M, placed, 200)
    want = brute_distinguishing(M, placed, 200)
    assert (d.formula.index, d.b, d.c) == want


def test_gamma_codes():
    assert S.gamma_encode(0) == [1]
    assert S.gamma_encode(1) == [0, 1, 0]
    assert S.gamma_encode(4) == [0, 0, 1, 0, 1]
    with pytest.raises(ValueError):
        S.gamma_decode([0, 0, 1])


@given(st.lists(st.integers(0, 10 ** 6), max_size=8))
def test_gamma_roundtrip(values):
    bits = [b for v in values for b in S.gamma_encode(v)]
    assert S.gamma_decode(bits) == values


@given(st.lists(st.tuples(st.integers(0, 1), st.lists(st.integers(0, 1), max_size=12)),
                max_size=6), st.integers(0, 1))
def test_queue_parsing_roundtrip(items, last):
    queue = []
    for bit, body in items:
        queue += [bit] + S.frame(body)
    queue.append(last)
    payload, records = S.parse_queue(queue)
    assert payload == [b for b, _ in items] + [last]
    assert records == [body for _, body in items]


def test_parse_queue_ignores_incomplete_record():
    assert S.parse_queue([1, 1, 1, 0, 1]) == ([1], [])


def test_stages_zero():
    enc = S.encode_structure(oc.path_graph(), oc.constant_stream(1), 0, 100)
    assert enc.placement.placed == [] and enc.certificate.bounds == []
    dec = S.decode_structure(enc.structure, oc.path_graph().signature, 0, 1)
    assert (dec.queue, dec.payload, dec.placed) == ([], [], [])


def test_empty_signature_raises_at_stage_zero():
    with pytest.raises(S.TrivialityDetected) as info:
        S.encode_structure(oc.empty_structure(), oc.constant_stream(0), 3, 10 ** 5)
    assert info.value.stage == 0


def test_path_graph_trace():
    M = oc.path_graph()
    enc = S.encode_structure(M, oc.periodic_stream("", "10"), 8, 10 ** 4)
    first = enc.placement.log[0]
    # queue bit 0 is payload bit 0 = 1, so c = (0, 2) goes first, then 1
    assert (first.bit, first.b, first.c) == (1, (0, 1), (0, 2))
    assert enc.placement.placed[:3] == [0, 2, 1]
    dec = S.decode_structure(enc.structure, M.signature, 8, enc.certificate.max_bound)
    assert dec.queue == enc.queue[:8]
    assert dec.payload == [1]
    assert dec.placed == enc.placement.placed[:len(dec.placed)]


def test_decoder_needs_budget():
    M = oc.path_graph()
    enc = S.encode_structure(M, oc.constant_stream(0), 3, 10 ** 4)
    with pytest.raises(BudgetExhausted):
        S.decode_structure(enc.structure, M.signature, 3, 1)


def test_decoding_from_a_finite_table():
    M = oc.random_graph(5)
    enc = S.encode_structure(M, oc.random_stream(1), 12, 10 ** 4)
    size = len(enc.placement.placed) + enc.certificate.max_bound
    table = S.table_structure(M.signature, oc.materialize_prefix(enc.structure, size))
    dec = S.decode_structure(table, M.signature, 12, enc.certificate.max_bound)
    assert dec.queue == enc.queue[:12]
    small = S.table_structure(M.signature, oc.materialize_prefix(enc.structure, 3))
    with pytest.raises(BudgetExhausted):
        S.decode_structure(small, M.signature, 12, enc.certificate.max_bound)


@given(st.sampled_from(["path-graph", "even-predicate", "random-bits", "grid-graph"]),
       st.integers(0, 10 ** 6), st.integers(1, 14))
@settings(max_examples=15, deadline=None)
def test_encode_decode_roundtrip(kind, seed, stages):
    M = oc.structure_from_descriptor({"kind": kind, "seed": seed, "params": {}})
    payload = oc.random_stream(seed)
    enc = S.encode_structure(M, payload, stages, 10 ** 4)
    placed = enc.placement.placed
    # injective, and the least unplaced element goes in every stage
    assert len(set(placed)) == len(placed)
    assert set(range(stages)) <= set(placed)
    # pullback identity on the placed positions, against M directly
    f = np.asarray(placed)
    table = oc.materialize_prefix(enc.structure, len(placed))
    for name, arity in M.signature.relations:
        grids = np.meshgrid(*[f] * arity, indexing="ij")
        assert np.array_equal(table[name], M.holds_array(name, *grids))
    dec = S.decode_structure(enc.structure, M.signature, stages, enc.certificate.max_bound)
    assert dec.queue == enc.queue[:stages]
    assert dec.payload == payload.prefix(len(dec.payload))
    assert dec.placed == placed[:len(dec.placed)]
    # each decoded stage replays: the formula is true on the next l positions iff bit 0
    for rec, log in zip(enc.placement.log, dec.log):
        assert rec.formula_index == log["formula_index"] and rec.bit == log["bit"]


def test_certificate_bounds_suffice_individually():
    M = oc.path_graph()
    enc = S.encode_structure(M, oc.random_stream(3), 6, 10 ** 4)
    for budget in (enc.certificate.max_bound, 10 ** 4):
        dec = S.decode_structure(enc.structure, M.signature, 6, budget)
        assert dec.queue == enc.queue[:6]


def test_trivial_extend_iso_examples():
    E = oc.empty_structure()
    assert S.trivial_extend_iso(E, E, [], {}, 5).tolist() == [0, 1, 2, 3, 4]
    even = oc.even_predicate()
    table = S.trivial_extend_iso(even, even, [0, 1], {0: 0, 1: 1}, 30)
    assert table.tolist() == list(range(30))
    with pytest.raises(S.IsomorphismCheckFailed) as info:
        S.trivial_extend_iso(even, oc.odd_predicate(), [], {}, 30)
    assert info.value.atom == ("P", (0,))


def test_trivial_extend_iso_moves_fixed_points():
    M = oc.finite_marked_structure([2, 5])
    N = oc.finite_marked_structure([0, 1])
    table = S.trivial_extend_iso(M, N, [2, 5], {2: 0, 5: 1}, 12)
    assert table[2] == 0 and table[5] == 1
    assert sorted(table.tolist()) == list(range(12))
    with pytest.raises(S.IsomorphismCheckFailed):
        S.trivial_extend_iso(M, N, [2, 5], {2: 0, 5: 3}, 12)


def test_trivial_extend_iso_rejects_bad_maps():
    M = oc.finite_marked_structure([1])
    with pytest.raises(ValueError):
        S.trivial_extend_iso(M, M, [1, 2], {1: 1, 2: 1}, 5)
    with pytest.raises(ValueError):
        S.trivial_extend_iso(M, M, [1], {}, 5)


def test_check_isomorphism_ordering():
    # first failing atom: smallest largest argument, then relation, then lex
    M = oc.finite_marked_structure([0], with_edges=True)
    N = oc.finite_marked_structure([0], with_edges=False)
    with pytest.raises(ValueError):
        S.check_isomorphism(M, N, lambda a: np.asarray(a), 5)
    P = oc.path_graph()
    shifted = S.pullback(P, lambda a: np.asarray(a) + 1)
    assert S.check_isomorphism(P, shifted, lambda a: np.asarray(a), 5) is None
    assert S.check_isomorphism(P, oc.complete_graph(), lambda a: np.asarray(a), 5) == ("R", (0, 2))
