import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphable import oracles as oc
from graphable.linear_orders import order_axiom_violations

naturals = st.integers(min_value=0, max_value=10 ** 6)


def brute_pair_table(size):
    """Cantor pairing by walking the diagonals, no formula involved."""
    table, k = {}, 0
    for s in range(2 * size):
        for n in range(s + 1):
            table[(s - n, n)] = k
            k += 1
    return table


def test_pair_matches_diagonal_walk():
    table = brute_pair_table(40)
    for (m, n), k in table.items():
        if m < 40 and n < 40:
            assert oc.pair(m, n) == k
            assert oc.unpair(k) == (m, n)


def test_pair_frozen_values():
    assert [oc.pair(0, 0), oc.pair(1, 0), oc.pair(0, 1), oc.pair(2, 3)] == [0, 1, 2, 18]


@given(naturals, naturals)
def test_unpair_inverts_pair(m, n):
    assert oc.unpair(oc.pair(m, n)) == (m, n)


@given(st.integers(min_value=0, max_value=10 ** 12))
def test_pair_inverts_unpair(k):
    assert oc.pair(*oc.unpair(k)) == k


def test_pair_array_agrees_with_scalar():
    m, n = np.meshgrid(np.arange(30), np.arange(30), indexing="ij")
    want = np.vectorize(oc.pair)(m, n)
    assert np.array_equal(oc.pair_array(m, n), want)


@given(st.integers(0, 2 ** 32), st.lists(st.integers(0, 10 ** 9), min_size=1, max_size=3))
def test_hash_bits_agrees_with_scalar(seed, values):
    arrays = [np.asarray([v]) for v in values]
    assert int(oc.hash_bits(seed, *arrays)[0]) == oc.hash_bit(seed, *values)


def test_random_stream_is_balanced():
    bits = oc.materialize_prefix(oc.random_stream(3), 4000)
    assert 0.45 < bits.mean() < 0.55


@given(st.integers(0, 1000), st.integers(0, 1000))
@settings(max_examples=30)
def test_join_projections(sa, sb):
    a, b = oc.random_stream(sa), oc.random_stream(sb)
    j = oc.join(a, b)
    for n in range(200):
        assert j(2 * n) == a(n)
        assert j(2 * n + 1) == b(n)


def test_bit_strings():
    s = oc.bits_from_string("1101")
    assert oc.bits_to_string(s, 7) == "1101000"
    assert oc.bits_to_string(oc.bits_from_string("10", "cycle"), 5) == "10101"
    assert oc.bits_to_string(oc.periodic_stream("0", "11"), 5) == "01111"
    with pytest.raises(ValueError):
        oc.bits_from_string("102")


def test_order_code_examples():
    code = oc.order_code(oc.omega_order())
    assert code(oc.pair(2, 3)) == 1
    assert code(oc.pair(3, 2)) == 0
    assert oc.decode_order(code).leq(0, 1)


@pytest.mark.parametrize("kind", oc.ORDER_KINDS)
def test_order_code_roundtrip(kind):
    order = oc.order_from_descriptor({"kind": kind, "seed": 5, "params": {}})
    back = oc.decode_order(oc.order_code(order))
    assert np.array_equal(oc.materialize_prefix(back, 50), oc.materialize_prefix(order, 50))


@pytest.mark.parametrize("kind", oc.ORDER_KINDS)
def test_order_generators_are_linear_orders(kind):
    order = oc.order_from_descriptor({"kind": kind, "seed": 11, "params": {}})
    assert order_axiom_violations(order, 25) == []


def test_parity_order_puts_evens_first():
    order = oc.parity_order()
    assert order.sorted(range(8)) == [0, 2, 4, 6, 1, 3, 5, 7]
    assert oc.reverse_parity_order().sorted(range(6)) == [1, 3, 5, 0, 2, 4]


def test_all_ones_code_is_not_an_order():
    order = oc.decode_order(oc.constant_stream(1))
    assert order.leq(0, 1) and order.leq(1, 0)
    assert order_axiom_violations(order, 2)[0]["axiom"] == "antisymmetric"


def test_materialize_examples():
    assert oc.materialize_prefix(oc.constant_stream(0), 4).tolist() == [0, 0, 0, 0]
    assert oc.materialize_prefix(oc.omega_order(), 2).tolist() == [[True, True], [False, True]]
    table = oc.materialize_prefix(oc.path_graph(), 3)["R"]
    edges = {frozenset(map(int, e)) for e in np.argwhere(table)}
    assert edges == {frozenset({0, 1}), frozenset({1, 2})}


def test_materialize_is_deterministic():
    for obj in (oc.random_stream(1), oc.block_shuffle_order(2), oc.random_graph(3)):
        a, b = oc.materialize_prefix(obj, 15), oc.materialize_prefix(obj, 15)
        if isinstance(a, dict):
            assert all(np.array_equal(a[k], b[k]) for k in a)
        else:
            assert np.array_equal(a, b)


def test_grid_graph_degrees():
    # corner (0,0) has 2 neighbours, an interior point has 4
    table = oc.materialize_prefix(oc.grid_graph(), 60)["R"]
    assert table.sum(axis=1)[oc.pair(0, 0)] == 2
    assert table.sum(axis=1)[oc.pair(2, 2)] == 4
    assert np.array_equal(table, table.T)


def test_structure_oracle_arity_checks():
    g = oc.path_graph()
    assert g.holds("R", (3, 4)) and not g.holds("R", (3, 5))
    with pytest.raises(ValueError):
        g.holds("R", (1,))
    with pytest.raises(ValueError):
        oc.Signature((("R", 2), ("R", 1)))


@pytest.mark.parametrize("desc", [
    {"kind": "constant", "seed": 0, "params": {"bit": 1}},
    {"kind": "periodic", "seed": 0, "params": {"prefix": "1", "cycle": "01"}},
    {"kind": "random", "seed": 9, "params": {}},
])
def test_stream_descriptor_roundtrip(desc):
    s = oc.stream_from_descriptor(json.loads(json.dumps(desc)))
    again = oc.stream_from_descriptor(s.descriptor)
    assert oc.bits_to_string(s, 50) == oc.bits_to_string(again, 50)


@pytest.mark.parametrize("kind", oc.STRUCTURE_KINDS)
def test_structure_descriptor_roundtrip(kind):
    params = {"marked": [1, 4]} if kind == "finite-marked" else {}
    st_ = oc.structure_from_descriptor({"kind": kind, "seed": 2, "params": params})
    again = oc.structure_from_descriptor(st_.descriptor)
    a, b = oc.materialize_prefix(st_, 10), oc.materialize_prefix(again, 10)
    assert a.keys() == b.keys()
    assert all(np.array_equal(a[k], b[k]) for k in a)


def test_structure_descriptor_signature_mismatch():
    with pytest.raises(ValueError):
        oc.structure_from_descriptor({"kind": "path-graph", "signature": [{"name": "P", "arity": 1}]})
