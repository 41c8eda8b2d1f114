import json

import pytest
from hypothesis import given, settings, strategies as st

from graphable import forcing as ks
from graphable import oracles as oc

zeros, ones = oc.constant_stream(0), oc.constant_stream(1)


def full_labels(cond):
    """Every string up to the depth with its label, bot included."""
    out = {"": cond.label("")} if cond.depth >= 0 else {}
    for n in range(1, cond.depth + 1):
        for k in range(2 ** n):
            s = format(k, f"0{n}b")
            out[s] = cond.label(s)
    return out


def walk(labels, path_bits):
    """Read labels down a path given as a list of bits."""
    out, node = [], ""
    for n in range(len(path_bits) + 1):
        node = "".join(map(str, path_bits[:n]))
        if node in labels and labels[node] != ks.BOT:
            out.append(str(labels[node]))
    return "".join(out)


def test_make_condition_examples():
    p0 = ks.make_condition({}, [])
    assert p0.depth == -1 and p0.is_empty
    p = ks.make_condition({"": 1, "0": 0, "1": "bot"})
    assert p.depth == 1 and full_labels(p) == {"": 1, "0": 0, "1": ks.BOT}
    with pytest.raises(ks.DomainNotFull):
        ks.make_condition({"0": 0})
    with pytest.raises(ValueError):
        ks.make_condition({"": 2})


def test_condition_json_roundtrip():
    p = ks.make_condition({"": 1, "0": 0, "1": "bot", "00": 1, "01": "bot", "10": "bot",
                           "11": 0}, [zeros])
    again = ks.condition_from_json(json.loads(json.dumps(p.to_json())))
    assert full_labels(again) == full_labels(p)
    assert again.forbidden[0].prefix(10) == zeros.prefix(10)
    assert ks.condition_from_json({"depth": "empty", "labels": {}}).depth == -1


def test_extends_examples():
    p0 = ks.empty_condition()
    assert ks.extends(p0, p0)
    q = ks.KsCondition(1, {"0": 1}, (zeros,))
    assert ks.extends(q, p0)
    p = ks.KsCondition(-1, {}, (zeros,))
    bad = ks.KsCondition(2, {"00": 1}, (zeros,))
    assert not ks.extends(bad, p)
    ok = ks.KsCondition(2, {"01": 1}, (zeros,))
    assert ks.extends(ok, p)


def test_extends_clauses():
    p = ks.make_condition({"": "bot", "0": 1, "1": "bot"}, [zeros])
    # relabelling a bot string breaks clause 1
    assert not ks.extends(ks.KsCondition(1, {"0": 1, "1": 0}, (zeros,)), p)
    # dropping the forbidden path breaks clause 2
    assert not ks.extends(ks.KsCondition(1, {"0": 1}, ()), p)
    # an equal path given as a different object still counts
    assert ks.extends(ks.KsCondition(1, {"0": 1}, (oc.bits_from_string("000"),)), p)
    # shallower conditions never extend deeper ones
    assert not ks.extends(ks.empty_condition(), p)


def test_eval_labels_examples():
    g = ks.make_condition({"": 1, "0": 0, "1": "bot"})
    assert ks.eval_labels(g, zeros, 10) == "10"
    assert ks.eval_labels(ks.empty_condition(), zeros, 10) == ""
    only_ones = ks.KsCondition(2, {"1": 1, "10": 0, "11": 1})
    assert ks.eval_labels(only_ones, zeros, 5) == ""
    assert ks.eval_labels(only_ones, ones, 5) == "11"
    assert ks.eval_labels(only_ones, ones, 1) == "1"


def test_encode_bit_along_examples():
    q = ks.encode_bit_along(ks.empty_condition(), zeros, 1, 100)
    assert full_labels(q) == {"": ks.BOT, "0": 1, "1": ks.BOT}
    p = ks.KsCondition(-1, {}, (zeros,))
    q = ks.encode_bit_along(p, oc.bits_from_string("010"), 1, 100)
    assert q.depth == 2 and dict(q.marks) == {"01": 1}
    assert ks.extends(q, p)


def test_encode_bit_along_forbidden_path():
    x = oc.random_stream(8)
    for path in (x, oc.random_stream(8)):
        p = ks.KsCondition(-1, {}, (path,))
        for budget in (1, 100, 10 ** 4):
            with pytest.raises(ks.DiffBudgetExhausted):
                ks.encode_bit_along(p, x, 0, budget)
    # the difference sits past the budget
    late = oc.bits_from_string("0" * 50 + "1")
    with pytest.raises(ks.DiffBudgetExhausted):
        ks.encode_bit_along(ks.KsCondition(-1, {}, (zeros,)), late, 0, 50)
    assert ks.encode_bit_along(ks.KsCondition(-1, {}, (zeros,)), late, 0, 51).depth == 51


def test_first_difference():
    assert ks.first_difference(zeros, ones, 10) == 0
    assert ks.first_difference(zeros, oc.bits_from_string("0" * 300 + "1"), 1000) == 300
    assert ks.first_difference(zeros, zeros, 1000) is None


def test_build_generic_examples():
    res = ks.build_generic(ks.empty_condition(), [ks.identity_selector], ones,
                           oc.bits_from_string("101"), 3)
    assert ks.eval_labels(res, ones, res.depth) == "101"
    empty = ks.build_generic(ks.empty_condition(), [ks.identity_selector], ones, ones, 0)
    assert ks.eval_labels(empty, ones, 100) == ""


@pytest.mark.parametrize("offending", [0, 1, 4])
def test_contract_violation_reports_round(offending):
    sels = [ks.identity_selector] * offending + [ks.path_labelling_selector(zeros)]
    with pytest.raises(ks.SelectorContractViolation) as info:
        ks.build_generic(ks.empty_condition(), sels, zeros, ones, offending + 2)
    assert info.value.round == offending


def test_non_extension_is_a_violation():
    shrink = ks.DenseSelector("shrink", lambda p, k: ks.empty_condition())
    with pytest.raises(ks.SelectorContractViolation) as info:
        ks.build_generic(ks.empty_condition(), [ks.identity_selector, shrink], zeros, ones, 3)
    assert info.value.round == 1


def test_decide_overrides_payload():
    flip = ks.DenseSelector("flip", lambda p, k: p, decide=lambda q, k: k % 2)
    res = ks.build_generic(ks.empty_condition(), [flip], ones, zeros, 6)
    assert ks.eval_labels(res, ones, res.depth) == "010101"


@given(st.integers(0, 10 ** 6), st.text("01", min_size=1, max_size=24))
@settings(max_examples=30, deadline=None)
def test_generic_labels_spell_the_payload(seed, bits):
    x = oc.random_stream(seed)
    sels = [ks.identity_selector, ks.label_elsewhere_selector(x, seed), ks.add_forbidden_selector(seed)]
    res = ks.build_generic(ks.empty_condition(), sels, x, oc.bits_from_string(bits), len(bits))
    assert ks.eval_labels(res, x, res.depth) == bits
    # same answer from an explicit walk over the full label table, when it is small enough to list
    if res.depth <= 16:
        assert walk(full_labels(res.chain[-1]), x.prefix(res.depth)) == bits
    for a, b in zip(res.chain, res.chain[1:]):
        assert ks.extends(b, a)


def test_condition_family_laws():
    fam = ks.condition_family(3, 30)
    for p in fam:
        assert ks.extends(p, p)
    for r in fam:
        for q in fam:
            if not ks.extends(r, q):
                continue
            for p in fam:
                if ks.extends(q, p):
                    assert ks.extends(r, p)


def test_label_elsewhere_avoids_paths():
    x = oc.random_stream(1)
    p = ks.KsCondition(-1, {}, (oc.random_stream(2),))
    sel = ks.label_elsewhere_selector(x, 5)
    for k in range(10):
        q = sel.extend(p, k)
        assert ks.extends(q, p)
        assert ks.eval_labels(q, x, q.depth) == ks.eval_labels(p, x, p.depth)
        p = q
