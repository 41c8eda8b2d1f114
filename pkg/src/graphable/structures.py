"""Coding bits into isomorphic copies of countable relational structures.

The copy ``N`` of ``M`` is built by placing elements of ``M`` on the numbers
``0, 1, 2, ...`` in stages.  A stage looks for the least quantifier-free
formula ``phi(x, y)`` over the elements already placed that separates two
tuples ``b`` and ``c`` of unplaced elements, places ``b`` to code a 0 or ``c``
to code a 1, and then places the least element not placed so far.

Searches are bounded.  With budget ``B`` a formula is only tried if its
canonical index is below ``B``, and a formula with ``l`` free variables only
looks at tuples drawn from the first ``floor(B ** (1/l))`` candidates, so at
most ``B`` tuples per formula.  The encoder exports, per stage, the smallest
budget at which the decoder re-derives the same formula from ``N``.

The bits coded come from a queue: payload bit 0, then alternately the framed
placement record of the previous stage and the next payload bit.  A record
lists, for each element of the chosen tuple, its rank among the elements not
yet placed (Elias gamma codes), framed as ``1^k 0`` followed by ``k`` bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import BudgetExhausted, GraphableError
from .oracles import BitStream, Signature, StructureOracle
from .qf import Atom, FormulaEnumeration, IndexedFormula, Param, Var, atoms_of, evaluate, mentions_var

__all__ = [
    "TrivialityDetected", "UnstableEncoding", "IsomorphismCheckFailed",
    "Distinction", "StageRecord", "PlacementState", "EncodingCertificate",
    "StructureEncoding", "StructureDecoding",
    "find_distinguishing", "is_trivial_within", "encode_structure", "decode_structure",
    "trivial_extend_iso", "check_isomorphism", "pullback", "table_structure",
    "gamma_encode", "gamma_decode", "frame", "parse_queue",
]


class TrivialityDetected(GraphableError):
    """No separating formula was found within budget at some stage."""

    def __init__(self, stage: int, message: str):
        super().__init__(message)
        self.stage = stage


class UnstableEncoding(BudgetExhausted):
    """The decoder would see an earlier separating formula than the encoder used.

    Means the encoder's search window missed a separating formula; a larger
    budget fixes it.
    """


class IsomorphismCheckFailed(GraphableError):
    def __init__(self, atom: tuple[str, tuple[int, ...]]):
        name, args = atom
        super().__init__(f"{name}{args} differs between the structures")
        self.atom = atom


# ---------------------------------------------------------------------------
# small numeric helpers

def _iroot(b: int, l: int) -> int:
    """Largest ``m`` with ``m ** l <= b``."""
    if b <= 0:
        return 0
    m = int(round(b ** (1.0 / l)))
    while m ** l > b:
        m -= 1
    while (m + 1) ** l <= b:
        m += 1
    return m


def _nth_missing(sorted_taken: np.ndarray, m) -> np.ndarray:
    """The ``m``-th (0-based) natural number not in ``sorted_taken``."""
    m = np.asarray(m, dtype=np.int64)
    if len(sorted_taken) == 0:
        return m.copy()
    shifted = sorted_taken - np.arange(len(sorted_taken), dtype=np.int64)
    return m + np.searchsorted(shifted, m, side="right")


@lru_cache(maxsize=256)
def _index_tuples(l: int, lo: int, hi: int) -> np.ndarray:
    """Tuples of ``l`` distinct indices below ``hi`` whose largest entry is at
    least ``lo``, ordered by largest entry, then lexicographically."""
    grid = np.indices((hi,) * l).reshape(l, -1).T
    keep = grid.max(axis=1) >= lo
    for i in range(l):
        for j in range(i + 1, l):
            keep &= grid[:, i] != grid[:, j]
    grid = grid[keep]
    order = np.lexsort(tuple(grid[:, i] for i in reversed(range(l))) + (grid.max(axis=1),))
    out = grid[order]
    out.flags.writeable = False   # shared through the cache
    return out


def _first_values(test: Callable[[np.ndarray], np.ndarray], cands: np.ndarray, l: int):
    """First tuple (over ``cands``) where ``test`` is true and first where it is
    false, in (largest index, lex) order.  Each entry is ``(tuple, need)`` where
    ``need`` is how many candidates the tuple uses, or ``None``."""
    m = len(cands)
    found = {True: None, False: None}
    lo, hi = 0, min(m, max(l, 8))
    while lo < m:
        idx = _index_tuples(l, lo, hi)
        if len(idx):
            values = test(cands[idx])
            for want in (True, False):
                if found[want] is None:
                    hits = np.flatnonzero(values == want)
                    if hits.size:
                        row = idx[hits[0]]
                        found[want] = (tuple(int(v) for v in cands[row]), int(row.max()) + 1)
        if found[True] is not None and found[False] is not None:
            break
        lo, hi = hi, min(m, 2 * hi)
    return found[True], found[False]


# ---------------------------------------------------------------------------
# the separating-formula search

@dataclass(frozen=True)
class Distinction:
    """``formula`` holds of ``b`` and fails of ``c``; both avoid the parameters."""
    formula: IndexedFormula
    b: tuple[int, ...]
    c: tuple[int, ...]
    need: int  # candidates inspected to see both tuples

    @property
    def free_slots(self) -> int:
        return self.formula.free_slots

    @property
    def bound(self) -> int:
        """Smallest budget at which the same search finds this formula."""
        return max(self.need ** self.free_slots, self.formula.index + 1)


_enumerations: dict[Signature, FormulaEnumeration] = {}


def _enumeration(signature: Signature) -> FormulaEnumeration:
    if signature not in _enumerations:
        _enumerations[signature] = FormulaEnumeration(signature)
    return _enumerations[signature]


def _pattern(atom: Atom) -> tuple:
    """The atom with variables renamed in order of first occurrence."""
    names: dict[int, int] = {}
    out = []
    for t in atom.terms:
        if isinstance(t, Var):
            names.setdefault(t.index, len(names) + 1)
            out.append(Var(names[t.index]))
        else:
            out.append(t)
    return Atom(atom.relation, tuple(out)), len(names)


def _search(structure: StructureOracle, params: np.ndarray,
            candidates: Callable[[int], np.ndarray], budget: int,
            precheck_after: int = 256) -> Distinction | None:
    signature = structure.signature
    if budget < 1 or not signature.relations:
        return None
    enum = _enumeration(signature)
    varies: dict[Atom, bool] = {}

    def atom_varies(atom):
        pat, l = _pattern(atom)
        if pat not in varies:
            m = _iroot(budget, l)
            if m < l:
                varies[pat] = False
            else:
                t, f = _first_values(lambda rows: evaluate(pat, structure, params, rows),
                                     candidates(m), l)
                varies[pat] = t is not None and f is not None
        return varies[pat]

    def any_pattern_varies():
        p = len(params)
        for name, arity in signature.relations:
            for choice in np.ndindex(*(p + arity,) * arity):
                terms = tuple(Param(c) if c < p else Var(c - p + 1) for c in choice)
                atom = Atom(name, terms)
                if mentions_var(atom) and _pattern(atom)[0] == atom and atom_varies(atom):
                    return True
        return False

    tried = 0
    for j in range(budget):
        item = enum[j]
        l = item.free_slots
        if l == 0 or item.param_count > len(params):
            continue
        m = _iroot(budget, l)
        if m < l:
            continue
        atoms = [a for a in atoms_of(item.formula) if mentions_var(a)]
        if not any(atom_varies(a) for a in atoms):
            tried += 1
            if tried == precheck_after and not any_pattern_varies():
                return None
            continue
        t, f = _first_values(lambda rows: evaluate(item.formula, structure, params, rows),
                             candidates(m), l)
        if t is not None and f is not None:
            return Distinction(item, t[0], f[0], max(t[1], f[1]))
        tried += 1
        if tried == precheck_after and not any_pattern_varies():
            return None
    return None


def find_distinguishing(structure: StructureOracle, placed, budget: int) -> Distinction | None:
    """Least formula separating two tuples of unplaced elements, within budget.

    ``placed`` is a :class:`PlacementState` or a sequence of elements (the
    parameters, in order).  ``None`` means nothing was found: either the
    structure is trivial over the placed set or the budget is too small.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    elements = placed.placed if isinstance(placed, PlacementState) else list(placed)
    params = np.asarray(elements, dtype=np.int64)
    taken = np.sort(params)
    return _search(structure, params, lambda m: _nth_missing(taken, np.arange(m)), budget)


def is_trivial_within(structure: StructureOracle, fixed: Sequence[int], budget: int) -> Distinction | None:
    """Witness that ``structure`` is not trivial over ``fixed``, if one is found."""
    return find_distinguishing(structure, sorted(set(int(v) for v in fixed)), budget)


# ---------------------------------------------------------------------------
# queue framing

def gamma_encode(v: int) -> list[int]:
    """Elias gamma code of ``v + 1`` (so 0 is encodable)."""
    b = bin(v + 1)[2:]
    return [0] * (len(b) - 1) + [int(ch) for ch in b]


def gamma_decode(bits: Sequence[int]) -> list[int]:
    out, i = [], 0
    while i < len(bits):
        z = 0
        while i < len(bits) and bits[i] == 0:
            z += 1
            i += 1
        chunk = bits[i:i + z + 1]
        if len(chunk) != z + 1:
            raise ValueError("truncated gamma code")
        out.append(int("".join(map(str, chunk)), 2) - 1)
        i += z + 1
    return out


def frame(bits: Sequence[int]) -> list[int]:
    return [1] * len(bits) + [0] + list(bits)


def parse_queue(bits: Sequence[int]) -> tuple[list[int], list[list[int]]]:
    """Split queue bits into payload bits and complete record bodies."""
    payload: list[int] = []
    records: list[list[int]] = []
    i, expect_payload = 0, True
    while i < len(bits):
        if expect_payload:
            payload.append(int(bits[i]))
            i += 1
        else:
            k = 0
            while i + k < len(bits) and bits[i + k] == 1:
                k += 1
            end = i + k + 1 + k
            if end > len(bits):
                break
            records.append([int(b) for b in bits[i + k + 1:end]])
            i = end
        expect_payload = not expect_payload
    return payload, records


# ---------------------------------------------------------------------------
# encoder state

@dataclass
class StageRecord:
    stage: int
    start: int               # first position filled this stage
    formula_index: int
    formula: str
    free_slots: int
    b: tuple[int, ...]
    c: tuple[int, ...]
    bit: int
    ranks: tuple[int, ...]
    surjectivity: int        # least unplaced element, placed last
    need: int

    def to_json(self) -> dict:
        return {"stage": self.stage, "start": self.start, "formula_index": self.formula_index,
                "formula": self.formula, "free_slots": self.free_slots,
                "b": list(self.b), "c": list(self.c), "bit": self.bit,
                "ranks": list(self.ranks), "surjectivity": self.surjectivity,
                "need": self.need}


@dataclass
class PlacementState:
    """``placed[n]`` is the element of ``M`` sitting on position ``n``."""
    placed: list[int] = field(default_factory=list)
    log: list[StageRecord] = field(default_factory=list)

    def __post_init__(self):
        self._taken = set(self.placed)
        if len(self._taken) != len(self.placed):
            raise ValueError("placement is not injective")

    def place(self, element: int) -> int:
        if element in self._taken:
            raise ValueError(f"{element} is already placed")
        self._taken.add(element)
        self.placed.append(element)
        return len(self.placed) - 1

    def rank(self, element: int) -> int:
        """Position of ``element`` among the unplaced elements, in increasing order."""
        return element - sum(1 for p in self._taken if p < element)

    def least_unplaced(self) -> int:
        e = 0
        while e in self._taken:
            e += 1
        return e

    def sorted_placed(self) -> np.ndarray:
        return np.sort(np.asarray(self.placed, dtype=np.int64))

    def total(self) -> "Callable[[np.ndarray], np.ndarray]":
        """Extension of the placement to a bijection of the naturals: positions
        past the end receive the unplaced elements in increasing order."""
        placed = np.asarray(self.placed, dtype=np.int64)
        taken = np.sort(placed)
        size = len(placed)

        def f(pos):
            pos = np.asarray(pos, dtype=np.int64)
            out = np.empty(pos.shape, dtype=np.int64)
            inside = pos < size
            out[inside] = placed[pos[inside]]
            out[~inside] = _nth_missing(taken, pos[~inside] - size)
            return out
        return f

    def to_json(self) -> dict:
        return {"placed": list(self.placed), "stages": [r.to_json() for r in self.log]}


@dataclass
class EncodingCertificate:
    """Per-stage budgets sufficient for the decoder."""
    bounds: list[int]

    @property
    def max_bound(self) -> int:
        return max(self.bounds, default=1)

    def to_json(self) -> dict:
        return {"bounds": list(self.bounds), "max_bound": self.max_bound}


def pullback(structure: StructureOracle, f: Callable[[np.ndarray], np.ndarray],
             descriptor: dict | None = None) -> StructureOracle:
    """Structure on the naturals with ``R(n...)`` iff ``R(f(n)...)`` in ``structure``."""
    rels = {name: (lambda name: lambda *args: structure.holds_array(name, *[f(a) for a in args]))(name)
            for name in structure.signature.names}
    return StructureOracle(structure.signature, rels, descriptor)


def table_structure(signature: Signature, tables: dict) -> StructureOracle:
    """Structure known only through finite tables; queries outside raise
    :class:`BudgetExhausted`."""
    arrays = {name: np.asarray(tables[name], dtype=bool) for name in signature.names}

    def make(name):
        table = arrays[name]

        def rel(*args):
            size = table.shape[0] if table.ndim else 0
            if any(a.size and int(a.max()) >= size for a in args):
                raise BudgetExhausted(f"query outside the {size}-element table for {name}")
            return table[tuple(args)]
        return rel

    return StructureOracle(signature, {name: make(name) for name in signature.names},
                           {"kind": "table", "seed": 0, "params": {}})


@dataclass
class StructureEncoding:
    structure: StructureOracle      # the coded copy N
    placement: PlacementState       # f: positions -> elements of M
    certificate: EncodingCertificate
    queue: list[int]                # every bit enqueued, coded or not
    stages: int

    @property
    def coded_bits(self) -> list[int]:
        return self.queue[:self.stages]


@dataclass
class StructureDecoding:
    queue: list[int]
    payload: list[int]
    placed: list[int]               # f on the positions whose records were decoded
    log: list[dict]

    def to_json(self) -> dict:
        return {"queue": self.queue, "payload": self.payload, "f": self.placed, "stages": self.log}


def encode_structure(structure: StructureOracle, payload: BitStream, stages: int,
                     budget: int) -> StructureEncoding:
    """Run ``stages`` stages of the coding construction on ``structure``."""
    if stages < 0:
        raise ValueError("stages must be non-negative")
    state = PlacementState()
    queue = [payload(0)]
    for s in range(stages):
        params = np.asarray(state.placed, dtype=np.int64)
        taken = np.sort(params)
        dist = _search(structure, params, lambda m: _nth_missing(taken, np.arange(m)), budget)
        if dist is None:
            raise TrivialityDetected(
                s, f"no separating formula over {len(params)} placed elements within budget {budget}")
        bit = queue[s]
        chosen = dist.b if bit == 0 else dist.c
        start = len(state.placed)
        ranks = []
        for e in chosen:
            ranks.append(state.rank(e))
            state.place(e)
        d = state.least_unplaced()
        state.place(d)
        state.log.append(StageRecord(s, start, dist.formula.index, str(dist.formula),
                                     dist.free_slots, dist.b, dist.c, bit, tuple(ranks), d,
                                     dist.need))
        body = [b for r in ranks for b in gamma_encode(r)]
        queue.extend(frame(body))
        queue.append(payload(s + 1))

    copy = pullback(structure, state.total(),
                    {"kind": "coded-copy", "seed": 0, "params": {"stages": stages}})
    bounds = []
    for rec in state.log:
        params = np.arange(rec.start, dtype=np.int64)
        cands = (lambda start: lambda m: start + np.arange(m, dtype=np.int64))(rec.start)
        item = _enumeration(structure.signature)[rec.formula_index]
        t, f = _first_values(lambda rows: evaluate(item.formula, copy, params, rows),
                             cands(_iroot(budget, rec.free_slots)), rec.free_slots)
        if t is None or f is None:
            raise UnstableEncoding(f"stage {rec.stage}: separating tuples not visible in the copy "
                                   f"within budget {budget}")
        seen = _search(copy, params, cands, budget)
        if seen is None or seen.formula.index != rec.formula_index:
            raise UnstableEncoding(f"stage {rec.stage}: the copy shows formula "
                                   f"{None if seen is None else seen.formula.index} before "
                                   f"{rec.formula_index} within budget {budget}")
        bounds.append(Distinction(item, t[0], f[0], max(t[1], f[1])).bound)
    return StructureEncoding(copy, state, EncodingCertificate(bounds), queue, stages)


def decode_structure(structure: StructureOracle, signature: Signature, stages: int,
                     budget: int) -> StructureDecoding:
    """Recover the coded queue bits, the payload and the placement from a copy.

    Raises :class:`BudgetExhausted` if some stage's formula is not found.
    """
    if structure.signature != signature:
        raise ValueError("structure does not match the signature")
    start = 0
    queue: list[int] = []
    log: list[dict] = []
    for s in range(stages):
        params = np.arange(start, dtype=np.int64)
        cands = (lambda start: lambda m: start + np.arange(m, dtype=np.int64))(start)
        dist = _search(structure, params, cands, budget)
        if dist is None:
            raise BudgetExhausted(f"stage {s}: no separating formula within budget {budget}")
        l = dist.free_slots
        nxt = np.arange(start, start + l, dtype=np.int64)
        holds = bool(evaluate(dist.formula.formula, structure, params, nxt)[0])
        bit = 0 if holds else 1
        queue.append(bit)
        log.append({"stage": s, "start": start, "formula_index": dist.formula.index,
                    "formula": str(dist.formula), "free_slots": l, "bit": bit})
        start += l + 1

    payload, records = parse_queue(queue)
    placed = PlacementState()
    for rec, body in zip(log, records):
        ranks = gamma_decode(body)
        if len(ranks) != rec["free_slots"]:
            raise GraphableError(f"stage {rec['stage']}: record lists {len(ranks)} elements, "
                                 f"formula has {rec['free_slots']} free variables")
        for r in ranks:
            placed.place(int(_nth_missing(placed.sorted_placed(), r)))
        placed.place(placed.least_unplaced())
    return StructureDecoding(queue, payload, placed.placed, log)


# ---------------------------------------------------------------------------
# trivial structures

def _atoms_in_order(signature: Signature, prefix: int):
    """Every atom with arguments below ``prefix``: by largest argument, then
    relation, then arguments lexicographically."""
    for top in range(prefix):
        for name, arity in signature.relations:
            idx = _index_tuples_with_repeats(arity, top)
            yield name, idx


def _index_tuples_with_repeats(arity: int, top: int) -> np.ndarray:
    grid = np.indices((top + 1,) * arity).reshape(arity, -1).T
    return grid[grid.max(axis=1) == top]


def check_isomorphism(m: StructureOracle, n: StructureOracle,
                      g: Callable[[np.ndarray], np.ndarray], prefix: int):
    """First atom with arguments below ``prefix`` on which ``g`` fails to be
    an isomorphism from ``m`` to ``n``, or ``None``."""
    if m.signature != n.signature:
        raise ValueError("signatures differ")
    for name, tuples in _atoms_in_order(m.signature, prefix):
        cols = [tuples[:, i] for i in range(tuples.shape[1])]
        left = m.holds_array(name, *cols)
        right = n.holds_array(name, *[g(c) for c in cols])
        bad = np.flatnonzero(left != right)
        if bad.size:
            return name, tuple(int(v) for v in tuples[bad[0]])
    return None


def trivial_extend_iso(m: StructureOracle, n: StructureOracle, fixed: Sequence[int],
                       f_on_fixed: dict, prefix: int) -> np.ndarray:
    """Extend a finite injection to a bijection and check it is an isomorphism.

    Elements outside ``fixed`` are matched in increasing order with the numbers
    outside the image of ``f_on_fixed``.  Returns the extension on
    ``0 .. prefix - 1``; raises :class:`IsomorphismCheckFailed` with the first
    failing atom if the extension is not an isomorphism on that prefix.
    """
    fixed = sorted(set(int(v) for v in fixed))
    if set(f_on_fixed) != set(fixed):
        raise ValueError("f_on_fixed must be defined exactly on the fixed set")
    images = [int(f_on_fixed[a]) for a in fixed]
    if len(set(images)) != len(images):
        raise ValueError("f_on_fixed is not injective")
    dom = np.asarray(fixed, dtype=np.int64)
    img = np.asarray(images, dtype=np.int64)
    img_sorted = np.sort(img)

    def g(a):
        a = np.asarray(a, dtype=np.int64)
        out = np.empty(a.shape, dtype=np.int64)
        pos = np.searchsorted(dom, a)
        hit = (pos < len(dom)) & (dom[np.minimum(pos, max(len(dom) - 1, 0))] == a) if len(dom) else \
            np.zeros(a.shape, dtype=bool)
        out[hit] = img[pos[hit]]
        rank = a[~hit] - np.searchsorted(dom, a[~hit])
        out[~hit] = _nth_missing(img_sorted, rank)
        return out

    bad = check_isomorphism(m, n, g, prefix)
    if bad is not None:
        raise IsomorphismCheckFailed(bad)
    return g(np.arange(prefix))
