"""Quantifier-free formulas over a finite relational signature.

A formula mentions parameters ``x0, x1, ...`` (elements fixed in advance)
and free variables ``y1, y2, ...``.  Formulas are enumerated in a fixed
canonical order: by weight, then by number of free-variable slots, then by a
structural key.  The weight of ``x_i`` is ``i + 1``, of ``y_j`` is ``j``, and
every connective, equality or relation symbol adds 1, so each weight class is
finite and the enumeration is a bijection with the naturals.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterator, Sequence, Union

import numpy as np

from .oracles import Signature, StructureOracle

__all__ = [
    "Param", "Var", "Atom", "Eq", "Not", "And", "Or", "Formula",
    "FormulaEnumeration", "evaluate", "render", "atoms_of", "mentions_var",
]


@dataclass(frozen=True, order=True)
class Param:
    index: int

    @property
    def weight(self):
        return self.index + 1

    def key(self):
        return (0, self.index)

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True, order=True)
class Var:
    index: int  # 1-based

    @property
    def weight(self):
        return self.index

    def key(self):
        return (1, self.index)

    def __str__(self):
        return f"y{self.index}"


Term = Union[Param, Var]


@dataclass(frozen=True)
class Atom:
    relation: str
    terms: tuple

    def __str__(self):
        return f"{self.relation}({', '.join(map(str, self.terms))})"


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __str__(self):
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self):
        return f"~{_wrap(self.body)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self):
        return f"{_wrap(self.left)} | {_wrap(self.right)}"


Formula = Union[Atom, Eq, Not, And, Or]


def _wrap(f):
    return f"({f})" if isinstance(f, (And, Or)) else str(f)


def render(f: Formula) -> str:
    return str(f)


def _terms(f) -> Iterator[Term]:
    if isinstance(f, Atom):
        yield from f.terms
    elif isinstance(f, Eq):
        yield f.left
        yield f.right
    elif isinstance(f, Not):
        yield from _terms(f.body)
    else:
        yield from _terms(f.left)
        yield from _terms(f.right)


def free_slots(f: Formula) -> int:
    """Largest free-variable index (tuples for ``f`` have this length)."""
    return max((t.index for t in _terms(f) if isinstance(t, Var)), default=0)


def param_count(f: Formula) -> int:
    return max((t.index + 1 for t in _terms(f) if isinstance(t, Param)), default=0)


def atoms_of(f: Formula) -> list[Atom]:
    if isinstance(f, Atom):
        return [f]
    if isinstance(f, Eq):
        return []
    if isinstance(f, Not):
        return atoms_of(f.body)
    return atoms_of(f.left) + atoms_of(f.right)


def mentions_var(atom: Atom) -> bool:
    return any(isinstance(t, Var) for t in atom.terms)


def _key(f) -> tuple:
    if isinstance(f, Atom):
        return (0, f.relation, tuple(t.key() for t in f.terms))
    if isinstance(f, Eq):
        return (1, f.left.key(), f.right.key())
    if isinstance(f, Not):
        return (2, _key(f.body))
    tag = 3 if isinstance(f, And) else 4
    return (tag, _key(f.left), _key(f.right))


def weight(f) -> int:
    if isinstance(f, (Param, Var)):
        return f.weight
    if isinstance(f, Atom):
        return 1 + sum(t.weight for t in f.terms)
    if isinstance(f, Eq):
        return 1 + f.left.weight + f.right.weight
    if isinstance(f, Not):
        return 1 + weight(f.body)
    return 1 + weight(f.left) + weight(f.right)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways to write ``total`` as ``parts`` positive summands."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _terms_of_weight(w: int) -> list[Term]:
    return [Param(w - 1), Var(w)] if w >= 1 else []


@dataclass(frozen=True)
class IndexedFormula:
    index: int
    formula: Formula

    @cached_property
    def free_slots(self) -> int:
        return free_slots(self.formula)

    @cached_property
    def param_count(self) -> int:
        return param_count(self.formula)

    def __str__(self):
        return str(self.formula)


class FormulaEnumeration:
    """Canonical enumeration of the quantifier-free formulas of a signature."""

    def __init__(self, signature: Signature):
        self.signature = signature
        self._by_weight: dict[int, list[Formula]] = {}
        self._listing: list[IndexedFormula] = []
        self._done_weight = 0
        self._lock = threading.Lock()

    def _of_weight(self, w: int) -> list[Formula]:
        if w in self._by_weight:
            return self._by_weight[w]
        out: list[Formula] = []
        for name, arity in self.signature.relations:
            for comp in _compositions(w - 1, arity):
                for terms in product(*[_terms_of_weight(c) for c in comp]):
                    out.append(Atom(name, tuple(terms)))
        for a, b in _compositions(w - 1, 2):
            for left in _terms_of_weight(a):
                for right in _terms_of_weight(b):
                    out.append(Eq(left, right))
        if w >= 2:
            out.extend(Not(f) for f in self._of_weight(w - 1))
        for a, b in _compositions(w - 1, 2):
            for left in self._of_weight(a):
                for right in self._of_weight(b):
                    out.append(And(left, right))
                    out.append(Or(left, right))
        self._by_weight[w] = out
        return out

    def _grow(self):
        self._done_weight += 1
        batch = sorted(self._of_weight(self._done_weight),
                       key=lambda f: (free_slots(f), _key(f)))
        start = len(self._listing)
        self._listing.extend(IndexedFormula(start + i, f) for i, f in enumerate(batch))

    def __getitem__(self, index: int) -> IndexedFormula:
        if index >= len(self._listing):
            with self._lock:
                while index >= len(self._listing):
                    self._grow()
        return self._listing[index]

    def __iter__(self) -> Iterator[IndexedFormula]:
        i = 0
        while True:
            yield self[i]
            i += 1

    def index_of(self, formula: Formula) -> int:
        target = weight(formula)
        with self._lock:
            while self._done_weight < target:
                self._grow()
        for item in self._listing:
            if item.formula == formula:
                return item.index
        raise KeyError(formula)


def evaluate(f: Formula, structure: StructureOracle, params: Sequence[int], tuples) -> np.ndarray:
    """Truth value of ``f`` on each row of ``tuples``.

    ``params[i]`` interprets ``x_i``; column ``j - 1`` of ``tuples``
    interprets ``y_j``.  Returns a boolean vector with one entry per row.
    """
    tuples = np.asarray(tuples, dtype=np.int64)
    if tuples.ndim == 1:
        tuples = tuples[None, :]
    rows = tuples.shape[0]

    def term(t):
        if isinstance(t, Param):
            return np.full(rows, params[t.index], dtype=np.int64)
        return tuples[:, t.index - 1]

    def ev(g):
        if isinstance(g, Atom):
            return structure.holds_array(g.relation, *[term(t) for t in g.terms])
        if isinstance(g, Eq):
            return term(g.left) == term(g.right)
        if isinstance(g, Not):
            return ~ev(g.body)
        if isinstance(g, And):
            return ev(g.left) & ev(g.right)
        return ev(g.left) | ev(g.right)

    return np.broadcast_to(ev(f), (rows,)).copy()
