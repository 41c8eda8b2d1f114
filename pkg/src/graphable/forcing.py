"""Forcing conditions that label binary strings, and coding bits along a path.

A condition ``p`` has a depth ``n`` and labels every binary string of length
at most ``n`` with 0, 1 or "bot" (an explicit decision not to label), plus a
finite list of forbidden paths.  ``q`` extends ``p`` when it keeps ``p``'s
labels, keeps ``p``'s forbidden paths, and puts no new labels on strings
along those paths.  Reading the labels met along a path spells out a bit
string; :func:`build_generic` uses this to code a payload along a path.

Labels are stored sparsely: only strings labelled 0 or 1 are kept, every
other string up to the depth counts as labelled "bot".  The empty condition
has depth -1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from types import MappingProxyType
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import GraphableError
from .oracles import BitStream, hash_bit, mix64, random_stream, stream_from_descriptor

__all__ = [
    "BOT", "DomainNotFull", "DiffBudgetExhausted", "SelectorContractViolation",
    "KsCondition", "GenericLabelingPrefix", "DenseSelector",
    "make_condition", "empty_condition", "extends", "first_difference", "eval_labels",
    "encode_bit_along",
    "build_generic", "identity_selector", "label_elsewhere_selector",
    "add_forbidden_selector", "path_labelling_selector", "condition_family",
    "condition_from_json",
]

BOT = "bot"


class DomainNotFull(GraphableError, ValueError):
    """A label map misses some string below its depth."""


class DiffBudgetExhausted(GraphableError):
    """A forbidden path agrees with the coding path on every probed bit."""

    def __init__(self, message: str, path_index: int):
        super().__init__(message)
        self.path_index = path_index


class SelectorContractViolation(GraphableError):
    def __init__(self, round_index: int, reason: str):
        super().__init__(f"round {round_index}: {reason}")
        self.round = round_index
        self.reason = reason


def _prefix_string(x: BitStream, length: int) -> str:
    return "".join(str(b) for b in x.prefix(length))


@dataclass(frozen=True)
class KsCondition:
    depth: int
    marks: Mapping[str, int]          # strings labelled 0 or 1; the rest are bot
    forbidden: tuple[BitStream, ...] = ()

    def __post_init__(self):
        if self.depth < -1:
            raise ValueError(f"depth {self.depth} < -1")
        marks = {}
        for s, v in dict(self.marks).items():
            if any(ch not in "01" for ch in s):
                raise ValueError(f"not a binary string: {s!r}")
            if len(s) > self.depth:
                raise ValueError(f"{s!r} lies below depth {self.depth}")
            if v not in (0, 1):
                raise ValueError(f"label {v!r} of {s!r} is not 0 or 1")
            marks[s] = int(v)
        object.__setattr__(self, "marks", MappingProxyType(marks))
        object.__setattr__(self, "forbidden", tuple(self.forbidden))

    @property
    def is_empty(self) -> bool:
        return self.depth < 0

    def label(self, s: str):
        """0, 1, ``BOT`` or ``None`` when ``s`` is beyond the depth."""
        if len(s) > self.depth:
            return None
        return self.marks.get(s, BOT)

    def to_json(self) -> dict:
        return {"depth": self.depth,
                "labels": {s: self.marks[s] for s in sorted(self.marks, key=lambda s: (len(s), s))},
                "forbidden": [y.descriptor for y in self.forbidden]}


def empty_condition() -> KsCondition:
    return KsCondition(-1, {}, ())


def make_condition(labels: Mapping[str, object], forbidden: Sequence[BitStream] = (),
                   depth: int | None = None) -> KsCondition:
    """Validated condition from a label map.

    Without ``depth`` the map must be total on every string of length at most
    its longest key (values 0, 1 or ``"bot"``).  With ``depth`` given, strings
    missing from the map are labelled "bot".
    """
    labels = dict(labels)
    if depth is None:
        depth = max((len(s) for s in labels), default=-1)
        for n in range(depth + 1):
            for bits in product("01", repeat=n):
                s = "".join(bits)
                if s not in labels:
                    raise DomainNotFull(f"no label for {s!r} (depth {depth})")
    marks = {}
    for s, v in labels.items():
        if v in (BOT, None):
            if len(s) > depth:
                raise ValueError(f"{s!r} lies below depth {depth}")
            continue
        marks[s] = int(v)
    return KsCondition(depth, marks, tuple(forbidden))


def _has_path(paths: Sequence[BitStream], y: BitStream, probe_depth: int) -> bool:
    if any(y is z for z in paths):
        return True
    target = y.prefix(probe_depth)
    return any(z.prefix(probe_depth) == target for z in paths)


def extends(q: KsCondition, p: KsCondition, probe_depth: int = 64) -> bool:
    """Does ``q`` extend ``p``?"""
    # keeps every label and every bot decision
    if q.depth < p.depth:
        return False
    if {s: v for s, v in q.marks.items() if len(s) <= p.depth} != dict(p.marks):
        return False
    # keeps every forbidden path
    for y in p.forbidden:
        if not _has_path(q.forbidden, y, probe_depth):
            return False
    # no new labels along the forbidden paths of p
    new = [s for s in q.marks if len(s) > p.depth]
    if new and p.forbidden:
        prefixes = [_prefix_string(y, q.depth) for y in p.forbidden]
        for s in new:
            if any(pre.startswith(s) for pre in prefixes):
                return False
    return True


@dataclass
class GenericLabelingPrefix:
    """Union of the labels of a descending chain of conditions."""
    chain: list[KsCondition]
    coded: list[int] = field(default_factory=list)

    @property
    def depth(self) -> int:
        return self.chain[-1].depth if self.chain else -1

    @property
    def marks(self) -> Mapping[str, int]:
        # the chain only ever adds labels, so the last condition holds the union
        return self.chain[-1].marks if self.chain else {}

    def label(self, s: str):
        return self.chain[-1].label(s) if self.chain else None

    def to_json(self) -> dict:
        return {"depth": self.depth, "coded": list(self.coded),
                "chain": [c.to_json() for c in self.chain]}


def eval_labels(g, x: BitStream, max_depth: int) -> str:
    """Labels met walking down ``x`` from the root, down to length ``max_depth``."""
    top = min(max_depth, g.depth)
    if top < 0:
        return ""
    path = _prefix_string(x, top)
    marks = g.marks
    return "".join(str(marks[path[:n]]) for n in range(top + 1) if path[:n] in marks)


def first_difference(x: BitStream, y: BitStream, budget: int) -> int | None:
    """Least ``n < budget`` with ``x(n) != y(n)``, probing in doubling chunks."""
    if x is y:
        return None
    lo, hi = 0, min(budget, 8)
    while lo < hi:
        xs = np.fromiter((x(n) for n in range(lo, hi)), dtype=np.int8, count=hi - lo)
        ys = np.fromiter((y(n) for n in range(lo, hi)), dtype=np.int8, count=hi - lo)
        diff = np.flatnonzero(xs != ys)
        if diff.size:
            return lo + int(diff[0])
        lo, hi = hi, min(budget, 2 * hi)
    return None


def encode_bit_along(p: KsCondition, x: BitStream, bit: int, diff_budget: int) -> KsCondition:
    """Label the shortest admissible initial segment of ``x`` with ``bit``.

    The segment is longer than ``p``'s depth, at least one bit long, and long
    enough to have left every forbidden path of ``p``.
    """
    length = max(p.depth + 1, 1)
    for i, y in enumerate(p.forbidden):
        diff = first_difference(x, y, diff_budget)
        if diff is None:
            raise DiffBudgetExhausted(
                f"forbidden path {i} agrees with the coding path on {diff_budget} bits", i)
        length = max(length, diff + 1)
    sigma = _prefix_string(x, length)
    marks = dict(p.marks)
    marks[sigma] = 1 if bit else 0
    return KsCondition(length, marks, p.forbidden)


@dataclass(frozen=True)
class DenseSelector:
    """Caller-supplied step of the generic construction.

    ``extend(p, round)`` must return an extension of ``p``; with
    ``protects_path`` set it must also add no label along the coding path.
    ``decide(q, round)``, if given, chooses the next bit to code instead of
    the payload.
    """
    name: str
    extend: Callable[[KsCondition, int], KsCondition]
    protects_path: bool = True
    decide: Callable[[KsCondition, int], int] | None = None


def build_generic(p0: KsCondition, selectors: Sequence[DenseSelector], x: BitStream,
                  payload: BitStream, rounds: int, diff_budget: int = 4096,
                  probe_depth: int = 64) -> GenericLabelingPrefix:
    """Alternately apply a selector and code the next bit along ``x``."""
    if rounds and not selectors:
        raise ValueError("at least one selector is needed")
    result = GenericLabelingPrefix([p0])
    p = p0
    for k in range(rounds):
        sel = selectors[k % len(selectors)]
        q = sel.extend(p, k)
        if not extends(q, p, probe_depth):
            raise SelectorContractViolation(k, f"selector {sel.name!r} did not return an extension")
        if sel.protects_path:
            along = _prefix_string(x, q.depth) if q.depth > 0 else ""
            for s in q.marks:
                if len(s) > p.depth and along.startswith(s):
                    raise SelectorContractViolation(
                        k, f"selector {sel.name!r} labelled {s!r} along the coding path")
        bit = payload(k) if sel.decide is None else int(sel.decide(q, k))
        if q is not p:
            result.chain.append(q)
        p = encode_bit_along(q, x, bit, diff_budget)
        result.chain.append(p)
        result.coded.append(bit)
    return result


# ---------------------------------------------------------------------------
# selectors

identity_selector = DenseSelector("identity", lambda p, k: p)


def label_elsewhere_selector(x: BitStream, seed: int = 0) -> DenseSelector:
    """Labels one new string that avoids ``x`` and every forbidden path."""

    def extend(p: KsCondition, k: int) -> KsCondition:
        depth = max(p.depth + 1, 1)
        while True:
            paths = [_prefix_string(y, depth) for y in (x,) + p.forbidden]
            start = mix64(seed, k, depth) % (1 << depth)
            for offset in range(1 << depth):
                s = format((start + offset) % (1 << depth), f"0{depth}b")
                if s not in paths:
                    marks = dict(p.marks)
                    marks[s] = hash_bit(seed, k, depth, 1)
                    return KsCondition(depth, marks, p.forbidden)
            depth += 1

    return DenseSelector(f"label-elsewhere-{seed}", extend)


def add_forbidden_selector(seed: int = 0) -> DenseSelector:
    """Adds a fresh random forbidden path each round."""

    def extend(p: KsCondition, k: int) -> KsCondition:
        y = random_stream(mix64(seed, k) & 0xFFFFFFFF)
        return KsCondition(p.depth, p.marks, p.forbidden + (y,))

    return DenseSelector(f"add-forbidden-{seed}", extend)


def path_labelling_selector(x: BitStream) -> DenseSelector:
    """Breaks the contract: labels the next string along ``x``."""

    def extend(p: KsCondition, k: int) -> KsCondition:
        depth = max(p.depth + 1, 0)
        marks = dict(p.marks)
        marks[_prefix_string(x, depth)] = 1
        return KsCondition(depth, marks, p.forbidden)

    return DenseSelector("label-along-path", extend)


def condition_family(seed: int, size: int = 50, diff_budget: int = 256) -> list[KsCondition]:
    """Seeded family of conditions grown as a random tree of extensions.

    Each new member extends a random earlier member by coding a bit along a
    random path, labelling off the forbidden paths, or adding a forbidden path.
    """
    rng = np.random.default_rng(seed)
    family = [empty_condition()]
    while len(family) < size:
        parent = family[int(rng.integers(len(family)))]
        move = int(rng.integers(3))
        tag = int(rng.integers(1 << 30))
        x = random_stream(tag)
        try:
            if move == 0:
                child = encode_bit_along(parent, x, int(rng.integers(2)), diff_budget)
            elif move == 1:
                child = label_elsewhere_selector(x, tag).extend(parent, len(family))
            else:
                child = add_forbidden_selector(tag).extend(parent, len(family))
        except DiffBudgetExhausted:
            continue
        family.append(child)
    return family


def condition_from_json(data: Mapping) -> KsCondition:
    """Condition from ``{"depth": n, "labels": {...}, "forbidden": [...]}``.

    Strings missing from ``labels`` are labelled "bot"; depth ``"empty"`` is
    read as -1.
    """
    depth = data.get("depth", -1)
    depth = -1 if depth in ("empty", None) else int(depth)
    forbidden = tuple(stream_from_descriptor(d) for d in data.get("forbidden", []))
    return make_condition(data.get("labels", {}), forbidden, depth=depth)
