"""Countably infinite objects as total, deterministic oracles.

Bit streams, linear orders on the naturals and relational structures on the
naturals are all represented by plain Python callables wrapped in small
classes.  Every generator records a JSON descriptor
``{"kind": ..., "seed": ..., "params": {...}}`` so an experiment can be
rebuilt from ``(kind, seed)`` alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "pair", "unpair", "pair_array", "mix64", "hash_bit", "hash_bits",
    "BitStream", "LinearOrderOracle", "Signature", "StructureOracle",
    "join", "order_code", "decode_order", "materialize_prefix",
    "bits_to_string", "bits_from_string",
    "constant_stream", "periodic_stream", "random_stream", "stream_from_function",
    "omega_order", "reverse_order_blocks", "parity_order", "reverse_parity_order",
    "zeta_order", "block_shuffle_order",
    "empty_structure", "path_graph", "grid_graph", "unary_predicate",
    "even_predicate", "odd_predicate", "random_graph", "complete_graph",
    "finite_marked_structure",
    "stream_from_descriptor", "order_from_descriptor", "structure_from_descriptor",
    "STREAM_KINDS", "ORDER_KINDS", "STRUCTURE_KINDS",
]


# ---------------------------------------------------------------------------
# pairing

def pair(m: int, n: int) -> int:
    """Cantor pairing of two naturals."""
    s = m + n
    return s * (s + 1) // 2 + n


def unpair(k: int) -> tuple[int, int]:
    """Inverse of :func:`pair`."""
    w = (math.isqrt(8 * k + 1) - 1) // 2
    n = k - w * (w + 1) // 2
    return w - n, n


def pair_array(m, n):
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    s = m + n
    return s * (s + 1) // 2 + n


# ---------------------------------------------------------------------------
# deterministic hashing, used as random access "randomness" for seeded oracles

_M64 = (1 << 64) - 1


def mix64(seed: int, *values: int) -> int:
    """Stateless 64-bit mix of ``seed`` and ``values`` (splitmix64 finalizer)."""
    z = seed & _M64
    for v in values:
        z = (z + 0x9E3779B97F4A7C15 + (v & _M64)) & _M64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        z ^= z >> 31
    return z


def hash_bit(seed: int, *values: int) -> int:
    return mix64(seed, *values) >> 63


def hash_bits(seed: int, *arrays) -> np.ndarray:
    """Vectorised :func:`hash_bit`; agrees with it elementwise."""
    with np.errstate(over="ignore"):
        arrays = np.broadcast_arrays(*[np.asarray(a, dtype=np.int64) for a in arrays])
        z = np.full(arrays[0].shape, seed & _M64, dtype=np.uint64)
        for a in arrays:
            z = z + np.uint64(0x9E3779B97F4A7C15) + a.astype(np.uint64)
            z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(63)).astype(np.int8)


# ---------------------------------------------------------------------------
# bit streams

class BitStream:
    """A total function from the naturals to {0, 1}."""

    def __init__(self, fn: Callable[[int], int], descriptor: dict | None = None):
        self._fn = fn
        self.descriptor = descriptor

    def query(self, n: int) -> int:
        if n < 0:
            raise ValueError(f"negative index {n}")
        return 1 if self._fn(n) else 0

    __call__ = query

    def prefix(self, length: int) -> list[int]:
        return [self.query(i) for i in range(length)]

    def __repr__(self):
        if self.descriptor is not None:
            return f"BitStream({self.descriptor})"
        return f"BitStream({bits_to_string(self, 16)}...)"


def bits_to_string(stream: BitStream, length: int) -> str:
    """Character ``i`` is ``stream(i)``."""
    return "".join(str(stream(i)) for i in range(length))


def bits_from_string(bits: str, tail: int | str = 0) -> BitStream:
    """Stream reading ``bits`` and then a constant tail.

    ``tail="cycle"`` repeats ``bits`` forever instead.
    """
    if any(ch not in "01" for ch in bits):
        raise ValueError(f"not a bit string: {bits!r}")
    if tail == "cycle":
        return periodic_stream("", bits)
    return periodic_stream(bits, str(int(tail)))


def constant_stream(bit: int) -> BitStream:
    bit = 1 if bit else 0
    return BitStream(lambda n: bit, {"kind": "constant", "seed": 0, "params": {"bit": bit}})


def periodic_stream(prefix: str, cycle: str) -> BitStream:
    """Eventually periodic stream ``prefix + cycle + cycle + ...``."""
    if not cycle:
        raise ValueError("cycle must be non-empty")
    pre = [int(c) for c in prefix]
    cyc = [int(c) for c in cycle]

    def fn(n):
        if n < len(pre):
            return pre[n]
        return cyc[(n - len(pre)) % len(cyc)]

    return BitStream(fn, {"kind": "periodic", "seed": 0,
                          "params": {"prefix": prefix, "cycle": cycle}})


def random_stream(seed: int) -> BitStream:
    return BitStream(lambda n: hash_bit(seed, 0x5EED, n),
                     {"kind": "random", "seed": seed, "params": {}})


def stream_from_function(fn: Callable[[int], int], name: str = "function") -> BitStream:
    return BitStream(fn, {"kind": name, "seed": 0, "params": {}})


def join(a: BitStream, b: BitStream) -> BitStream:
    """Interleave: even positions from ``a``, odd positions from ``b``."""
    def fn(n):
        return a(n // 2) if n % 2 == 0 else b(n // 2)

    desc = None
    if a.descriptor is not None and b.descriptor is not None:
        desc = {"kind": "join", "seed": 0, "params": {"a": a.descriptor, "b": b.descriptor}}
    return BitStream(fn, desc)


# ---------------------------------------------------------------------------
# linear orders

class LinearOrderOracle:
    """Comparison oracle ``leq(m, n)`` for a linear order on the naturals."""

    def __init__(self, leq: Callable[[int, int], bool], descriptor: dict | None = None):
        self._leq = leq
        self.descriptor = descriptor

    def leq(self, m: int, n: int) -> bool:
        if m < 0 or n < 0:
            raise ValueError(f"negative index ({m}, {n})")
        return bool(self._leq(m, n))

    def lt(self, m: int, n: int) -> bool:
        return m != n and self.leq(m, n)

    def sorted(self, elements: Iterable[int]) -> list[int]:
        """Elements listed in increasing order of this order (insertion sort)."""
        out: list[int] = []
        for e in elements:
            lo, hi = 0, len(out)
            while lo < hi:
                mid = (lo + hi) // 2
                if self.leq(out[mid], e):
                    lo = mid + 1
                else:
                    hi = mid
            out.insert(lo, e)
        return out

    def __repr__(self):
        return f"LinearOrderOracle({self.descriptor})"


def _key_order(key: Callable[[int], tuple], kind: str, seed: int = 0, **params) -> LinearOrderOracle:
    return LinearOrderOracle(lambda m, n: key(m) <= key(n),
                             {"kind": kind, "seed": seed, "params": params})


def omega_order() -> LinearOrderOracle:
    """The standard order on the naturals (type omega)."""
    return _key_order(lambda n: (n,), "omega")


def reverse_order_blocks(block: int = 3) -> LinearOrderOracle:
    """Consecutive blocks of ``block`` numbers, each block reversed."""
    if block < 1:
        raise ValueError("block must be positive")
    return _key_order(lambda n: (n // block, -(n % block)), "reverse-blocks", block=block)


def parity_order() -> LinearOrderOracle:
    """Evens in increasing order, then odds in increasing order (type omega + omega)."""
    return _key_order(lambda n: (n % 2, n), "parity")


def reverse_parity_order() -> LinearOrderOracle:
    """Odds first, then evens."""
    return _key_order(lambda n: (1 - n % 2, n), "reverse-parity")


def zeta_order() -> LinearOrderOracle:
    """... 5 < 3 < 1 < 0 < 2 < 4 ... (type zeta)."""
    return _key_order(lambda n: (-(n + 1) // 2 if n % 2 else n // 2,), "zeta")


def block_shuffle_order(seed: int, block: int = 4) -> LinearOrderOracle:
    """Blocks in order, each block internally permuted by a seeded ranking."""
    if block < 1:
        raise ValueError("block must be positive")
    return _key_order(lambda n: (n // block, mix64(seed, n // block, n % block), n),
                      "block-shuffle", seed=seed, block=block)


def order_code(order: LinearOrderOracle) -> BitStream:
    """Bit ``pair(m, n)`` is 1 iff ``m <= n`` in ``order``."""
    def fn(k):
        m, n = unpair(k)
        return 1 if order.leq(m, n) else 0

    desc = None
    if order.descriptor is not None:
        desc = {"kind": "order-code", "seed": 0, "params": {"order": order.descriptor}}
    return BitStream(fn, desc)


def decode_order(code: BitStream) -> LinearOrderOracle:
    """Read a comparison table back out of a bit stream.

    Nothing is validated; a stream that does not code a linear order yields an
    oracle that violates the order axioms.
    """
    return LinearOrderOracle(lambda m, n: code(pair(m, n)) == 1)


# ---------------------------------------------------------------------------
# relational structures

@dataclass(frozen=True)
class Signature:
    relations: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        rels = tuple((str(name), int(arity)) for name, arity in self.relations)
        object.__setattr__(self, "relations", rels)
        names = [name for name, _ in rels]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate relation names in {names}")
        for name, arity in rels:
            if arity < 1:
                raise ValueError(f"relation {name} has arity {arity} < 1")

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.relations]

    def to_json(self) -> list[dict]:
        return [{"name": name, "arity": arity} for name, arity in self.relations]

    @classmethod
    def from_json(cls, data: Sequence[dict]) -> "Signature":
        return cls(tuple((d["name"], d["arity"]) for d in data))


class StructureOracle:
    """Atomic diagram of a structure with domain the naturals.

    ``relations`` maps each relation name to a function of the argument
    arrays; it is called with numpy integer arrays of equal shape and must
    return a boolean array of that shape.  Scalar queries go through the same
    function, so the scalar and vectorised views never disagree.
    """

    def __init__(self, signature: Signature, relations: dict, descriptor: dict | None = None):
        missing = set(signature.names) - set(relations)
        if missing:
            raise ValueError(f"no interpretation for {sorted(missing)}")
        self.signature = signature
        self._relations = relations
        self.descriptor = descriptor

    def holds(self, name: str, args: Sequence[int]) -> bool:
        arity = self.signature.arity(name)
        if len(args) != arity:
            raise ValueError(f"{name} has arity {arity}, got {len(args)} arguments")
        if any(a < 0 for a in args):
            raise ValueError(f"negative argument in {tuple(args)}")
        arrays = [np.asarray([a], dtype=np.int64) for a in args]
        return bool(self._relations[name](*arrays)[0])

    def holds_array(self, name: str, *args) -> np.ndarray:
        arrays = np.broadcast_arrays(*[np.asarray(a, dtype=np.int64) for a in args])
        if len(arrays) != self.signature.arity(name):
            raise ValueError(f"wrong number of arguments for {name}")
        return np.asarray(self._relations[name](*arrays), dtype=bool)

    def __repr__(self):
        return f"StructureOracle({self.descriptor or self.signature})"


def _structure(signature, relations, kind, seed=0, **params):
    desc = {"kind": kind, "seed": seed, "params": params, "signature": signature.to_json()}
    return StructureOracle(signature, relations, desc)


def empty_structure() -> StructureOracle:
    return _structure(Signature(), {}, "empty")


def path_graph() -> StructureOracle:
    """Edge between m and n iff |m - n| = 1."""
    return _structure(Signature((("R", 2),)),
                      {"R": lambda m, n: np.abs(m - n) == 1}, "path-graph")


def grid_graph() -> StructureOracle:
    """The grid on N x N, transported to N by Cantor unpairing."""
    def rel(m, n):
        w1 = (np.floor(np.sqrt(8 * m.astype(np.float64) + 1)).astype(np.int64) - 1) // 2
        w2 = (np.floor(np.sqrt(8 * n.astype(np.float64) + 1)).astype(np.int64) - 1) // 2
        b1 = m - w1 * (w1 + 1) // 2
        b2 = n - w2 * (w2 + 1) // 2
        a1, a2 = w1 - b1, w2 - b2
        return (np.abs(a1 - a2) + np.abs(b1 - b2)) == 1
    return _structure(Signature((("R", 2),)), {"R": rel}, "grid-graph")


def unary_predicate(fn: Callable, name: str = "P", kind: str = "unary") -> StructureOracle:
    return _structure(Signature(((name, 1),)), {name: fn}, kind)


def even_predicate() -> StructureOracle:
    return unary_predicate(lambda n: n % 2 == 0, kind="even-predicate")


def odd_predicate() -> StructureOracle:
    return unary_predicate(lambda n: n % 2 == 1, kind="odd-predicate")


def random_graph(seed: int, symmetric: bool = False) -> StructureOracle:
    """Seeded random binary relation (a directed graph with loops allowed)."""
    if symmetric:
        def rel(m, n):
            return hash_bits(seed, np.minimum(m, n), np.maximum(m, n)) == 1
    else:
        def rel(m, n):
            return hash_bits(seed, m, n) == 1
    return _structure(Signature((("R", 2),)), {"R": rel}, "random-bits", seed,
                      symmetric=symmetric)


def complete_graph() -> StructureOracle:
    """Edge between every pair of distinct numbers; trivial with F empty."""
    return _structure(Signature((("R", 2),)), {"R": lambda m, n: m != n}, "complete-graph")


def finite_marked_structure(marked: Iterable[int], with_edges: bool = False) -> StructureOracle:
    """Unary predicate true exactly on a finite set; trivial with F = that set.

    ``with_edges`` adds the complete graph on the whole domain.
    """
    marked = sorted(set(int(m) for m in marked))
    arr = np.asarray(marked, dtype=np.int64)
    rels = {"P": lambda n: np.isin(n, arr)}
    sig = [("P", 1)]
    if with_edges:
        rels["R"] = lambda m, n: m != n
        sig.append(("R", 2))
    return _structure(Signature(tuple(sig)), rels, "finite-marked",
                      marked=marked, with_edges=with_edges)


# ---------------------------------------------------------------------------
# materialization

def materialize_prefix(oracle, bound: int):
    """Exact finite table of every answer with all indices below ``bound``.

    Bit streams give a ``uint8`` vector, linear orders a ``bound x bound``
    boolean matrix, structures a dict of boolean arrays (one axis per argument).
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    if isinstance(oracle, BitStream):
        return np.array([oracle(i) for i in range(bound)], dtype=np.uint8)
    if isinstance(oracle, LinearOrderOracle):
        table = np.zeros((bound, bound), dtype=bool)
        for m in range(bound):
            for n in range(bound):
                table[m, n] = oracle.leq(m, n)
        return table
    if isinstance(oracle, StructureOracle):
        out = {}
        for name, arity in oracle.signature.relations:
            if bound == 0:
                out[name] = np.zeros((0,) * arity, dtype=bool)
                continue
            grids = np.meshgrid(*[np.arange(bound)] * arity, indexing="ij")
            out[name] = oracle.holds_array(name, *grids)
        return out
    raise TypeError(f"cannot materialize {type(oracle).__name__}")


# ---------------------------------------------------------------------------
# descriptors

STREAM_KINDS = ("constant", "periodic", "random", "bits")
ORDER_KINDS = ("omega", "reverse-blocks", "parity", "reverse-parity", "zeta", "block-shuffle")
STRUCTURE_KINDS = ("empty", "path-graph", "grid-graph", "even-predicate", "odd-predicate",
                   "random-bits", "complete-graph", "finite-marked")


def stream_from_descriptor(desc: dict) -> BitStream:
    kind = desc.get("kind")
    seed = int(desc.get("seed", 0))
    params = desc.get("params", {}) or {}
    if kind == "constant":
        return constant_stream(params.get("bit", 0))
    if kind == "periodic":
        return periodic_stream(params.get("prefix", ""), params["cycle"])
    if kind == "random":
        return random_stream(seed)
    if kind == "bits":
        return bits_from_string(params["bits"], params.get("tail", 0))
    raise ValueError(f"unknown stream kind {kind!r}; expected one of {STREAM_KINDS}")


def order_from_descriptor(desc: dict) -> LinearOrderOracle:
    kind = desc.get("kind")
    seed = int(desc.get("seed", 0))
    params = desc.get("params", {}) or {}
    if kind == "omega":
        return omega_order()
    if kind == "reverse-blocks":
        return reverse_order_blocks(params.get("block", 3))
    if kind == "parity":
        return parity_order()
    if kind == "reverse-parity":
        return reverse_parity_order()
    if kind == "zeta":
        return zeta_order()
    if kind == "block-shuffle":
        return block_shuffle_order(seed, params.get("block", 4))
    raise ValueError(f"unknown order kind {kind!r}; expected one of {ORDER_KINDS}")


def structure_from_descriptor(desc: dict) -> StructureOracle:
    kind = desc.get("kind")
    seed = int(desc.get("seed", 0))
    params = desc.get("params", {}) or {}
    if kind == "empty":
        st = empty_structure()
    elif kind == "path-graph":
        st = path_graph()
    elif kind == "grid-graph":
        st = grid_graph()
    elif kind == "even-predicate":
        st = even_predicate()
    elif kind == "odd-predicate":
        st = odd_predicate()
    elif kind == "random-bits":
        st = random_graph(seed, params.get("symmetric", False))
    elif kind == "complete-graph":
        st = complete_graph()
    elif kind == "finite-marked":
        st = finite_marked_structure(params.get("marked", []), params.get("with_edges", False))
    else:
        raise ValueError(f"unknown structure kind {kind!r}; expected one of {STRUCTURE_KINDS}")
    if "signature" in desc:
        given = Signature.from_json(desc["signature"])
        if given != st.signature:
            raise ValueError(f"signature {given} does not match generator {kind!r}")
    return st
