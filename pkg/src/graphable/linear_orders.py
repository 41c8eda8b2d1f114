"""Coding a bit stream into an isomorphic copy of a linear order.

Given an order ``L1`` on the naturals and a payload ``a``, the copy ``L2``
agrees with ``L1`` except that some pairs ``2n, 2n + 1`` are swapped.  Pair
``n`` is swapped exactly when ``L1`` does not already record bit ``n`` of
``c = a (+) code(L1)`` in the order of ``2n`` and ``2n + 1``.  Reading those
orders back from ``L2`` recovers ``c``, hence ``a``, ``L1`` and the swap map.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

from .oracles import (BitStream, LinearOrderOracle, decode_order, join, order_code)

__all__ = [
    "SwapIsomorphism", "agrees_at", "encode_order", "decode_payload",
    "decode_payload_stream", "recover_base_order", "recover_isomorphism",
    "order_axiom_violations",
]


@dataclass(frozen=True)
class SwapIsomorphism:
    """Bijection of the naturals that keeps or swaps each pair ``2n, 2n + 1``."""
    swapped: Callable[[int], bool]

    def apply(self, n: int) -> int:
        if self.swapped(n // 2):
            return n ^ 1
        return n

    __call__ = apply


def agrees_at(c: BitStream, order: LinearOrderOracle, n: int) -> bool:
    """Does ``order`` already put ``2n, 2n + 1`` the way bit ``n`` of ``c`` asks?"""
    ascending = order.leq(2 * n, 2 * n + 1)
    return ascending if c(n) == 0 else not ascending


def encode_order(base: LinearOrderOracle, payload: BitStream) -> tuple[LinearOrderOracle, SwapIsomorphism]:
    """Copy of ``base`` coding ``payload (+) code(base)``, and the isomorphism.

    The returned map ``f`` satisfies ``L2.leq(m, n) == base.leq(f(m), f(n))``.
    """
    c = join(payload, order_code(base))
    # cached: each pair decision costs a base comparison plus a code lookup
    f = SwapIsomorphism(lru_cache(maxsize=None)(lambda n: not agrees_at(c, base, n)))
    desc = None
    if base.descriptor is not None and payload.descriptor is not None:
        desc = {"kind": "swap-coded", "seed": 0,
                "params": {"base": base.descriptor, "payload": payload.descriptor}}
    coded = LinearOrderOracle(lambda m, n: base.leq(f(m), f(n)), desc)
    return coded, f


def decode_payload(coded: LinearOrderOracle, n: int) -> int:
    """Bit ``n`` of the coded stream: 0 iff ``2n`` comes before ``2n + 1``."""
    return 0 if coded.leq(2 * n, 2 * n + 1) else 1


def decode_payload_stream(coded: LinearOrderOracle) -> BitStream:
    return BitStream(lambda n: decode_payload(coded, n))


def recover_base_order(coded: LinearOrderOracle) -> LinearOrderOracle:
    """The order whose code sits at the odd positions of the coded stream."""
    return decode_order(BitStream(lambda k: decode_payload(coded, 2 * k + 1)))


def recover_isomorphism(base: LinearOrderOracle, coded: LinearOrderOracle, n: int) -> tuple[int, int]:
    """``(f(2n), f(2n + 1))`` read off from where ``base`` and ``coded`` disagree."""
    if base.leq(2 * n, 2 * n + 1) == coded.leq(2 * n, 2 * n + 1):
        return 2 * n, 2 * n + 1
    return 2 * n + 1, 2 * n


def order_axiom_violations(order: LinearOrderOracle, bound: int, limit: int = 1) -> list[dict]:
    """Exhaustive check of the linear order axioms on ``{0, ..., bound - 1}``.

    Stops after ``limit`` counterexamples.
    """
    out: list[dict] = []
    rng = range(bound)
    leq = [[order.leq(m, n) for n in rng] for m in rng]
    for m in rng:
        if not leq[m][m]:
            out.append({"axiom": "reflexive", "args": [m]})
        for n in rng:
            if m != n and leq[m][n] and leq[n][m]:
                out.append({"axiom": "antisymmetric", "args": [m, n]})
            if not (leq[m][n] or leq[n][m]):
                out.append({"axiom": "total", "args": [m, n]})
            if len(out) >= limit:
                return out
    for m in rng:
        for n in rng:
            if not leq[m][n]:
                continue
            for k in rng:
                if leq[n][k] and not leq[m][k]:
                    out.append({"axiom": "transitive", "args": [m, n, k]})
                    if len(out) >= limit:
                        return out
    return out
