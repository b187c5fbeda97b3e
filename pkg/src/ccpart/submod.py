"""Symmetric submodular minimization and greedy multiway splitting.

``queyranne_minimize`` finds a minimizing proper cut of a symmetric
submodular function with pendant-pair orderings and contractions.
``min_split`` applies it to ``S -> gamma(S) + gamma(part \\ S)`` and ``gsa``
repeatedly applies the cheapest split until the requested number of parts
exists.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .setfn import GroundSet, IndexSet, SetFunctionError, SetFunctionOracle, iter_bits

__all__ = [
    "SplitResult",
    "ContractionState",
    "queyranne_minimize",
    "min_split",
    "gsa",
    "canonical_partition",
]

SYMMETRY_SPOT_CHECKS = 3


@dataclass(frozen=True)
class SplitResult:
    part: IndexSet
    side_S: IndexSet
    side_T: IndexSet
    split_cost: float
    gain: float


class ContractionState:
    """Disjoint super-elements covering the current ground set.

    Each super-element is the bitmask of the underlying elements merged into
    it; a set of super-elements evaluates as the union of their masks.
    """

    def __init__(self, V: IndexSet):
        self.super_elements: list[int] = [1 << i for i in V]

    def __len__(self) -> int:
        return len(self.super_elements)

    def merge(self, a: int, b: int) -> None:
        """Merge the super-elements at positions a and b (kept at the lower position)."""
        lo, hi = min(a, b), max(a, b)
        se = self.super_elements
        se[lo] |= se[hi]
        del se[hi]

    def union(self, positions) -> int:
        out = 0
        for p in positions:
            out |= self.super_elements[p]
        return out


def _spot_check_symmetry(g: Callable[[int], float], V: int, seed: int = 0) -> None:
    elems = list(iter_bits(V))
    rng = np.random.default_rng(seed)
    for _ in range(SYMMETRY_SPOT_CHECKS):
        pick = rng.random(len(elems)) < 0.5
        S = 0
        for e, keep in zip(elems, pick):
            if keep:
                S |= 1 << e
        if S == 0 or S == V:
            continue
        a, b = g(S), g(V & ~S)
        if abs(a - b) > 1e-9 * max(1.0, abs(a), abs(b)):
            raise SetFunctionError(
                f"function is not symmetric: g({IndexSet(S)})={a!r} but g(complement)={b!r}"
            )


def _pendant_candidate(g: Callable[[int], float], state: ContractionState) -> tuple[int, int, int]:
    """One ordering pass; returns (cut mask, position of u_{k-1}, position of u_k)."""
    se = state.super_elements
    k = len(se)
    # u_1 is the super-element holding the lowest underlying index
    first = min(range(k), key=lambda p: (se[p] & -se[p]))
    order = [first]
    remaining = [p for p in range(k) if p != first]
    singles = {p: g(se[p]) for p in remaining}
    W = se[first]
    while remaining:
        best_p, best_key, best_low = -1, None, None
        for p in remaining:
            key = g(W | se[p]) - singles[p]
            low = se[p] & -se[p]
            if best_key is None or key < best_key or (key == best_key and low < best_low):
                best_p, best_key, best_low = p, key, low
        order.append(best_p)
        remaining.remove(best_p)
        W |= se[best_p]
    return se[order[-1]], order[-2], order[-1]


def queyranne_minimize(
    g: SetFunctionOracle | Callable[[int], float],
    V: IndexSet,
    check_symmetry: bool = True,
) -> tuple[IndexSet, float]:
    """Minimize a symmetric submodular function over proper nonempty subsets of V.

    ``g`` is a ``SetFunctionOracle`` or a callable on bitmasks. Each of the
    ``|V| - 1`` rounds builds a maximum-adjacency style ordering
    (``u_i = argmin_x g(W ∪ x) - g(x)``, ties to the lowest underlying
    index), records the last super-element as a candidate cut and merges the
    last two. The best candidate is returned as the side that contains the
    smallest element of V. For non-submodular g the result is a heuristic
    cut, still proper and nonempty.
    """
    fn = g.value if isinstance(g, SetFunctionOracle) else g
    if len(V) < 2:
        raise SetFunctionError(f"need |V| >= 2, got |V|={len(V)}")
    Vm = V.mask
    if check_symmetry:
        _spot_check_symmetry(fn, Vm)
    state = ContractionState(V)
    best_cut, best_val = 0, None
    while len(state) > 1:
        cut, a, b = _pendant_candidate(fn, state)
        val = fn(cut)
        if best_val is None or val < best_val:
            best_cut, best_val = cut, val
        state.merge(a, b)
    side = best_cut if best_cut & (Vm & -Vm) else Vm & ~best_cut
    return IndexSet(side), fn(side)


def min_split(gamma: SetFunctionOracle, part: IndexSet) -> SplitResult:
    """Cheapest two-way split of ``part`` under ``gamma(S) + gamma(part \\ S)``."""
    if len(part) < 2:
        raise SetFunctionError(f"cannot split a part with {len(part)} element(s)")
    P = part.mask
    val = gamma.value

    def g(S: int) -> float:
        return val(S) + val(P & ~S)

    S, _ = queyranne_minimize(g, part)
    T = part - S
    cost = val(S.mask) + val(T.mask)
    return SplitResult(part, S, T, cost, cost - val(P))


def canonical_partition(parts) -> list[IndexSet]:
    return sorted((p if isinstance(p, IndexSet) else IndexSet.of(p) for p in parts), key=lambda p: p.min())


def gsa(gamma: SetFunctionOracle, ground: GroundSet | int, P: int) -> list[IndexSet]:
    """Greedy splitting into exactly P parts.

    Starting from the whole ground set, each of the ``P - 1`` rounds applies
    the split with the smallest gain over all splittable parts (ties: the
    part holding the smallest index). Split results are cached per part, so
    one round costs one new ``min_split`` per part created in the previous
    round.
    """
    ground = ground if isinstance(ground, GroundSet) else GroundSet(int(ground))
    r = ground.size
    if P < 2 or P > r:
        raise SetFunctionError(f"need 2 <= P <= r={r}, got P={P}")
    parts = [ground.full]
    cache: dict[int, SplitResult] = {}
    for _ in range(P - 1):
        best = None
        for part in parts:  # canonical order: by smallest index
            if len(part) < 2:
                continue
            res = cache.get(part.mask)
            if res is None:
                res = cache[part.mask] = min_split(gamma, part)
            if best is None or res.gain < best.gain:
                best = res
        if best is None:
            raise SetFunctionError("no splittable part left before reaching P parts")
        parts.remove(best.part)
        parts = canonical_partition(parts + [best.side_S, best.side_T])
    return parts
