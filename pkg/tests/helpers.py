"""Shared brute-force oracles and random instance builders for the tests."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ccpart.rank import RowStructure
from ccpart.setfn import GroundSet, IndexSet, SetFunctionOracle, enumerate_partitions, iter_bits


def random_graph(rng: np.random.Generator, size: int, density: float = 0.6) -> dict[tuple[int, int], float]:
    """Connected weighted graph: a random spanning path plus random extra edges."""
    order = rng.permutation(size)
    edges = {}
    for a, b in zip(order[:-1], order[1:]):
        edges[(min(a, b), max(a, b))] = float(rng.integers(1, 10))
    for a, b in itertools.combinations(range(size), 2):
        if (a, b) not in edges and rng.random() < density:
            edges[(a, b)] = float(rng.integers(1, 10))
    return edges


def cut_function(edges: dict[tuple[int, int], float]):
    def g(S: int) -> float:
        return sum(w for (a, b), w in edges.items() if ((S >> a) & 1) != ((S >> b) & 1))
    return g


def brute_min_cut(g, V: int) -> float:
    """Minimum of g over proper nonempty subsets of V (one side of each cut)."""
    low = V & -V
    best = math.inf
    sub = (V - 1) & V
    while sub:
        if sub & low:
            best = min(best, g(sub))
        sub = (sub - 1) & V
    return best


def random_supports(rng: np.random.Generator, r: int, n: int, max_len: int = 3) -> list[int]:
    masks = []
    for _ in range(r):
        k = int(rng.integers(1, max_len + 1))
        cols = rng.choice(n, size=min(k, n), replace=False)
        masks.append(sum(1 << int(c) for c in cols))
    return masks


def coverage_oracle(supports: list[int], memoize: bool = True) -> SetFunctionOracle:
    def evaluate(A: IndexSet) -> float:
        u = 0
        for j in A:
            u |= supports[j]
        return float(u.bit_count())
    return SetFunctionOracle(evaluate, GroundSet(len(supports)), memoize=memoize, name="coverage")


def brute_partitions(r: int):
    yield from enumerate_partitions(list(range(r)))


def mask_of(indices) -> int:
    return sum(1 << int(i) for i in indices)


def bits(mask: int) -> list[int]:
    return list(iter_bits(mask))


def linear_system(rng, r, n, d_max=3):
    """Rows ``a_j(w) = C_j w + a0_j`` with supports masked per row."""
    mats, offsets, supports = [], [], []
    for _ in range(r):
        k = int(rng.integers(1, n + 1))
        cols = rng.choice(n, size=k, replace=False)
        d = int(rng.integers(0, d_max + 1))
        C = np.zeros((n, d))
        C[cols] = rng.normal(size=(k, d))
        a0 = np.zeros(n)
        a0[cols] = rng.normal(size=k)
        mats.append(C)
        offsets.append(a0)
        supports.append(IndexSet.of(cols))

    def sampler(g):
        return np.stack([a0 + C @ g.uniform(-1, 1, size=C.shape[1]) for C, a0 in zip(mats, offsets)])

    rows = [RowStructure(j, s, len(s)) for j, s in enumerate(supports)]
    return rows, sampler


# (sort key, line) pairs written by the acceptance suite and printed at session end
ACCEPTANCE_LOG: list[tuple[int, str]] = []
