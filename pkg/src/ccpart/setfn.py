"""Ground sets, bitmask index sets and counted set-function oracles.

Subsets of the row indices ``{0, ..., r-1}`` are stored as Python integers
used as bitmasks, so there is no size limit on ``r`` and set algebra is a
handful of integer operations.
"""
from __future__ import annotations

import math
import sys
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

__all__ = [
    "GroundSet",
    "IndexSet",
    "SetFunctionOracle",
    "SubmodularityReport",
    "SetFunctionError",
    "check_monotone_submodular",
    "estimate_submodularity_ratio",
    "mu_lower_bound_product",
]

EXHAUSTIVE_MAX_SIZE = 16


class SetFunctionError(ValueError):
    """Raised for out-of-range sets, size guards and broken oracle contracts."""


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class IndexSet:
    """Duplicate-free set of row indices backed by a bitmask."""

    mask: int = 0

    def __post_init__(self):
        if self.mask < 0:
            raise SetFunctionError("index set mask must be non-negative")

    @classmethod
    def of(cls, indices: Iterable[int]) -> "IndexSet":
        mask = 0
        for i in indices:
            i = int(i)
            if i < 0:
                raise SetFunctionError(f"negative index {i}")
            mask |= 1 << i
        return cls(mask)

    @classmethod
    def range(cls, start: int, stop: int) -> "IndexSet":
        if stop <= start:
            return cls(0)
        return cls(((1 << (stop - start)) - 1) << start)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __contains__(self, i: int) -> bool:
        return i >= 0 and (self.mask >> i) & 1 == 1

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask | other.mask)

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask & other.mask)

    def __sub__(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(self.mask & ~other.mask)

    def __le__(self, other: "IndexSet") -> bool:
        return self.mask & ~other.mask == 0

    def __lt__(self, other: "IndexSet") -> bool:
        return self <= other and self.mask != other.mask

    def add(self, i: int) -> "IndexSet":
        return IndexSet(self.mask | (1 << i))

    def min(self) -> int:
        if not self.mask:
            raise SetFunctionError("min() of an empty index set")
        return (self.mask & -self.mask).bit_length() - 1

    def max(self) -> int:
        if not self.mask:
            raise SetFunctionError("max() of an empty index set")
        return self.mask.bit_length() - 1

    def to_list(self) -> list[int]:
        return list(iter_bits(self.mask))

    def __repr__(self) -> str:
        return "IndexSet({" + ", ".join(map(str, self)) + "})"


@dataclass(frozen=True)
class GroundSet:
    """The row index set ``{0, ..., size-1}``."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise SetFunctionError(f"ground set size must be >= 1, got {self.size}")

    @property
    def full(self) -> IndexSet:
        return IndexSet((1 << self.size) - 1)

    def contains(self, A: IndexSet) -> bool:
        return A.mask >> self.size == 0

    def check(self, A: IndexSet) -> None:
        if not self.contains(A):
            bad = [i for i in A if i >= self.size]
            raise SetFunctionError(f"indices {bad} outside ground set of size {self.size}")

    def subsets(self) -> Iterator[IndexSet]:
        for mask in range(1 << self.size):
            yield IndexSet(mask)


class SetFunctionOracle:
    """Counted, optionally memoized evaluation of a set function.

    ``eval_count`` counts calls of the underlying evaluator, i.e. cache misses
    when memoization is on. ``mask_evaluator`` takes raw bitmasks and skips
    building an IndexSet per call. The cache and the counter are guarded by a lock,
    so an oracle can be shared between threads.
    """

    def __init__(
        self,
        evaluator: Optional[Callable[[IndexSet], float]],
        ground: GroundSet | int,
        memoize: bool = True,
        name: str = "",
        mask_evaluator: Optional[Callable[[int], float]] = None,
    ):
        if evaluator is None and mask_evaluator is None:
            raise SetFunctionError("need an evaluator")
        self.evaluator = evaluator if evaluator is not None else (lambda A: mask_evaluator(A.mask))
        self._raw = mask_evaluator if mask_evaluator is not None else (lambda m: self.evaluator(IndexSet(m)))
        self.ground = ground if isinstance(ground, GroundSet) else GroundSet(int(ground))
        self.memoize = memoize
        self.name = name
        self.eval_count = 0
        self._memo: dict[int, float] = {}
        self._lock = threading.Lock()

    @property
    def size(self) -> int:
        return self.ground.size

    def evaluate(self, A: IndexSet) -> float:
        self.ground.check(A)
        return self.value(A.mask)

    __call__ = evaluate

    def value(self, mask: int) -> float:
        """Evaluate on a raw bitmask (no range check; hot path)."""
        if self.memoize:
            v = self._memo.get(mask)
            if v is not None:
                return v
        v = self._raw(mask)
        with self._lock:
            self.eval_count += 1
            if self.memoize:
                self._memo[mask] = v
        return v

    def cache_size(self) -> int:
        return len(self._memo)

    def clear_cache(self) -> None:
        with self._lock:
            self._memo.clear()

    def table(self) -> np.ndarray:
        """Values on all ``2**r`` subsets, indexed by mask."""
        r = self.size
        if r > EXHAUSTIVE_MAX_SIZE:
            raise SetFunctionError(f"tabulating needs r <= {EXHAUSTIVE_MAX_SIZE}, got r={r}")
        return np.array([self.value(m) for m in range(1 << r)], dtype=float)

    def __repr__(self) -> str:
        return f"SetFunctionOracle({self.name or self.evaluator!r}, r={self.size}, evals={self.eval_count})"


@dataclass
class SubmodularityReport:
    checked_triples: int
    violations: list = field(default_factory=list)
    monotone_violations: list = field(default_factory=list)
    n_violations: int = 0
    mu_hat: float = 1.0

    @property
    def submodular(self) -> bool:
        return self.n_violations == 0

    @property
    def monotone(self) -> bool:
        return not self.monotone_violations

    @property
    def ok(self) -> bool:
        return self.submodular and self.monotone


def _violates(lhs: float, rhs: float, tol: float) -> bool:
    return lhs < rhs - tol * max(1.0, abs(lhs), abs(rhs))


def _superset_argmax(values: np.ndarray, r: int, skip_bit: int) -> tuple[np.ndarray, np.ndarray]:
    # best[A] = max over supersets B of A (with B not containing skip_bit) of values[B]
    best = values.copy()
    arg = np.arange(values.size)
    idx = np.arange(values.size)
    for k in range(r):
        if k == skip_bit:
            continue
        bit = 1 << k
        lo = idx[(idx & bit) == 0]
        hi = lo | bit
        take = best[hi] > best[lo]
        best[lo] = np.where(take, best[hi], best[lo])
        arg[lo] = np.where(take, arg[hi], arg[lo])
    return best, arg


def check_monotone_submodular(
    oracle: SetFunctionOracle,
    mode: str = "exhaustive",
    trials: int = 10_000,
    seed: int = 0,
    tol: float = 1e-12,
    max_report: int = 100,
) -> SubmodularityReport:
    """Check monotonicity and diminishing returns of ``oracle``.

    Exhaustive mode tabulates all ``2**r`` values and, for every element j,
    compares the marginal gain at each A (j not in A) against the largest
    marginal gain over all supersets B of A with j not in B. That covers every
    chain A <= B < J at ``O(r**2 2**r)`` cost. Sampled mode draws random
    chains from a seeded generator.
    """
    r = oracle.size
    if mode == "exhaustive":
        if r > EXHAUSTIVE_MAX_SIZE:
            raise SetFunctionError(
                f"exhaustive check limited to r <= {EXHAUSTIVE_MAX_SIZE} (got r={r}); use mode='sampled'"
            )
        f = oracle.table()
        masks = np.arange(1 << r)
        report = SubmodularityReport(checked_triples=r * 3 ** (r - 1) if r else 0)
        for j in range(r):
            bit = 1 << j
            without = masks[(masks & bit) == 0]
            gain = np.full(f.size, -np.inf)
            gain[without] = f[without | bit] - f[without]
            # monotone (local steps are enough)
            scale = tol * np.maximum(1.0, np.abs(f[without]))
            bad = without[gain[without] < -scale]
            for A in bad[: max_report - len(report.monotone_violations)]:
                report.monotone_violations.append(
                    (IndexSet(int(A)), IndexSet(int(A) | bit), float(f[A]), float(f[A | bit]))
                )
            best, arg = _superset_argmax(gain, r, j)
            lhs = gain[without]
            rhs = best[without]
            slack = tol * np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
            bad = without[lhs < rhs - slack]
            report.n_violations += int(bad.size)
            for A in bad:
                if len(report.violations) >= max_report:
                    break
                report.violations.append(
                    (IndexSet(int(A)), IndexSet(int(arg[A])), j, float(gain[A]), float(best[A]))
                )
        if r <= 10:
            report.mu_hat = _exhaustive_ratio(f, r)
        else:
            report.mu_hat = estimate_submodularity_ratio(oracle, trials=trials, seed=seed, check_monotone=False)
        return report

    if mode != "sampled":
        raise SetFunctionError(f"unknown mode {mode!r}; expected 'exhaustive' or 'sampled'")
    if trials < 1:
        raise SetFunctionError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    report = SubmodularityReport(checked_triples=0)
    for _ in range(trials):
        labels = rng.integers(0, 3, size=r)  # 0: in A, 1: in B only, 2: outside B
        outside = np.flatnonzero(labels == 2)
        if outside.size == 0:
            continue
        j = int(rng.choice(outside))
        A = _mask_of(np.flatnonzero(labels == 0))
        B = A | _mask_of(np.flatnonzero(labels == 1))
        bit = 1 << j
        fa, fb = oracle.value(A), oracle.value(B)
        lhs = oracle.value(A | bit) - fa
        rhs = oracle.value(B | bit) - fb
        report.checked_triples += 1
        if _violates(fb, fa, tol) and len(report.monotone_violations) < max_report:
            report.monotone_violations.append((IndexSet(A), IndexSet(B), fa, fb))
        if _violates(lhs, rhs, tol):
            report.n_violations += 1
            if len(report.violations) < max_report:
                report.violations.append((IndexSet(A), IndexSet(B), j, lhs, rhs))
    report.mu_hat = estimate_submodularity_ratio(oracle, trials=trials, seed=seed, check_monotone=False)
    return report


def _mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


_TINY = sys.float_info.min


def _clamp_ratio(value: float) -> float:
    return min(1.0, max(value, _TINY))


def _exhaustive_ratio(f: np.ndarray, r: int) -> float:
    best = math.inf
    full = (1 << r) - 1
    for A in range(1 << r):
        rest = full & ~A
        fa = f[A]
        B = rest
        while B:
            denom = f[A | B] - fa
            if denom > 0:
                num = sum(f[A | (1 << j)] - fa for j in iter_bits(B))
                best = min(best, num / denom)
            B = (B - 1) & rest
    return 1.0 if best is math.inf else _clamp_ratio(best)


def sample_disjoint_pairs(r: int, trials: int, seed: int) -> list[tuple[int, int]]:
    """Seeded disjoint pairs (A, B), B nonempty; same seed and r give the same pairs."""
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(trials):
        labels = rng.integers(0, 3, size=r)
        B = _mask_of(np.flatnonzero(labels == 1))
        if not B:
            B = 1 << int(rng.integers(r))
            labels[B.bit_length() - 1] = 1
        A = _mask_of(np.flatnonzero(labels == 0)) & ~B
        pairs.append((A, B))
    return pairs


def estimate_submodularity_ratio(
    oracle: SetFunctionOracle,
    trials: int = 10_000,
    seed: int = 0,
    pairs: Optional[Sequence[tuple[int, int]]] = None,
    check_monotone: bool = True,
    tol: float = 1e-12,
) -> float:
    """Sampled estimate of the submodularity ratio, clamped to (0, 1].

    The ratio of a pair (A, B) is ``sum_j gain(j | A) / gain(B | A)``. Pairs
    with zero joint gain are vacuous and skipped; with no informative pair the
    estimate is 1.
    """
    if pairs is None:
        if trials < 1:
            raise SetFunctionError("trials must be >= 1")
        pairs = sample_disjoint_pairs(oracle.size, trials, seed)
    best = math.inf
    for A, B in pairs:
        fa = oracle.value(A)
        fab = oracle.value(A | B)
        singles = [oracle.value(A | (1 << j)) - fa for j in iter_bits(B)]
        if check_monotone:
            scale = tol * max(1.0, abs(fa))
            if fab - fa < -scale or min(singles) < -scale:
                raise SetFunctionError(
                    f"oracle is not monotone on pair A={IndexSet(A)}, B={IndexSet(B)}"
                )
        denom = fab - fa
        if denom > 0:
            best = min(best, sum(singles) / denom)
    if best is math.inf:
        return 1.0
    return _clamp_ratio(best)


def mu_lower_bound_product(nu_weights: Sequence[float]) -> float:
    """Ratio guaranteed for rank x (positive modular cost): ``min_j w_j / sum(w)``."""
    w = [float(x) for x in nu_weights]
    if not w:
        raise SetFunctionError("need at least one weight")
    if any(x <= 0 for x in w):
        raise SetFunctionError("all cost weights must be strictly positive")
    return min(w) / math.fsum(w)


def enumerate_partitions(elements: Sequence[int]) -> Iterator[list[list[int]]]:
    """All set partitions of ``elements`` (Bell-number many)."""
    if not elements:
        yield []
        return
    first, rest = elements[0], elements[1:]
    for sub in enumerate_partitions(rest):
        for k in range(len(sub)):
            yield sub[:k] + [[first] + sub[k]] + sub[k + 1:]
        yield [[first]] + sub


def proper_subsets(mask: int) -> Iterator[int]:
    """Nonempty proper submasks of ``mask``."""
    sub = (mask - 1) & mask
    while sub:
        yield sub
        sub = (sub - 1) & mask

