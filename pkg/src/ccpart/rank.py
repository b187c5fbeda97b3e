"""Support-rank oracles.

Two estimates of the support rank of a set of constraint rows are offered:

* the variable-support proxy, i.e. the number of continuous variables that
  enter any of the rows (an upper bound on the support rank), and
* a sampled numeric rank for rows that are linear in the continuous decision:
  the rows' coefficient vectors are drawn at M samples of the uncertainty and
  the dimension of their span is read off a pivoted QR factorization.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from .setfn import GroundSet, IndexSet, SetFunctionOracle

__all__ = [
    "RowStructure",
    "RankOracle",
    "support_proxy_rank",
    "sampled_linear_rank",
    "numeric_rank",
    "ChunkedUnion",
]

DEFAULT_RANK_TOL = 1e-9
DEFAULT_EXTRA_SAMPLES = 5


@dataclass(frozen=True)
class RowStructure:
    """Structural data of one constraint row.

    ``nnz`` counts stored nonzero coefficients; ``flops`` defaults to
    ``2 * nnz`` (one multiply and one add per stored nonzero).
    """

    row_id: int
    var_support: IndexSet
    nnz: int
    flops: int = 0

    def __post_init__(self):
        if self.nnz < 1:
            raise ValueError(f"row {self.row_id}: nnz must be positive")
        if self.flops == 0:
            object.__setattr__(self, "flops", 2 * self.nnz)
        if self.flops < 1:
            raise ValueError(f"row {self.row_id}: flops must be positive")


class ChunkedUnion:
    """Fast union of per-row bitmasks over a row bitmask.

    Rows are grouped into 8-bit chunks; each chunk has a 256-entry table of
    pre-OR'ed masks, so a union costs ``ceil(r / 8)`` lookups.
    """

    CHUNK = 8

    def __init__(self, masks: Sequence[int]):
        self.r = len(masks)
        self.tables: list[list[int]] = []
        for start in range(0, self.r, self.CHUNK):
            block = masks[start:start + self.CHUNK]
            table = [0] * (1 << len(block))
            for sub in range(1, len(table)):
                low = sub & -sub
                table[sub] = table[sub ^ low] | block[low.bit_length() - 1]
            self.tables.append(table)

    def __call__(self, mask: int) -> int:
        out = 0
        for table, byte in zip(self.tables, mask.to_bytes(len(self.tables), "little")):
            if byte:
                out |= table[byte]
        return out


def support_proxy_rank(rows: Sequence[RowStructure], A: IndexSet, n: Optional[int] = None) -> int:
    """Number of continuous variables entering the rows in ``A`` (capped at n)."""
    union = 0
    for j in A:
        union |= rows[j].var_support.mask
    count = union.bit_count()
    return min(count, n) if n is not None else count


def numeric_rank(M: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> int:
    """Rank from column-pivoted QR: diagonal entries above ``tol * |R_00|``."""
    if M.size == 0:
        return 0
    R = scipy.linalg.qr(M, mode="r", pivoting=True, check_finite=False)[0]
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return 0
    return int(np.count_nonzero(diag > tol * diag[0]))


class RankOracle:
    """Support-rank oracle of one of two kinds.

    ``support_proxy`` needs ``rows``. ``sampled_linear`` needs ``sampler``, a
    function ``rng -> ndarray (r, n)`` returning the coefficient rows at one
    draw of the uncertainty; M draws are taken once from ``seed`` and reused
    for every queried set, so ranks of different sets are computed from the
    same realizations.
    """

    def __init__(
        self,
        kind: str,
        n: int,
        r: int,
        rows: Optional[Sequence[RowStructure]] = None,
        sampler: Optional[Callable[[np.random.Generator], np.ndarray]] = None,
        samples: Optional[int] = None,
        tol: float = DEFAULT_RANK_TOL,
        seed: int = 0,
    ):
        if kind not in ("support_proxy", "sampled_linear"):
            raise ValueError(f"unknown rank oracle kind {kind!r}")
        self.kind = kind
        self.n = int(n)
        self.r = int(r)
        self.rows = list(rows) if rows is not None else None
        self.sampler = sampler
        self.samples = samples if samples is not None else self.n + DEFAULT_EXTRA_SAMPLES
        self.tol = tol
        self.seed = seed
        self.degenerate = False
        self._draws: dict[int, np.ndarray] = {}
        if kind == "support_proxy":
            if self.rows is None or len(self.rows) != self.r:
                raise ValueError("support_proxy rank needs one RowStructure per row")
            self._union = ChunkedUnion([row.var_support.mask for row in self.rows])
        elif sampler is None:
            raise ValueError("sampled_linear rank needs a coefficient sampler")
        if tol <= 0:
            raise ValueError("rank tolerance must be positive")

    def draws(self, seed: Optional[int] = None) -> np.ndarray:
        """Coefficient draws of shape (M, r, n) for ``seed`` (cached)."""
        seed = self.seed if seed is None else seed
        cached = self._draws.get(seed)
        if cached is None:
            rng = np.random.default_rng(seed)
            cached = np.stack([np.asarray(self.sampler(rng), dtype=float) for _ in range(self.samples)])
            if cached.shape[1:] != (self.r, self.n):
                raise ValueError(f"sampler returned shape {cached.shape[1:]}, expected {(self.r, self.n)}")
            self._draws[seed] = cached
        return cached

    def rank(self, A: IndexSet, seed: Optional[int] = None) -> int:
        if not A:
            return 0
        if self.kind == "support_proxy":
            return min(self._union(A.mask).bit_count(), self.n)
        return sampled_linear_rank(self, A, seed)

    def as_oracle(self, name: str = "rho") -> SetFunctionOracle:
        """Counted oracle over row masks. Only the sampled kind is memoized:
        a support union is cheaper than a cache lookup plus the memory it holds."""
        if self.kind == "support_proxy":
            union, n = self._union, self.n
            return SetFunctionOracle(None, GroundSet(self.r), memoize=False, name=name,
                                     mask_evaluator=lambda m: min(union(m).bit_count(), n))
        return SetFunctionOracle(lambda A: self.rank(A), GroundSet(self.r), name=name)


def sampled_linear_rank(oracle: RankOracle, A: IndexSet, seed: Optional[int] = None) -> int:
    """Numeric rank of the stacked ``|A| * M`` sampled coefficient rows."""
    if oracle.kind != "sampled_linear":
        raise ValueError("sampled_linear_rank needs a sampled_linear oracle")
    if not A:
        return 0
    idx = A.to_list()
    stacked = oracle.draws(seed)[:, idx, :].reshape(-1, oracle.n)
    if not np.any(stacked):
        oracle.degenerate = True
        warnings.warn(f"all sampled coefficient rows are zero for {A}", RuntimeWarning, stacklevel=2)
        return 0
    return numeric_rank(stacked, oracle.tol)
