"""Revised simplex for inequality LPs with few variables and many rows.

The primal ``min c.x  s.t.  A x <= b`` (x free) is solved through its dual
``min b.lam  s.t.  A^T lam = -c, lam >= 0``. A dual basis is a set of n
primal rows, so every factorization is n x n no matter how many rows there
are. The simplex multipliers of the dual are the primal point, and the
reduced costs are the primal slacks: pricing picks the most violated primal
row, scaled by ``1 + max|a_j|``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["LPResult", "solve_inequality_lp", "FEAS_TOL", "OPT_TOL", "MAX_ITER", "BLAND_AFTER"]

FEAS_TOL = 1e-7
OPT_TOL = 1e-6
MAX_ITER = 100_000
BLAND_AFTER = 1_000
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 50


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    x: Optional[np.ndarray]
    objective: float
    iterations: int
    basis: list[int] = field(default_factory=list)
    duals: Optional[np.ndarray] = None
    certificate_row: Optional[int] = None
    max_primal_residual: float = float("nan")
    complementarity_residual: float = float("nan")


class _Basis:
    """Dual basis: columns are primal rows (index < m) or artificials (m + i)."""

    def __init__(self, A: np.ndarray, signs: np.ndarray):
        self.A = A
        self.m, self.n = A.shape
        self.signs = signs
        self.cols = [self.m + i for i in range(self.n)]
        self.Binv = np.diag(1.0 / signs)

    def column(self, k: int) -> np.ndarray:
        if k < self.m:
            return self.A[k]
        e = np.zeros(self.n)
        e[k - self.m] = self.signs[k - self.m]
        return e

    def matrix(self) -> np.ndarray:
        return np.column_stack([self.column(k) for k in self.cols])

    def refactor(self) -> None:
        self.Binv = np.linalg.inv(self.matrix())

    def pivot(self, p: int, k: int, alpha: np.ndarray) -> None:
        Binv = self.Binv
        row = Binv[p] / alpha[p]
        Binv -= np.outer(alpha, row)
        Binv[p] = row
        self.cols[p] = k


def solve_inequality_lp(
    c: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    feas_tol: float = FEAS_TOL,
    opt_tol: float = OPT_TOL,
    max_iter: int = MAX_ITER,
    bland_after: int = BLAND_AFTER,
) -> LPResult:
    """Solve ``min c.x  s.t.  A x <= b`` with x free.

    Returns ``status='infeasible'`` with the index of a primal row whose dual
    ray certifies infeasibility, ``'unbounded'`` when the dual has no
    feasible point but the primal has one, or ``'iteration_limit'``.
    """
    c = np.ascontiguousarray(c, dtype=float)
    A = np.ascontiguousarray(A, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError(f"shape mismatch: c {c.shape}, A {A.shape}, b {b.shape}")
    row_scale = 1.0 + np.abs(A).max(axis=1) if m else np.ones(0)
    rhs = -c
    signs = np.where(rhs >= 0.0, 1.0, -1.0)
    basis = _Basis(A, signs)
    lam = basis.Binv @ rhs
    iterations = 0
    is_basic = np.zeros(m, dtype=bool)

    def run_phase(phase: int):
        """Returns None on optimality, or a terminal status string."""
        nonlocal lam, iterations
        degenerate = 0
        since_refactor = 0
        while True:
            if iterations >= max_iter:
                return "iteration_limit", None
            cB = np.array([(1.0 if k >= m else 0.0) if phase == 1 else (b[k] if k < m else 0.0) for k in basis.cols])
            pi = basis.Binv.T @ cB
            d = (0.0 if phase == 1 else b) - A @ pi
            scaled = d / row_scale
            scaled[is_basic] = 0.0
            tol = feas_tol if phase == 2 else 1e-11
            candidates = np.flatnonzero(scaled < -tol)
            if candidates.size == 0:
                if since_refactor:
                    basis.refactor()
                    lam = basis.Binv @ rhs
                    since_refactor = 0
                    continue
                return None, pi
            if degenerate >= bland_after:
                q = int(candidates[0])
            else:
                q = int(candidates[np.argmin(scaled[candidates])])
            alpha = basis.Binv @ A[q]
            amax = np.abs(alpha).max()
            positive = np.flatnonzero(alpha > PIVOT_TOL * max(1.0, amax))
            # artificials stuck in the basis at zero must stay there
            if phase == 2:
                art = np.array([k >= m for k in basis.cols])
                if np.any(art & (np.abs(alpha) > PIVOT_TOL * max(1.0, amax))):
                    positive = np.union1d(positive, np.flatnonzero(art & (np.abs(alpha) > PIVOT_TOL * max(1.0, amax))))
            if positive.size == 0:
                if phase == 1:
                    raise RuntimeError("phase-one objective unbounded; inconsistent basis")
                return "infeasible", q
            lam_pos = np.maximum(lam[positive], 0.0)
            ratios = lam_pos / np.abs(alpha[positive])
            t = ratios.min()
            ties = positive[ratios <= t + 1e-12 * (1.0 + t)]
            if degenerate >= bland_after:
                p = int(min(ties, key=lambda i: basis.cols[i]))
            else:
                p = int(ties[np.argmax(np.abs(alpha[ties]))])
            step = lam[p] / alpha[p] if alpha[p] != 0 else 0.0
            step = max(step, 0.0)
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            leaving = basis.cols[p]
            if leaving < m:
                is_basic[leaving] = False
            is_basic[q] = True
            lam = lam - step * alpha
            lam[p] = step
            basis.pivot(p, q, alpha)
            iterations += 1
            since_refactor += 1
            if since_refactor >= REFACTOR_EVERY:
                basis.refactor()
                lam = basis.Binv @ rhs
                since_refactor = 0

    status, _ = run_phase(1)
    if status is not None:
        return LPResult(status, None, float("nan"), iterations)
    art_total = sum(max(lam[i], 0.0) for i, k in enumerate(basis.cols) if k >= m)
    if art_total > 1e-9 * (1.0 + np.abs(c).max(initial=0.0)):
        # no dual point: the primal is unbounded or infeasible; a zero objective tells them apart
        feas = solve_inequality_lp(np.zeros(n), A, b, feas_tol, opt_tol, max_iter, bland_after)
        if feas.status == "optimal":
            return LPResult("unbounded", None, -float("inf"), iterations + feas.iterations)
        return LPResult(feas.status, None, float("nan"), iterations + feas.iterations,
                        certificate_row=feas.certificate_row)
    # drive zero-level artificials out of the basis where possible
    for p, k in enumerate(list(basis.cols)):
        if k < m:
            continue
        row = basis.Binv[p] @ A.T
        row[is_basic] = 0.0
        j = int(np.argmax(np.abs(row))) if m else -1
        if m and abs(row[j]) > PIVOT_TOL * (1.0 + np.abs(row).max()):
            alpha = basis.Binv @ A[j]
            basis.pivot(p, j, alpha)
            is_basic[j] = True
            lam[p] = 0.0
    basis.refactor()
    lam = basis.Binv @ rhs
    status, info = run_phase(2)
    if status == "infeasible":
        return LPResult("infeasible", None, float("nan"), iterations, list(basis.cols), certificate_row=int(info))
    if status is not None:
        return LPResult(status, None, float("nan"), iterations, list(basis.cols))
    x = info
    duals = np.zeros(m)
    for i, k in enumerate(basis.cols):
        if k < m:
            duals[k] = max(lam[i], 0.0)
    slack = b - A @ x
    primal_res = float(np.max(np.maximum(-slack, 0.0) / row_scale)) if m else 0.0
    obj = float(c @ x)
    comp = float(np.abs(duals * slack).sum() / (1.0 + abs(obj)))
    gap = abs(obj + float(b @ duals)) / (1.0 + abs(obj))
    return LPResult("optimal", x, obj, iterations, list(basis.cols), duals, None, primal_res, max(comp, gap))
