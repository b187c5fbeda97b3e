"""Assembly and solution of partitioned scenario programs.

Each part of a plan gets its own sample substream (spawned from the master
seed) and contributes ``K_i`` copies of its rows; deterministic rows are
added once. Continuous programs go to the dual simplex in ``simplex``;
programs with binaries are solved by enumerating the feasible binary
configurations.
"""
from __future__ import annotations

import base64
import hashlib
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import ProblemSpec, to_json
from .partition import AllocatedPlan
from .simplex import FEAS_TOL, LPResult, solve_inequality_lp

__all__ = [
    "ScenarioError",
    "ScenarioProgram",
    "Solution",
    "build_scenario_program",
    "solve_lp",
    "solve_mixed",
    "max_sample_violation",
]


class ScenarioError(ValueError):
    pass


@dataclass
class ScenarioProgram:
    n: int
    b: int
    objective: np.ndarray
    parts: list[list[int]]
    K: list[int]
    A: np.ndarray  # sampled rows, A x <= rhs
    rhs: np.ndarray
    row_id: np.ndarray
    row_part: np.ndarray
    det_A: np.ndarray
    det_Y: np.ndarray
    det_rhs: np.ndarray
    det_eq: np.ndarray
    configurations: list[tuple[int, ...]]
    seed: int
    bound: str
    draws: list[np.ndarray] = field(default_factory=list)

    @property
    def sampled_rows(self) -> int:
        return self.A.shape[0]

    def to_dict(self) -> dict:
        def pack(a: np.ndarray) -> dict:
            a = np.ascontiguousarray(a)
            return {"dtype": str(a.dtype), "shape": list(a.shape),
                    "data": base64.b64encode(zlib.compress(a.tobytes(), 6)).decode("ascii")}

        return {
            "schema": 1,
            "n": self.n,
            "b": self.b,
            "seed": self.seed,
            "bound": self.bound,
            "parts": self.parts,
            "K": self.K,
            "objective": pack(self.objective),
            "A": pack(self.A),
            "rhs": pack(self.rhs),
            "row_id": pack(self.row_id),
            "row_part": pack(self.row_part),
            "det_A": pack(self.det_A),
            "det_Y": pack(self.det_Y),
            "det_rhs": pack(self.det_rhs),
            "det_eq": pack(self.det_eq),
            "configurations": [list(y) for y in self.configurations],
        }

    def to_json(self) -> str:
        return to_json(self.to_dict())

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()


@dataclass
class Solution:
    x_star: Optional[np.ndarray]
    y_star: tuple[int, ...]
    objective_value: float
    status: str  # optimal | infeasible | unbounded | iteration_limit
    max_primal_residual: float = float("nan")
    complementarity_residual: float = float("nan")
    iterations: int = 0
    certificate_row: Optional[int] = None
    configurations_solved: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "optimal"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "objective_value": self.objective_value,
            "x_star": None if self.x_star is None else [float(v) for v in self.x_star],
            "y_star": list(self.y_star),
            "max_primal_residual": self.max_primal_residual,
            "complementarity_residual": self.complementarity_residual,
            "iterations": self.iterations,
            "certificate_row": self.certificate_row,
            "configurations_solved": self.configurations_solved,
        }

    def digest(self) -> str:
        return hashlib.sha256(to_json(self.to_dict()).encode("utf-8")).hexdigest()


def build_scenario_program(
    problem: ProblemSpec,
    plan: AllocatedPlan,
    bound: str = "implicit",
    seed: int = 0,
    K: Optional[Sequence[int]] = None,
) -> ScenarioProgram:
    """Instantiate every part's rows at its own ``K_i`` i.i.d. draws.

    ``K`` overrides the plan's sample sizes (one entry per part).
    """
    if plan.partition.r != problem.r:
        raise ScenarioError(f"plan partitions {plan.partition.r} rows, problem has {problem.r}")
    sizes = list(K) if K is not None else plan.sample_sizes(bound)
    if len(sizes) != plan.P or any(int(k) != k or k < 1 for k in sizes):
        raise ScenarioError(f"need one positive integer sample size per part, got {sizes}")
    streams = np.random.SeedSequence(seed).spawn(plan.P)
    blocks, rhs, row_id, row_part, draws = [], [], [], [], []
    for i, (part, k) in enumerate(zip(plan.partition, sizes)):
        rows = part.to_list()
        W = problem.sample_w(np.random.default_rng(streams[i]), int(k))
        try:
            A, c = problem.instantiate(rows, W)
        except Exception as exc:  # pragma: no cover - defensive
            raise ScenarioError(f"sampler failed for rows {rows[:5]}...: {exc}") from exc
        blocks.append(A.reshape(-1, problem.n))
        rhs.append(-c.ravel())
        row_id.append(np.tile(np.asarray(rows), int(k)))
        row_part.append(np.full(len(rows) * int(k), i))
        draws.append(W)
    det = problem.deterministic
    det_A = np.zeros((len(det), problem.n))
    det_Y = np.zeros((len(det), problem.b))
    for j, row in enumerate(det):
        for v, a in row.coef:
            det_A[j, v] += a
        for v, a in row.ycoef:
            det_Y[j, v] += a
    return ScenarioProgram(
        n=problem.n,
        b=problem.b,
        objective=np.asarray(problem.objective, dtype=float),
        parts=plan.partition.to_lists(),
        K=[int(k) for k in sizes],
        A=np.vstack(blocks),
        rhs=np.concatenate(rhs),
        row_id=np.concatenate(row_id).astype(np.int64),
        row_part=np.concatenate(row_part).astype(np.int64),
        det_A=det_A,
        det_Y=det_Y,
        det_rhs=np.array([row.rhs for row in det], dtype=float),
        det_eq=np.array([row.sense == "==" for row in det], dtype=bool),
        configurations=problem.feasible_configurations() if problem.b else [()],
        seed=seed,
        bound=bound,
        draws=draws,
    )


def _continuous_system(sp: ScenarioProgram, y: Sequence[int]) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """Rows ``A x <= rhs`` for fixed y, or None if a y-only row is violated."""
    yv = np.asarray(y, dtype=float) if sp.b else np.zeros(0)
    rhs = sp.det_rhs - (sp.det_Y @ yv if sp.b else 0.0)
    has_x = np.any(sp.det_A != 0.0, axis=1)
    for j in np.flatnonzero(~has_x):
        if rhs[j] < -1e-9 or (sp.det_eq[j] and rhs[j] > 1e-9):
            return None
    A = [sp.A, sp.det_A[has_x]]
    b = [sp.rhs, rhs[has_x]]
    eq = sp.det_eq & has_x
    if eq.any():
        A.append(-sp.det_A[eq])
        b.append(-rhs[eq])
    return np.vstack(A), np.concatenate(b)


def max_sample_violation(sp: ScenarioProgram, x: np.ndarray) -> float:
    """Largest scaled violation ``(a.x - rhs) / (1 + max|a|)`` over the sampled rows."""
    scale = 1.0 + np.abs(sp.A).max(axis=1)
    return float(np.max((sp.A @ x - sp.rhs) / scale))


def _solve_fixed(sp: ScenarioProgram, y: Sequence[int]) -> Solution:
    system = _continuous_system(sp, y)
    if system is None:
        return Solution(None, tuple(y), float("nan"), "infeasible")
    A, b = system
    res: LPResult = solve_inequality_lp(sp.objective, A, b)
    if res.status != "optimal":
        return Solution(None, tuple(y), res.objective, res.status, iterations=res.iterations,
                        certificate_row=res.certificate_row)
    if max_sample_violation(sp, res.x) > FEAS_TOL:
        raise ScenarioError("solver returned a point violating a sampled row")
    return Solution(res.x, tuple(int(v) for v in y), res.objective, "optimal", res.max_primal_residual,
                    res.complementarity_residual, res.iterations, configurations_solved=1)


def solve_lp(sp: ScenarioProgram) -> Solution:
    """Solve a scenario program without binaries."""
    if sp.b:
        raise ScenarioError("program has binary variables; use solve_mixed")
    return _solve_fixed(sp, ())


def solve_mixed(sp: ScenarioProgram, configurations: Optional[Sequence[Sequence[int]]] = None,
                threads: int = 1) -> Solution:
    """Best solution over the feasible binary configurations.

    One LP per configuration; the lowest objective wins and ties go to the
    lexicographically smallest y.
    """
    if not sp.b:
        return solve_lp(sp)
    configs = sorted(tuple(int(v) for v in y) for y in (configurations if configurations is not None else sp.configurations))
    if not configs:
        return Solution(None, (), float("nan"), "infeasible")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda y: _solve_fixed(sp, y), configs))
    else:
        results = [_solve_fixed(sp, y) for y in configs]
    best = None
    for sol in results:
        if sol.status == "unbounded":
            return sol
        if sol.status == "optimal" and (best is None or sol.objective_value < best.objective_value):
            best = sol
    iterations = sum(s.iterations for s in results)
    if best is None:
        limit = any(s.status == "iteration_limit" for s in results)
        return Solution(None, (), float("nan"), "iteration_limit" if limit else "infeasible", iterations=iterations,
                        configurations_solved=len(configs))
    best.iterations = iterations
    best.configurations_solved = len(configs)
    return best

