"""Cost model of partitioned scenario programs, closed-form risk allocation
and the efficient-partitioning driver."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .bounds import (
    E_FACTOR,
    allocate_beta,
    explicit_sample_size_real,
    sample_size,
)
from .rank import RankOracle, RowStructure
from .setfn import GroundSet, IndexSet, SetFunctionOracle
from .submod import gsa

__all__ = [
    "METRIC_KINDS",
    "CostMetric",
    "Partition",
    "AllocatedPlan",
    "PartitionError",
    "sigma",
    "gamma_oracle",
    "optimal_epsilon",
    "total_cost",
    "continuous_cost",
    "efficient_partition",
    "plan_for_partition",
]

METRIC_KINDS = ("rows", "nnz", "flops", "samples", "custom")
DEFAULT_P_MAX = 8


class PartitionError(ValueError):
    pass


class CostMetric:
    """Monotone modular cost ``nu(A) = offset + sum_{j in A} weights[j]``.

    The ``samples`` kind is the constant function 1 (zero weights, offset 1).
    """

    def __init__(self, kind: str, weights: Sequence[float], offset: float = 0.0):
        if kind not in METRIC_KINDS:
            raise PartitionError(f"unknown metric {kind!r}; expected one of {METRIC_KINDS}")
        self.kind = kind
        self.weights = tuple(float(w) for w in weights)
        self.offset = float(offset)
        if not self.weights:
            raise PartitionError("metric needs at least one row")
        if self.offset < 0 or any(w < 0 for w in self.weights):
            raise PartitionError("metric weights and offset must be non-negative")
        if any(w + self.offset <= 0 for w in self.weights):
            raise PartitionError("every singleton must have positive cost")
        self._tables = []
        for start in range(0, len(self.weights), 8):
            block = self.weights[start:start + 8]
            table = [0.0] * (1 << len(block))
            for sub in range(1, len(table)):
                low = sub & -sub
                table[sub] = table[sub ^ low] + block[low.bit_length() - 1]
            self._tables.append(table)

    @classmethod
    def from_rows(cls, kind: str, rows: Sequence[RowStructure]) -> "CostMetric":
        if kind == "rows":
            return cls(kind, [1.0] * len(rows))
        if kind == "nnz":
            return cls(kind, [r.nnz for r in rows])
        if kind == "flops":
            return cls(kind, [r.flops for r in rows])
        if kind == "samples":
            return cls(kind, [0.0] * len(rows), offset=1.0)
        raise PartitionError(f"metric {kind!r} cannot be built from row structure; use CostMetric('custom', ...)")

    @property
    def r(self) -> int:
        return len(self.weights)

    def value(self, mask: int) -> float:
        total = self.offset
        for table, byte in zip(self._tables, mask.to_bytes(len(self._tables), "little")):
            if byte:
                total += table[byte]
        return total

    def __call__(self, A: IndexSet) -> float:
        return self.value(A.mask)

    def singleton(self, j: int) -> float:
        return self.weights[j] + self.offset

    def __repr__(self) -> str:
        return f"CostMetric({self.kind!r}, r={self.r})"


@dataclass(frozen=True)
class Partition:
    """Disjoint cover of ``{0..r-1}``, parts ordered by smallest index."""

    parts: tuple[IndexSet, ...]
    r: int

    @classmethod
    def of(cls, parts, r: int) -> "Partition":
        sets = [p if isinstance(p, IndexSet) else IndexSet.of(p) for p in parts]
        seen = 0
        for p in sets:
            if not p:
                raise PartitionError("partition has an empty part")
            if p.mask & seen:
                raise PartitionError("partition parts overlap")
            seen |= p.mask
        if seen != (1 << r) - 1:
            raise PartitionError(f"parts do not cover the {r} rows exactly")
        return cls(tuple(sorted(sets, key=lambda p: p.min())), r)

    @classmethod
    def trivial(cls, r: int) -> "Partition":
        return cls((GroundSet(r).full,), r)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def to_lists(self) -> list[list[int]]:
        return [p.to_list() for p in self.parts]


def _rho_value(rho, mask: int) -> int:
    if isinstance(rho, SetFunctionOracle):
        return rho.value(mask)
    if isinstance(rho, RankOracle):
        return rho.rank(IndexSet(mask))
    return rho(IndexSet(mask))


def as_rho_oracle(rho, r: int) -> SetFunctionOracle:
    if isinstance(rho, SetFunctionOracle):
        return rho
    if isinstance(rho, RankOracle):
        return rho.as_oracle()
    return SetFunctionOracle(rho, GroundSet(r), name="rho")


def sigma(A: IndexSet, P: int, beta: float, config_count: int, rho, metric: CostMetric) -> float:
    """``(ln(c P / beta) + rho(A) - 1) * nu(A)`` for nonempty A."""
    if not A:
        raise PartitionError("sigma is only defined on nonempty sets")
    if not 0.0 < beta < 1.0:
        raise PartitionError(f"beta must lie in (0, 1), got {beta}")
    return (math.log(config_count * P / beta) + _rho_value(rho, A.mask) - 1) * metric.value(A.mask)


def gamma_oracle(P: int, beta: float, config_count: int, rho: SetFunctionOracle, metric: CostMetric) -> SetFunctionOracle:
    """``gamma_P(A) = sqrt(sigma(A; P))`` as a counted oracle.

    Not memoized itself: it is a cheap combination of ``rho`` (which carries
    its own cache when that pays off) and the modular cost.
    """
    log_term = math.log(config_count * P / beta) - 1.0
    rho_value = rho.value
    nu = metric.value
    sqrt = math.sqrt

    def evaluate(m: int) -> float:
        return sqrt(max((log_term + rho_value(m)) * nu(m), 0.0)) if m else 0.0

    return SetFunctionOracle(None, GroundSet(metric.r), memoize=False, name=f"gamma_P{P}", mask_evaluator=evaluate)


def optimal_epsilon(sigmas: Sequence[float], eps: float) -> tuple[list[float], float]:
    """Risk split proportional to ``sqrt(sigma_i)`` and its continuous cost.

    Returns ``eps_i = eps sqrt(sigma_i) / sum_j sqrt(sigma_j)`` and
    ``e/(e-1) / eps * (sum_i sqrt(sigma_i))**2``.
    """
    if not 0.0 < eps < 1.0:
        raise PartitionError(f"eps must lie in (0, 1), got {eps}")
    if not sigmas:
        raise PartitionError("need at least one sigma")
    if any(s <= 0 for s in sigmas):
        raise PartitionError(f"all sigma must be positive, got {list(sigmas)}")
    roots = [math.sqrt(s) for s in sigmas]
    total = math.fsum(roots)
    epsilons = [eps * x / total for x in roots]
    return epsilons, E_FACTOR / eps * total * total


def _check_lengths(partition, *vectors) -> None:
    for v in vectors:
        if len(v) != len(partition):
            raise PartitionError(f"length mismatch: {len(v)} values for {len(partition)} parts")


def continuous_cost(partition, epsilons, betas, rho, metric: CostMetric, config_count: int = 1) -> float:
    """``sum_i K_i(real) * nu(P_i)`` with the explicit bound left unrounded."""
    _check_lengths(partition, epsilons, betas)
    return math.fsum(
        explicit_sample_size_real(e, b, _rho_value(rho, p.mask), config_count) * metric.value(p.mask)
        for p, e, b in zip(partition, epsilons, betas)
    )


def total_cost(partition, epsilons, betas, rho, metric: CostMetric, config_count: int = 1, bound: str = "explicit") -> float:
    """``sum_i K_i * nu(P_i)`` with integer sample sizes from the chosen bound."""
    _check_lengths(partition, epsilons, betas)
    return math.fsum(
        sample_size(bound, e, b, _rho_value(rho, p.mask), config_count).K * metric.value(p.mask)
        for p, e, b in zip(partition, epsilons, betas)
    )


@dataclass
class AllocatedPlan:
    partition: Partition
    epsilon: float
    beta: float
    config_count: int
    metric: str
    epsilons: list[float]
    betas: list[float]
    rho: list[int]
    nu: list[float]
    sigmas: list[float]
    K_explicit: list[int]
    K_implicit: list[int]
    predicted_cost_continuous: float
    predicted_cost_explicit: float
    predicted_cost_implicit: float
    trivial_cost_continuous: float = math.nan
    trivial_cost_explicit: float = math.nan
    oracle_eval_count: int = 0
    rho_eval_count: int = 0
    candidates: list[dict] = field(default_factory=list)

    @property
    def P(self) -> int:
        return len(self.partition)

    def sample_sizes(self, bound: str) -> list[int]:
        if bound == "explicit":
            return list(self.K_explicit)
        if bound == "implicit":
            return list(self.K_implicit)
        raise PartitionError(f"unknown bound kind {bound!r}")

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "r": self.partition.r,
            "P": self.P,
            "parts": self.partition.to_lists(),
            "epsilon": self.epsilon,
            "beta": self.beta,
            "config_count": self.config_count,
            "metric": self.metric,
            "epsilons": list(self.epsilons),
            "betas": list(self.betas),
            "rho": list(self.rho),
            "nu": list(self.nu),
            "sigmas": list(self.sigmas),
            "K_explicit": list(self.K_explicit),
            "K_implicit": list(self.K_implicit),
            "predicted_cost_continuous": self.predicted_cost_continuous,
            "predicted_cost_explicit": self.predicted_cost_explicit,
            "predicted_cost_implicit": self.predicted_cost_implicit,
            "trivial_cost_continuous": self.trivial_cost_continuous,
            "trivial_cost_explicit": self.trivial_cost_explicit,
            "oracle_eval_count": self.oracle_eval_count,
            "rho_eval_count": self.rho_eval_count,
            "candidates": list(self.candidates),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AllocatedPlan":
        try:
            part = Partition.of(d["parts"], int(d["r"]))
            return cls(
                partition=part,
                epsilon=float(d["epsilon"]),
                beta=float(d["beta"]),
                config_count=int(d["config_count"]),
                metric=str(d["metric"]),
                epsilons=[float(x) for x in d["epsilons"]],
                betas=[float(x) for x in d["betas"]],
                rho=[int(x) for x in d["rho"]],
                nu=[float(x) for x in d["nu"]],
                sigmas=[float(x) for x in d["sigmas"]],
                K_explicit=[int(x) for x in d["K_explicit"]],
                K_implicit=[int(x) for x in d["K_implicit"]],
                predicted_cost_continuous=float(d["predicted_cost_continuous"]),
                predicted_cost_explicit=float(d["predicted_cost_explicit"]),
                predicted_cost_implicit=float(d["predicted_cost_implicit"]),
                trivial_cost_continuous=float(d.get("trivial_cost_continuous", math.nan)),
                trivial_cost_explicit=float(d.get("trivial_cost_explicit", math.nan)),
                oracle_eval_count=int(d.get("oracle_eval_count", 0)),
                rho_eval_count=int(d.get("rho_eval_count", 0)),
                candidates=list(d.get("candidates", [])),
            )
        except KeyError as exc:
            raise PartitionError(f"plan document is missing field {exc.args[0]!r}") from None


def plan_for_partition(
    partition: Partition,
    rho,
    metric: CostMetric,
    eps: float,
    beta: float,
    config_count: int = 1,
    epsilons: Optional[Sequence[float]] = None,
) -> AllocatedPlan:
    """Attach risk allocation and sample sizes to a fixed partition.

    ``epsilons`` defaults to the closed-form optimum; ``beta`` is split equally.
    """
    P = len(partition)
    rho_o = as_rho_oracle(rho, partition.r)
    rhos = [int(rho_o.value(p.mask)) for p in partition]
    nus = [metric.value(p.mask) for p in partition]
    sig = [sigma(p, P, beta, config_count, rho_o, metric) for p in partition]
    if epsilons is None:
        epsilons, objective = optimal_epsilon(sig, eps)
    else:
        epsilons = [float(e) for e in epsilons]
        _check_lengths(partition, epsilons)
        objective = None
    betas = allocate_beta(beta, P)
    if objective is None:
        objective = continuous_cost(partition, epsilons, betas, rho_o, metric, config_count)
    K_exp = [sample_size("explicit", e, b, k, config_count).K for e, b, k in zip(epsilons, betas, rhos)]
    K_imp = [sample_size("implicit", e, b, k, config_count).K for e, b, k in zip(epsilons, betas, rhos)]
    return AllocatedPlan(
        partition=partition,
        epsilon=eps,
        beta=beta,
        config_count=config_count,
        metric=metric.kind,
        epsilons=list(epsilons),
        betas=betas,
        rho=rhos,
        nu=nus,
        sigmas=sig,
        K_explicit=K_exp,
        K_implicit=K_imp,
        predicted_cost_continuous=objective,
        predicted_cost_explicit=math.fsum(k * v for k, v in zip(K_exp, nus)),
        predicted_cost_implicit=math.fsum(k * v for k, v in zip(K_imp, nus)),
        rho_eval_count=rho_o.eval_count,
    )


def _problem_size(problem) -> tuple[int, Optional[int]]:
    if hasattr(problem, "rows") and hasattr(problem, "config_count"):
        return len(problem.rows), int(problem.config_count)
    if isinstance(problem, GroundSet):
        return problem.size, None
    return int(problem), None


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SCENARIO_PART_THREADS", "1")))
    except ValueError:
        return 1


def efficient_partition(
    problem,
    metric: CostMetric,
    eps: float,
    beta: float,
    P_max: Optional[int] = None,
    rho_oracle=None,
    config_count: Optional[int] = None,
    threads: Optional[int] = None,
) -> AllocatedPlan:
    """Greedy search over partition sizes for the cheapest partitioned program.

    For every ``P = 2..P_max`` the greedy splitting algorithm is run on
    ``gamma_P = sqrt(sigma(.; P))``; each candidate gets the closed-form risk
    allocation and is scored by its continuous explicit-bound cost. The
    cheapest candidate wins, the trivial partition being the incumbent and
    ties going to the smaller P. ``problem`` is a ``ProblemSpec``, a
    ``GroundSet`` or a row count.
    """
    r, spec_configs = _problem_size(problem)
    if config_count is None:
        config_count = spec_configs if spec_configs is not None else 1
    if metric.r != r:
        raise PartitionError(f"metric has {metric.r} rows, problem has {r}")
    if not 0.0 < eps < 1.0:
        raise PartitionError(f"eps must lie in (0, 1), got {eps}")
    if not 0.0 < beta < 1.0 / math.e:
        raise PartitionError(f"beta must lie in (0, 1/e), got {beta}")
    if rho_oracle is None:
        if not hasattr(problem, "row_structures"):
            raise PartitionError("a rank oracle is required when no problem description is given")
        rho_oracle = RankOracle("support_proxy", problem.n, r, rows=problem.row_structures())
    rho = as_rho_oracle(rho_oracle, r)
    if P_max is None:
        P_max = min(r, DEFAULT_P_MAX)
    if r >= 2 and not 2 <= P_max <= r:
        raise PartitionError(f"need 2 <= P_max <= r={r}, got {P_max}")

    trivial = Partition.trivial(r)
    trivial_sigma = sigma(trivial.parts[0], 1, beta, config_count, rho, metric)
    best_partition, best_cost = trivial, optimal_epsilon([trivial_sigma], eps)[1]
    candidates = [{"P": 1, "parts": trivial.to_lists(), "cost_continuous": best_cost}]
    gamma_evals = 0

    def run(P: int):
        gamma = gamma_oracle(P, beta, config_count, rho, metric)
        parts = gsa(gamma, GroundSet(r), P)
        sig = [sigma(p, P, beta, config_count, rho, metric) for p in parts]
        _, cost = optimal_epsilon(sig, eps)
        return P, Partition.of(parts, r), cost, gamma.eval_count

    if r >= 2:
        sizes = range(2, P_max + 1)
        n_threads = threads if threads is not None else default_threads()
        if n_threads > 1:
            with ThreadPoolExecutor(max_workers=n_threads) as pool:
                results = list(pool.map(run, sizes))
        else:
            results = [run(P) for P in sizes]
        for P, part, cost, evals in results:  # deterministic reduction in P order
            gamma_evals += evals
            candidates.append({"P": P, "parts": part.to_lists(), "cost_continuous": cost})
            if cost < best_cost:
                best_partition, best_cost = part, cost

    plan = plan_for_partition(best_partition, rho, metric, eps, beta, config_count)
    plan.trivial_cost_continuous = candidates[0]["cost_continuous"]
    plan.trivial_cost_explicit = total_cost(trivial, [eps], [beta], rho, metric, config_count)
    plan.oracle_eval_count = gamma_evals
    plan.rho_eval_count = rho.eval_count
    plan.candidates = candidates
    return plan

