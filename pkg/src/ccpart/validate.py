"""Monte-Carlo estimates of per-part and total violation probabilities."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import ProblemSpec
from .partition import AllocatedPlan
from .scenario import Solution

__all__ = ["PartViolation", "ViolationEstimate", "empirical_violation", "wilson_upper", "VALIDATION_STREAM"]

WILSON_Z = 1.959963984540054
VALIDATION_STREAM = 0x56414C  # mixed into the seed so validation draws never reuse construction draws
CHUNK = 10_000
VIOLATION_TOL = 1e-7


def wilson_upper(violations: int, trials: int, z: float = WILSON_Z) -> float:
    """Upper end of the Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = violations / trials
    z2 = z * z
    centre = p + z2 / (2 * trials)
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    return min(1.0, (centre + half) / (1 + z2 / trials))


@dataclass(frozen=True)
class PartViolation:
    part: str
    violations: int
    trials: int

    @property
    def rate(self) -> float:
        return self.violations / self.trials

    @property
    def wilson95(self) -> float:
        return wilson_upper(self.violations, self.trials)


@dataclass
class ViolationEstimate:
    per_part: list[PartViolation]
    total: PartViolation
    seed: int
    epsilons: list[float]
    epsilon: float

    @property
    def union_bound_ok(self) -> bool:
        return self.total.violations <= sum(p.violations for p in self.per_part)

    @property
    def passed(self) -> bool:
        """Raw rates against the targets: each part within its share, the total within epsilon."""
        return self.total.rate <= self.epsilon and all(p.rate <= e for p, e in zip(self.per_part, self.epsilons))

    def to_csv(self, manifest_sha256: Optional[str] = None) -> str:
        buf = io.StringIO()
        if manifest_sha256:
            buf.write(f"# manifest_sha256={manifest_sha256}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["part", "violations", "trials", "rate", "wilson95"])
        for p in self.per_part + [self.total]:
            w.writerow([p.part, p.violations, p.trials, repr(p.rate), repr(p.wilson95)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        def entry(p: PartViolation, target: float) -> dict:
            return {"part": p.part, "violations": p.violations, "trials": p.trials, "rate": p.rate,
                    "wilson95": p.wilson95, "target": target}

        return {
            "seed": self.seed,
            "per_part": [entry(p, e) for p, e in zip(self.per_part, self.epsilons)],
            "total": entry(self.total, self.epsilon),
            "union_bound_ok": self.union_bound_ok,
            "passed": self.passed,
        }


def empirical_violation(
    problem: ProblemSpec,
    solution: Solution,
    plan: AllocatedPlan,
    trials: int = 100_000,
    seed: int = 0,
    chunk: int = CHUNK,
) -> ViolationEstimate:
    """Count violations of each part and of the whole constraint at fresh draws.

    A row counts as violated when ``f_j > 1e-7 (1 + |f_j at w = 0|)``. Draws
    come in chunks, each from its own substream of
    ``SeedSequence([seed, VALIDATION_STREAM])``; counts are reduced in chunk
    order, so a fixed (seed, trials, chunk) reproduces them exactly.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if solution.x_star is None:
        raise ValueError(f"solution has status {solution.status!r}; nothing to validate")
    alpha, B = problem.affine_in_w(solution.x_star)
    tol = VIOLATION_TOL * (1.0 + np.abs(alpha))
    masks = [np.asarray(part.to_list()) for part in plan.partition]
    part_counts = np.zeros(len(masks), dtype=np.int64)
    total = 0
    n_chunks = -(-trials // chunk)
    streams = np.random.SeedSequence([seed, VALIDATION_STREAM]).spawn(n_chunks)
    for c, ss in enumerate(streams):
        size = min(chunk, trials - c * chunk)
        W = problem.sample_w(np.random.default_rng(ss), size)
        F = alpha[None, :] + np.asarray(B @ W.T).T
        viol = F > tol[None, :]
        total += int(np.count_nonzero(viol.any(axis=1)))
        for i, rows in enumerate(masks):
            part_counts[i] += int(np.count_nonzero(viol[:, rows].any(axis=1)))
    per_part = [PartViolation(str(i), int(v), trials) for i, v in enumerate(part_counts)]
    return ViolationEstimate(per_part, PartViolation("TOTAL", total, trials), seed, list(plan.epsilons), plan.epsilon)
