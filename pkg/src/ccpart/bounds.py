"""Scenario sample sizes: the explicit closed-form bound and the implicit
binomial-tail bound, both with a feasible-binary-configuration factor."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoundsError",
    "RiskSpec",
    "SampleSizeResult",
    "explicit_sample_size",
    "explicit_sample_size_real",
    "binomial_tail_log",
    "implicit_sample_size",
    "sample_size",
    "allocate_beta",
]

E_FACTOR = math.e / (math.e - 1.0)
INTEGER_NUDGE = 1e-9
_LN_HALF = -math.log(2.0)


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class RiskSpec:
    """Violation level, confidence and binary-configuration count.

    ``config_count`` defaults to ``2**b``; pass the number of feasible
    binary configurations instead when it is known.
    """

    epsilon: float
    beta: float
    b: int = 0
    config_count: int | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise BoundsError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.beta < 1.0 / math.e:
            raise BoundsError(f"beta must lie in (0, 1/e), got {self.beta}")
        if self.b < 0:
            raise BoundsError(f"b must be non-negative, got {self.b}")
        if self.config_count is not None and not 1 <= self.config_count <= 2**self.b:
            raise BoundsError(f"config_count must lie in [1, 2**b], got {self.config_count}")

    @property
    def configs(self) -> int:
        return self.config_count if self.config_count is not None else 2**self.b


@dataclass(frozen=True)
class SampleSizeResult:
    K: int
    bound_kind: str
    epsilon: float
    beta: float
    rho: int
    config_count: int

    def __int__(self) -> int:
        return self.K


def _check_inputs(eps: float, beta: float, rho: int, config_count: int) -> None:
    if not 0.0 < eps < 1.0:
        raise BoundsError(f"eps_i must lie in (0, 1), got {eps}")
    if not 0.0 < beta < 1.0:
        raise BoundsError(f"beta_i must lie in (0, 1), got {beta}")
    if int(rho) != rho or rho < 1:
        raise BoundsError(f"rho must be an integer >= 1, got {rho}")
    if int(config_count) != config_count or config_count < 1:
        raise BoundsError(f"config_count must be an integer >= 1, got {config_count}")


def explicit_sample_size_real(eps: float, beta: float, rho: int, config_count: int = 1) -> float:
    """Right-hand side of the explicit bound before rounding."""
    return E_FACTOR / eps * (math.log(config_count / beta) + rho - 1)


def explicit_sample_size(eps: float, beta: float, rho: int, config_count: int = 1) -> SampleSizeResult:
    """Smallest integer K with ``K >= e/(e-1) / eps * (ln(c/beta) + rho - 1)``.

    Values within ``1e-9`` of an integer are snapped to it before the ceiling.
    """
    _check_inputs(eps, beta, rho, config_count)
    value = explicit_sample_size_real(eps, beta, rho, config_count)
    nearest = round(value)
    K = int(nearest) if abs(value - nearest) <= INTEGER_NUDGE else math.ceil(value)
    K = max(K, int(rho))
    return SampleSizeResult(K, "explicit", eps, beta, int(rho), int(config_count))


def _log_binom_coeffs(K: int, upto: int) -> np.ndarray:
    """``log C(K, l)`` for ``l = 0..upto`` via cumulative log-ratios."""
    i = np.arange(upto, dtype=float)
    steps = np.log((K - i) / (i + 1.0))
    out = np.empty(upto + 1)
    out[0] = 0.0
    np.cumsum(steps, out=out[1:])
    return out


def _logsumexp(t: np.ndarray) -> float:
    m = float(np.max(t))
    if m == -math.inf:
        return -math.inf
    return m + math.log(math.fsum(np.exp(t - m)))


def binomial_tail_log(rho: int, K: int, eps: float) -> float:
    """``ln sum_{l<rho} C(K,l) eps^l (1-eps)^(K-l)``, the binomial CDF at rho-1.

    Terms are summed in the log domain. When the lower tail exceeds 1/2 the
    complement is used (``log1p`` of minus the upper tail) so the result keeps
    its relative accuracy near zero.
    """
    if int(rho) != rho or int(K) != K:
        raise BoundsError("rho and K must be integers")
    rho, K = int(rho), int(K)
    if rho < 1:
        raise BoundsError(f"rho must be >= 1, got {rho}")
    if rho > K:
        raise BoundsError(f"rho={rho} exceeds K={K}")
    if not 0.0 < eps < 1.0:
        raise BoundsError(f"eps must lie in (0, 1), got {eps}")
    log_q = math.log1p(-eps)
    if rho == 1:
        return K * log_q
    log_p = math.log(eps)
    l = np.arange(rho, dtype=float)
    lower = _log_binom_coeffs(K, rho - 1) + l * log_p + (K - l) * log_q
    value = _logsumexp(lower)
    if value <= _LN_HALF:
        return value
    lc = _log_binom_coeffs(K, K)[rho:]
    l = np.arange(rho, K + 1, dtype=float)
    upper = lc + l * log_p + (K - l) * log_q
    return math.log1p(-math.exp(_logsumexp(upper)))


def _implicit_holds(eps: float, beta: float, rho: int, K: int, config_count: int) -> bool:
    return math.log(config_count) + binomial_tail_log(rho, K, eps) <= math.log(beta)


def implicit_sample_size(eps: float, beta: float, rho: int, config_count: int = 1) -> SampleSizeResult:
    """Smallest K >= rho with ``c * BinomCDF(rho-1; K, eps) <= beta``.

    Binary search on ``[rho, K_explicit]``; the explicit bound always
    satisfies the condition, which is re-checked before searching.
    """
    _check_inputs(eps, beta, rho, config_count)
    rho = int(rho)
    hi = explicit_sample_size(eps, beta, rho, config_count).K
    if not _implicit_holds(eps, beta, rho, hi, config_count):
        raise BoundsError(
            f"implicit condition fails at the explicit bracket K={hi} "
            f"(eps={eps}, beta={beta}, rho={rho}, c={config_count}, "
            f"log tail={binomial_tail_log(rho, hi, eps):.6g})"
        )
    lo = rho
    if _implicit_holds(eps, beta, rho, lo, config_count):
        return SampleSizeResult(lo, "implicit", eps, beta, rho, int(config_count))
    # invariant: condition fails at lo, holds at hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _implicit_holds(eps, beta, rho, mid, config_count):
            hi = mid
        else:
            lo = mid
    return SampleSizeResult(hi, "implicit", eps, beta, rho, int(config_count))


def sample_size(bound: str, eps: float, beta: float, rho: int, config_count: int = 1) -> SampleSizeResult:
    if bound == "explicit":
        return explicit_sample_size(eps, beta, rho, config_count)
    if bound == "implicit":
        return implicit_sample_size(eps, beta, rho, config_count)
    raise BoundsError(f"unknown bound kind {bound!r}")


def allocate_beta(beta: float, P: int) -> list[float]:
    """Equal confidence split ``beta / P`` over P parts."""
    if P < 1:
        raise BoundsError(f"P must be >= 1, got {P}")
    if not 0.0 < beta < 1.0:
        raise BoundsError(f"beta must lie in (0, 1), got {beta}")
    return [beta / P] * P
