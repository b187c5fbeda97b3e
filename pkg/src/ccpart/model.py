"""Problem description format and deterministic instance generators.

A problem is a linear chance-constrained program

    min  c^T x   s.t.  P_w[ f_j(x, w) <= 0 for all rows j ] >= 1 - eps,
                       deterministic rows in (x, y),  y binary,

whose uncertain rows are affine in both x and w:

    f_j(x, w) = sum_v a_jv x_v + c_j + sum_(v,k,s) s * w_k * x_v + sum_(k,s) s * w_k.
"""
from __future__ import annotations

import dataclasses
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .rank import RowStructure
from .setfn import IndexSet

__all__ = [
    "SCHEMA_VERSION",
    "DISTRIBUTIONS",
    "ModelError",
    "Distribution",
    "AffineRow",
    "RowSpec",
    "DetRow",
    "ProblemSpec",
    "gen_block_example",
    "gen_prop3",
    "gen_production",
    "gen_formation",
    "generate",
    "parse_gen_spec",
    "GENERATORS",
    "load_problem",
    "save_problem",
    "problem_from_dict",
    "to_json",
    "load_schema",
    "validate_document",
]

SCHEMA_VERSION = 1
DISTRIBUTIONS = ("uniform", "discrete_uniform")

FORMATION_DT = 0.1
FORMATION_RADIUS = 0.5
FORMATION_TOL = 0.35
FORMATION_BIG_M = 100.0
FORMATION_W = 0.25
FORMATION_U_MAX = 2.0
FORMATION_TANGENTS = 16
FORMATION_MAX_AGENTS = 3
FORMATION_MAX_HORIZON = 8


class ModelError(ValueError):
    pass


def to_json(obj: Any, indent: Optional[int] = None) -> str:
    """JSON with every float written as a 17-significant-digit decimal."""

    def enc(o, level):
        pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
        end = "" if indent is None else "\n" + " " * (indent * level)
        sep = ","
        if isinstance(o, bool) or o is None:
            return json.dumps(o)
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            x = float(o)
            return format(x, ".17g") if math.isfinite(x) else "null"
        if isinstance(o, str):
            return json.dumps(o, ensure_ascii=False)
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(k))}:{'' if indent is None else ' '}{enc(v, level + 1)}" for k, v in o.items()]
            return "{" + sep.join(items) + end + "}"
        if isinstance(o, (list, tuple, np.ndarray)):
            if len(o) == 0:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o):
                return "[" + ",".join(enc(v, level + 1) for v in o) + "]"
            return "[" + sep.join(pad + enc(v, level + 1) for v in o) + end + "]"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(obj, 0)


def load_schema(name: str) -> dict:
    """One of the JSON schemas shipped with the package (``problem``, ``plan``, ...)."""
    text = resources.files("ccpart").joinpath("schemas").joinpath(f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


@dataclass(frozen=True)
class Distribution:
    name: str
    low: float
    high: float

    def __post_init__(self):
        if self.name not in DISTRIBUTIONS:
            raise ModelError(f"unknown distribution {self.name!r}; supported: {', '.join(DISTRIBUTIONS)}")
        if not (math.isfinite(self.low) and math.isfinite(self.high)) or self.low > self.high:
            raise ModelError(f"distribution needs finite low <= high, got [{self.low}, {self.high}]")
        if self.name == "discrete_uniform" and (self.low != int(self.low) or self.high != int(self.high)):
            raise ModelError("discrete_uniform bounds must be integers")

    def to_dict(self) -> dict:
        return {"name": self.name, "low": self.low, "high": self.high}


@dataclass(frozen=True)
class AffineRow:
    """``f(x, w) = sum coef + const + sum w_coef + sum w_const`` (see module docstring)."""

    coef: tuple[tuple[int, float], ...] = ()
    const: float = 0.0
    w_coef: tuple[tuple[int, int, float], ...] = ()
    w_const: tuple[tuple[int, float], ...] = ()

    def variables(self) -> set[int]:
        return {v for v, _ in self.coef} | {v for v, _, _ in self.w_coef}

    def to_dict(self) -> dict:
        return {
            "coef": [list(t) for t in self.coef],
            "const": self.const,
            "w_coef": [list(t) for t in self.w_coef],
            "w_const": [list(t) for t in self.w_const],
        }


@dataclass(frozen=True)
class RowSpec:
    id: int
    support: tuple[int, ...]
    nnz: int
    flops: int
    sampler: AffineRow
    label: str = ""

    def structure(self) -> RowStructure:
        return RowStructure(self.id, IndexSet.of(self.support), self.nnz, self.flops)

    def to_dict(self) -> dict:
        d = {"id": self.id, "support": list(self.support), "nnz": self.nnz, "flops": self.flops,
             "sampler": self.sampler.to_dict()}
        if self.label:
            d["label"] = self.label
        return d


@dataclass(frozen=True)
class DetRow:
    """Deterministic row ``coef . x + ycoef . y (sense) rhs`` with sense ``<=`` or ``==``."""

    coef: tuple[tuple[int, float], ...]
    ycoef: tuple[tuple[int, float], ...]
    rhs: float
    sense: str = "<="

    def to_dict(self) -> dict:
        return {"coef": [list(t) for t in self.coef], "ycoef": [list(t) for t in self.ycoef],
                "rhs": self.rhs, "sense": self.sense}


def _row(nonzeros: dict[int, float]) -> tuple[tuple[int, float], ...]:
    return tuple(sorted((int(k), float(v)) for k, v in nonzeros.items() if v != 0.0))


@dataclass(frozen=True)
class ProblemSpec:
    n: int
    b: int
    config_count: int
    epsilon: float
    beta: float
    objective: tuple[float, ...]
    rows: tuple[RowSpec, ...]
    deterministic: tuple[DetRow, ...]
    uncertainty: tuple[Distribution, ...]
    generator: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise ModelError("n must be positive")
        if self.b < 0:
            raise ModelError("b must be non-negative")
        if not 1 <= self.config_count <= 2**self.b:
            raise ModelError(f"config_count must lie in [1, 2**b={2**self.b}], got {self.config_count}")
        if len(self.objective) != self.n:
            raise ModelError(f"objective has {len(self.objective)} entries, expected n={self.n}")
        if not self.rows:
            raise ModelError("rows: at least one uncertain row is required")
        d = len(self.uncertainty)
        for i, row in enumerate(self.rows):
            where = f"rows[{i}]"
            if row.id != i:
                raise ModelError(f"{where}.id: row ids must be 0..r-1 in order, got {row.id}")
            if any(not 0 <= v < self.n for v in row.support):
                raise ModelError(f"{where}.support: variable index out of range")
            if set(row.support) != row.sampler.variables():
                raise ModelError(f"{where}.support: does not match the variables used by the sampler")
            if any(not 0 <= k < d for _, k, _ in row.sampler.w_coef) or any(not 0 <= k < d for k, _ in row.sampler.w_const):
                raise ModelError(f"{where}.sampler: uncertainty index out of range")
            if row.nnz < 1 or row.flops < 1:
                raise ModelError(f"{where}: nnz and flops must be positive")
        for i, row in enumerate(self.deterministic):
            if row.sense not in ("<=", "=="):
                raise ModelError(f"deterministic[{i}].sense: expected '<=' or '=='")
            if any(not 0 <= v < self.n for v, _ in row.coef):
                raise ModelError(f"deterministic[{i}].coef: variable index out of range")
            if any(not 0 <= v < self.b for v, _ in row.ycoef):
                raise ModelError(f"deterministic[{i}].ycoef: binary index out of range")

    @property
    def r(self) -> int:
        return len(self.rows)

    @property
    def w_dim(self) -> int:
        return len(self.uncertainty)

    def row_structures(self) -> list[RowStructure]:
        return [row.structure() for row in self.rows]

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "n": self.n,
            "b": self.b,
            "config_count": self.config_count,
            "epsilon": self.epsilon,
            "beta": self.beta,
            "objective": list(self.objective),
            "uncertainty": [u.to_dict() for u in self.uncertainty],
            "rows": [row.to_dict() for row in self.rows],
            "deterministic": [row.to_dict() for row in self.deterministic],
            "generator": dict(self.generator),
        }

    def to_json(self, indent: Optional[int] = None) -> str:
        return to_json(self.to_dict(), indent=indent)

    # compiled numeric views (built lazily, not part of equality)

    @cached_property
    def _compiled(self):
        r, n, d = self.r, self.n, self.w_dim
        A0 = np.zeros((r, n))
        c0 = np.zeros(r)
        gi, gj, gv = [], [], []
        hi, hj, hv = [], [], []
        for j, row in enumerate(self.rows):
            s = row.sampler
            for v, a in s.coef:
                A0[j, v] += a
            c0[j] = s.const
            for v, k, scale in s.w_coef:
                gi.append(j * n + v)
                gj.append(k)
                gv.append(scale)
            for k, scale in s.w_const:
                hi.append(j)
                hj.append(k)
                hv.append(scale)
        G = sp.csr_matrix((gv, (gi, gj)), shape=(r * n, d))
        H = sp.csr_matrix((hv, (hi, hj)), shape=(r, d))
        lows = np.array([u.low for u in self.uncertainty])
        highs = np.array([u.high for u in self.uncertainty])
        discrete = np.array([u.name == "discrete_uniform" for u in self.uncertainty], dtype=bool)
        return A0, c0, G, H, lows, highs, discrete

    def sample_w(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """``count`` i.i.d. draws of the uncertainty vector, shape ``(count, d)``."""
        *_, lows, highs, discrete = self._compiled
        U = rng.random((count, self.w_dim))
        W = lows + (highs - lows) * U
        if discrete.any():
            span = highs[discrete] - lows[discrete] + 1.0
            W[:, discrete] = np.minimum(lows[discrete] + np.floor(U[:, discrete] * span), highs[discrete])
        return W

    def instantiate(self, row_ids: Sequence[int], W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Rows ``row_ids`` at every draw in ``W``.

        Returns ``(A, c)`` with ``A`` of shape ``(len(W), len(row_ids), n)``
        and ``c`` of shape ``(len(W), len(row_ids))`` so that
        ``f_j(x, w_k) = A[k, j] . x + c[k, j]``.
        """
        A0, c0, G, H, *_ = self._compiled
        idx = np.asarray(row_ids, dtype=int)
        n = self.n
        K = W.shape[0]
        grows = (idx[:, None] * n + np.arange(n)[None, :]).ravel()
        dA = (G[grows] @ W.T).T.reshape(K, len(idx), n)
        A = A0[idx][None, :, :] + dA
        c = c0[idx][None, :] + (H[idx] @ W.T).T
        return A, c

    def affine_in_w(self, x: np.ndarray) -> tuple[np.ndarray, sp.csr_matrix]:
        """For fixed x, ``f(x, w) = alpha + B @ w`` for all rows at once."""
        A0, c0, G, H, *_ = self._compiled
        x = np.asarray(x, dtype=float)
        alpha = A0 @ x + c0
        coo = G.tocoo()
        j, v = np.divmod(coo.row, self.n)
        B = sp.csr_matrix((coo.data * x[v], (j, coo.col)), shape=(self.r, self.w_dim)) + H
        return alpha, B

    def coefficient_sampler(self):
        """``rng -> (r, n)`` coefficient matrix at one draw (for the sampled rank)."""

        def draw(rng):
            A, _ = self.instantiate(range(self.r), self.sample_w(rng, 1))
            return A[0]

        return draw

    def feasible_configurations(self) -> list[tuple[int, ...]]:
        """Binary vectors satisfying the deterministic rows that involve y only."""
        y_rows = [row for row in self.deterministic if row.ycoef and not row.coef]
        out = []
        for y in itertools.product((0, 1), repeat=self.b):
            ok = True
            for row in y_rows:
                lhs = sum(a * y[k] for k, a in row.ycoef)
                if row.sense == "<=" and lhs > row.rhs + 1e-9 or row.sense == "==" and abs(lhs - row.rhs) > 1e-9:
                    ok = False
                    break
            if ok:
                out.append(y)
        return out


# ---------------------------------------------------------------- generators

def _check_positive(**sizes):
    for name, v in sizes.items():
        if int(v) != v or v < 1:
            raise ModelError(f"{name} must be a positive integer, got {v}")


def gen_block_example(m: int, n: int, r: int, seed: int = 0, epsilon: float = 0.05, beta: float = 1e-3) -> ProblemSpec:
    """Rows ``a_j(w) . x <= 1``: rows ``0..r-2`` on the first m variables, the
    last row on all n; every coefficient is uniform on [1, 2]; ``x >= 0`` and
    the objective is ``-sum x``. ``seed`` is recorded but unused: the
    instance has no random nominal data."""
    _check_positive(m=m, n=n, r=r)
    if m > n:
        raise ModelError(f"need m <= n, got m={m}, n={n}")
    if r < 2:
        raise ModelError(f"need r >= 2, got r={r}")
    unc: list[Distribution] = []
    rows = []
    for j in range(r):
        width = m if j < r - 1 else n
        terms = []
        for v in range(width):
            terms.append((v, len(unc), 1.0))
            unc.append(Distribution("uniform", 1.0, 2.0))
        rows.append(RowSpec(j, tuple(range(width)), width, 2 * width,
                            AffineRow(const=-1.0, w_coef=tuple(terms)),
                            "block" if j < r - 1 else "dense"))
    det = tuple(DetRow(((v, -1.0),), (), 0.0) for v in range(n))
    return ProblemSpec(n, 0, 1, epsilon, beta, tuple([-1.0] * n), tuple(rows), det, tuple(unc),
                       {"family": "block", "m": m, "n": n, "r": r, "seed": seed})


def gen_prop3(n: int, seed: int = 0, epsilon: float = 0.05, beta: float = 1e-3) -> ProblemSpec:
    """The block instance with ``m = 1`` and ``r = n**2 + 1``."""
    spec = gen_block_example(1, n, n * n + 1, seed, epsilon, beta)
    return dataclasses.replace(spec, generator={"family": "prop3", "n": n, "seed": seed})


def gen_production(m: int, machines: int, seed: int = 0, epsilon: float = 0.1, beta: float = 1e-3) -> ProblemSpec:
    """Production planning with uncertain machine capacities and prices.

    Variables ``(tau, x1[0..m-1], x2[0..m-1])``; ``machines`` capacity rows
    ``A_i . x1 <= 1`` and one epigraph row
    ``(q-u) . x1 + (p-u) . x2 + u . d - tau <= 0``.
    """
    _check_positive(m=m, machines=machines)
    rng = np.random.default_rng(seed)
    d = rng.integers(1, 101, size=m)
    q_bar = rng.uniform(0.0, 0.3, size=m)
    p_bar = rng.uniform(0.0, 0.6, size=m)
    u_bar = rng.uniform(0.0, 0.9, size=m)
    n = 2 * m + 1
    x1 = [1 + j for j in range(m)]
    x2 = [1 + m + j for j in range(m)]
    unc: list[Distribution] = []
    rows = []
    for i in range(machines):
        terms = []
        for j in range(m):
            terms.append((x1[j], len(unc), 1.0))
            unc.append(Distribution("uniform", 0.0015, 0.0025))
        rows.append(RowSpec(i, tuple(x1), m, 2 * m, AffineRow(const=-1.0, w_coef=tuple(terms)), "capacity"))
    q0 = len(unc)
    unc += [Distribution("uniform", float(v), float(v) * 5.0 / 3.0) for v in q_bar]
    p0 = len(unc)
    unc += [Distribution("uniform", float(v), float(v) * 5.0 / 3.0) for v in p_bar]
    u0 = len(unc)
    unc += [Distribution("uniform", float(v), float(v) * 5.0 / 3.0) for v in u_bar]
    w_coef = []
    for j in range(m):
        w_coef += [(x1[j], q0 + j, 1.0), (x1[j], u0 + j, -1.0), (x2[j], p0 + j, 1.0), (x2[j], u0 + j, -1.0)]
    epi = AffineRow(coef=((0, -1.0),), w_coef=tuple(w_coef),
                    w_const=tuple((u0 + j, float(d[j])) for j in range(m)))
    rows.append(RowSpec(machines, tuple(range(n)), n, 2 * n, epi, "epigraph"))
    det = []
    for j in range(m):
        det.append(DetRow(((x1[j], -1.0),), (), 0.0))
        det.append(DetRow(((x2[j], -1.0),), (), 0.0))
        det.append(DetRow(((x1[j], 1.0), (x2[j], 1.0)), (), float(d[j])))
    objective = tuple([1.0] + [0.0] * (2 * m))
    return ProblemSpec(n, 0, 1, epsilon, beta, objective, tuple(rows), tuple(det), tuple(unc),
                       {"family": "production", "m": m, "machines": machines, "seed": seed})


def gen_formation(agents: int, horizon: int, seed: int = 0, epsilon: float = 0.1, beta: float = 1e-3) -> ProblemSpec:
    """Planar double-integrator agents reaching a regular polygon formation.

    Continuous variables: inputs ``u`` (agent, step, axis), tangent-cut
    epigraph variables ``s`` for the quadratic input cost, distance bounds
    ``tau`` (agent, vertex) and Big-M auxiliaries ``t`` (agent, vertex).
    Binaries ``y`` (agent, vertex) select the assignment. Uncertain rows: the
    ``4 agents**2`` formation rows followed by ``4 agents horizon`` input rows.
    """
    _check_positive(agents=agents, horizon=horizon)
    if agents not in (2, FORMATION_MAX_AGENTS):
        raise ModelError(f"formation supports 2 or {FORMATION_MAX_AGENTS} agents at desk scale, got {agents}")
    if horizon > FORMATION_MAX_HORIZON:
        raise ModelError(f"formation horizon is limited to {FORMATION_MAX_HORIZON}, got {horizon}")
    A, N = agents, horizon
    n_u = 2 * A * N

    def u_idx(i, k, c):
        return (i * N + k) * 2 + c

    s0, tau0, t0 = n_u, 2 * n_u, 2 * n_u + A * A
    n = 2 * n_u + 2 * A * A
    rng = np.random.default_rng(seed)
    angles = 2.0 * np.pi * np.arange(A) / A + rng.uniform(-0.05, 0.05, size=A)
    start = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # zero initial velocity
    verts = FORMATION_RADIUS * np.stack([np.cos(2 * np.pi * np.arange(A) / A), np.sin(2 * np.pi * np.arange(A) / A)], axis=1)
    dt = FORMATION_DT
    ck = [dt * dt * (N - k - 0.5) for k in range(N)]
    unc = tuple(Distribution("uniform", -FORMATION_W, FORMATION_W) for _ in range(n_u))

    def offset_terms(i, c, sign):
        """sign * (final position of agent i minus the formation center), axis c."""
        coef, w_const = {}, []
        for i2 in range(A):
            weight = (1.0 if i2 == i else 0.0) - 1.0 / A
            for k in range(N):
                v = u_idx(i2, k, c)
                coef[v] = sign * weight * ck[k]
                w_const.append((v, sign * weight * ck[k]))  # u and w share the index layout
        const = sign * (start[i, c] - start[:, c].mean())
        return coef, const, w_const

    rows = []
    for i in range(A):
        for j in range(A):
            for sign in (1.0, -1.0):
                for c in (0, 1):
                    coef, const, w_const = offset_terms(i, c, sign)
                    coef[tau0 + i * A + j] = -1.0
                    row = AffineRow(coef=_row(coef), const=const - sign * verts[j, c], w_const=tuple(w_const))
                    support = tuple(sorted(v for v, _ in row.coef))
                    rows.append(RowSpec(len(rows), support, len(support), 2 * len(support), row, "formation"))
    for sign in (1.0, -1.0):
        for v in range(n_u):
            row = AffineRow(coef=((v, sign),), const=-FORMATION_U_MAX, w_const=((v, sign),))
            rows.append(RowSpec(len(rows), (v,), 1, 2, row, "input"))

    det = []
    for a in np.linspace(-FORMATION_U_MAX - FORMATION_W, FORMATION_U_MAX + FORMATION_W, FORMATION_TANGENTS):
        for v in range(n_u):
            det.append(DetRow(_row({v: 2.0 * a, s0 + v: -1.0}), (), float(a * a)))
    M = FORMATION_BIG_M
    for i in range(A):
        for j in range(A):
            k = i * A + j
            det.append(DetRow(((tau0 + k, 1.0),), ((k, M),), FORMATION_TOL + M))
            det.append(DetRow(((t0 + k, 1.0),), ((k, M),), M))
            det.append(DetRow(((t0 + k, -1.0),), (), 0.0))
            det.append(DetRow(_row({t0 + k: 1.0, tau0 + k: -1.0}), (), 0.0))
    for j in range(A):
        det.append(DetRow((), tuple((i * A + j, 1.0) for i in range(A)), 1.0))
    for i in range(A):
        det.append(DetRow((), tuple((i * A + j, 1.0) for j in range(A)), 1.0, "=="))

    objective = [0.0] * n
    for v in range(n_u):
        objective[s0 + v] = 1.0 / (4.0 * A * N)
    for k in range(A * A):
        objective[tau0 + k] = 1.0
        objective[t0 + k] = -1.0
    return ProblemSpec(n, A * A, math.factorial(A), epsilon, beta, tuple(objective), tuple(rows), tuple(det), unc,
                       {"family": "formation", "agents": agents, "horizon": horizon, "seed": seed,
                        "initial_positions": start.tolist()})


GENERATORS = {
    "block": (gen_block_example, ("m", "n", "r")),
    "prop3": (gen_prop3, ("n",)),
    "production": (gen_production, ("m", "machines")),
    "formation": (gen_formation, ("agents", "horizon")),
}


def parse_gen_spec(text: str) -> tuple[str, dict[str, Any]]:
    """``family:key=value,...`` -> (family, params)."""
    family, _, rest = text.partition(":")
    family = family.strip()
    if family not in GENERATORS:
        raise ModelError(f"unknown generator family {family!r}; supported: {', '.join(GENERATORS)}")
    params: dict[str, Any] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise ModelError(f"generator parameter {item!r} is not key=value")
        try:
            params[key.strip()] = int(value) if key.strip() in ("seed",) + GENERATORS[family][1] else float(value)
        except ValueError:
            raise ModelError(f"generator parameter {key}: cannot parse {value!r}") from None
    missing = [k for k in GENERATORS[family][1] if k not in params]
    if missing:
        raise ModelError(f"generator {family} is missing parameter(s): {', '.join(missing)}")
    allowed = set(GENERATORS[family][1]) | {"seed", "epsilon", "beta"}
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ModelError(f"generator {family} does not take parameter(s): {', '.join(unknown)}")
    return family, params


def generate(family: str, **params) -> ProblemSpec:
    if family not in GENERATORS:
        raise ModelError(f"unknown generator family {family!r}; supported: {', '.join(GENERATORS)}")
    return GENERATORS[family][0](**params)


# ---------------------------------------------------------------- persistence

def validate_document(doc: Any, schema: str = "problem") -> None:
    """Raise ``ModelError`` naming the first schema violation of ``doc``."""
    import jsonschema

    validator = jsonschema.Draft202012Validator(load_schema(schema))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in err.absolute_path).lstrip(".")
        raise ModelError(f"{path or '<document>'}: {err.message}")


def problem_from_dict(doc: dict) -> ProblemSpec:
    validate_document(doc)
    rows = tuple(
        RowSpec(
            int(row["id"]),
            tuple(int(v) for v in row["support"]),
            int(row["nnz"]),
            int(row["flops"]),
            AffineRow(
                tuple((int(v), float(a)) for v, a in row["sampler"].get("coef", [])),
                float(row["sampler"].get("const", 0.0)),
                tuple((int(v), int(k), float(s)) for v, k, s in row["sampler"].get("w_coef", [])),
                tuple((int(k), float(s)) for k, s in row["sampler"].get("w_const", [])),
            ),
            row.get("label", ""),
        )
        for row in doc["rows"]
    )
    det = tuple(
        DetRow(tuple((int(v), float(a)) for v, a in row.get("coef", [])),
               tuple((int(v), float(a)) for v, a in row.get("ycoef", [])),
               float(row["rhs"]), row.get("sense", "<="))
        for row in doc.get("deterministic", [])
    )
    unc = tuple(Distribution(u["name"], float(u["low"]), float(u["high"])) for u in doc.get("uncertainty", []))
    return ProblemSpec(int(doc["n"]), int(doc["b"]), int(doc["config_count"]), float(doc["epsilon"]),
                       float(doc["beta"]), tuple(float(c) for c in doc["objective"]), rows, det, unc,
                       dict(doc.get("generator", {})))


def load_problem(path) -> ProblemSpec:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON ({exc})") from None
    return problem_from_dict(doc)


def save_problem(spec: ProblemSpec, path) -> None:
    Path(path).write_text(spec.to_json(indent=1) + "\n", encoding="utf-8")
