"""Command-line front end: ``ccpart {generate,partition,table1,validate}``.

Exit codes: 0 ok, 1 mismatch or failed check, 2 usage or schema error,
3 infeasible parameters, 4 solver infeasibility.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from .bounds import BoundsError
from .model import (
    ModelError,
    ProblemSpec,
    gen_block_example,
    generate,
    load_problem,
    parse_gen_spec,
    save_problem,
    to_json,
    validate_document,
)
from .partition import AllocatedPlan, CostMetric, Partition, PartitionError, efficient_partition, total_cost
from .rank import RankOracle
from .scenario import ScenarioError, build_scenario_program, solve_mixed
from .setfn import SetFunctionError
from .validate import empirical_violation

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_PARAMS, EXIT_SOLVER = 0, 1, 2, 3, 4

TABLE1 = (
    # (m, n, r, partitioned?) -> expected NNZ cost
    ((10, 20, 10, False), 90200),
    ((10, 20, 10, True), 128270),
    ((10, 100, 100, False), 3652590),
    ((10, 100, 100, True), 1715090),
)
TABLE1_EPS, TABLE1_BETA = 0.05, 1e-3


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    params: dict
    seeds: dict
    version: str = __version__
    input_sha256: Optional[str] = None
    outputs: dict = field(default_factory=dict)

    def core(self) -> dict:
        return {"command": self.command, "params": self.params, "seeds": self.seeds,
                "version": self.version, "input_sha256": self.input_sha256}

    @property
    def sha256(self) -> str:
        return sha256_text(to_json(self.core()))

    def to_dict(self) -> dict:
        return {**self.core(), "manifest_sha256": self.sha256, "outputs": dict(self.outputs)}


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SCENARIO_PART_THREADS", "1")))
    except ValueError:
        return 1


def _problem_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", type=Path, help="problem JSON file")
    src.add_argument("--gen", help="generator spec family:key=value,... (families: block, prop3, production, formation)")


def _plan_args(p: argparse.ArgumentParser, metric_required: bool) -> None:
    p.add_argument("--metric", choices=["rows", "nnz", "flops", "samples"], required=metric_required,
                   default=None if metric_required else "flops", help="computational cost metric")
    p.add_argument("--eps", type=float, help="violation level (default: the problem's)")
    p.add_argument("--beta", type=float, help="confidence parameter (default: the problem's)")
    p.add_argument("--p-max", type=int, default=None, help="largest partition size tried (default min(r, 8))")
    p.add_argument("--rho", choices=["support_proxy", "sampled_linear"], default="support_proxy",
                   help="support-rank oracle")
    p.add_argument("--rho-seed", type=int, default=0, help="seed of the sampled rank draws")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ccpart", description="Cost-optimal constraint partitioning for scenario programs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--threads", type=int, default=default_threads(),
                        help="worker threads (default: $SCENARIO_PART_THREADS or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated problem to JSON")
    g.add_argument("--gen", required=True, help="generator spec family:key=value,...")
    g.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("partition", help="run the efficient-partitioning algorithm")
    _problem_args(p)
    _plan_args(p, metric_required=True)
    p.add_argument("--json", action="store_true", help="print the plan as JSON")
    p.add_argument("--out", type=Path, help="directory for plan.json and manifest.json")

    t = sub.add_parser("table1", help="recompute the four NNZ costs of the block example")
    t.add_argument("--json", action="store_true")
    t.add_argument("--perturb-eps", type=float, default=0.0, help=argparse.SUPPRESS)

    v = sub.add_parser("validate", help="solve the scenario program and estimate violation probabilities")
    _problem_args(v)
    _plan_args(v, metric_required=False)
    v.add_argument("--plan", type=Path, help="plan JSON from `partition --out` (default: compute one)")
    v.add_argument("--bound", choices=["explicit", "implicit"], default="implicit")
    v.add_argument("--trials", type=int, default=100_000)
    v.add_argument("--seed", type=int, default=0, help="seed of the scenario samples")
    v.add_argument("--validation-seed", type=int, default=None, help="seed of the fresh samples (default: --seed)")
    v.add_argument("--json", action="store_true")
    v.add_argument("--out", type=Path, help="directory for report.csv, solution.json and manifest.json")
    return parser


def _load(args) -> tuple[ProblemSpec, Optional[str]]:
    if args.problem is not None:
        text = args.problem.read_text(encoding="utf-8")
        return load_problem(args.problem), sha256_text(text)
    family, params = parse_gen_spec(args.gen)
    spec = generate(family, **params)
    return spec, sha256_text(spec.to_json())


def _rho_oracle(spec: ProblemSpec, args) -> RankOracle:
    if args.rho == "sampled_linear":
        return RankOracle("sampled_linear", spec.n, spec.r, sampler=spec.coefficient_sampler(), seed=args.rho_seed)
    return RankOracle("support_proxy", spec.n, spec.r, rows=spec.row_structures())


def _plan(spec: ProblemSpec, args) -> AllocatedPlan:
    eps = spec.epsilon if args.eps is None else args.eps
    beta = spec.beta if args.beta is None else args.beta
    metric = CostMetric.from_rows(args.metric, spec.row_structures())
    return efficient_partition(spec, metric, eps, beta, P_max=args.p_max, rho_oracle=_rho_oracle(spec, args),
                               threads=args.threads)


def _fmt(x: float) -> str:
    return format(x, ".15g")


def plan_table(plan: AllocatedPlan) -> str:
    lines = [
        f"metric={plan.metric} eps={_fmt(plan.epsilon)} beta={_fmt(plan.beta)} config_count={plan.config_count} P={plan.P}",
        f"{'part':>4} {'rows':>6} {'first..last':>12} {'rho':>5} {'nu':>10} {'eps_i':>12} {'K_explicit':>10} {'K_implicit':>10}",
    ]
    for i, part in enumerate(plan.partition):
        rows = part.to_list()
        lines.append(f"{i:>4} {len(rows):>6} {f'{rows[0]}..{rows[-1]}':>12} {plan.rho[i]:>5} {_fmt(plan.nu[i]):>10} "
                     f"{plan.epsilons[i]:>12.6g} {plan.K_explicit[i]:>10} {plan.K_implicit[i]:>10}")
    lines += [
        f"trivial partition cost (explicit): {_fmt(plan.trivial_cost_explicit)}",
        f"plan cost (explicit): {_fmt(plan.predicted_cost_explicit)}",
        f"plan cost (implicit): {_fmt(plan.predicted_cost_implicit)}",
        f"plan cost (continuous): {_fmt(plan.predicted_cost_continuous)}",
    ]
    return "\n".join(lines)


def _write_outputs(out: Optional[Path], manifest: RunManifest, files: dict[str, str]) -> None:
    for name, text in files.items():
        manifest.outputs[name] = sha256_text(text)
    if out is None:
        return
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
    (out / "manifest.json").write_text(to_json(manifest.to_dict(), indent=1) + "\n", encoding="utf-8")


def _params(args) -> dict:
    skip = {"func", "json", "out", "threads"}
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def cmd_generate(args) -> int:
    family, params = parse_gen_spec(args.gen)
    spec = generate(family, **params)
    save_problem(spec, args.out)
    print(f"wrote {args.out}: n={spec.n} b={spec.b} r={spec.r} config_count={spec.config_count}")
    return EXIT_OK


def cmd_partition(args) -> int:
    spec, input_hash = _load(args)
    plan = _plan(spec, args)
    manifest = RunManifest("partition", _params(args), {"rho_seed": args.rho_seed}, input_sha256=input_hash)
    doc = {**plan.to_dict(), "manifest_sha256": manifest.sha256}
    text = to_json(doc, indent=1) + "\n"
    _write_outputs(args.out, manifest, {"plan.json": text})
    if args.json:
        sys.stdout.write(text)
    else:
        print(plan_table(plan))
    return EXIT_OK


def table1_cells(perturb_eps: float = 0.0) -> list[dict]:
    cells = []
    eps = TABLE1_EPS + perturb_eps
    for (m, n, r, split), expected in TABLE1:
        spec = gen_block_example(m, n, r)
        rows = spec.row_structures()
        metric = CostMetric.from_rows("nnz", rows)
        rho = RankOracle("support_proxy", n, r, rows=rows)
        if split:
            part = Partition.of([range(r - 1), [r - 1]], r)
            value = total_cost(part, [eps / 2] * 2, [TABLE1_BETA / 2] * 2, rho.as_oracle(), metric)
        else:
            value = total_cost(Partition.trivial(r), [eps], [TABLE1_BETA], rho.as_oracle(), metric)
        cells.append({"m": m, "n": n, "r": r, "partition": "split" if split else "trivial",
                      "value": int(round(value)), "expected": expected, "match": value == expected})
    return cells


def cmd_table1(args) -> int:
    cells = table1_cells(args.perturb_eps)
    ok = all(c["match"] for c in cells)
    if args.json:
        manifest = RunManifest("table1", _params(args), {})
        sys.stdout.write(to_json({"cells": cells, "all_match": ok, "manifest_sha256": manifest.sha256}, indent=1) + "\n")
    else:
        for c in cells:
            status = "ok" if c["match"] else "MISMATCH"
            print(f"m={c['m']:>3} n={c['n']:>4} r={c['r']:>4} {c['partition']:>7}: {c['value']:>9} expected {c['expected']:>9}  {status}")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_validate(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    spec, input_hash = _load(args)
    if args.plan is not None:
        try:
            doc = json.loads(args.plan.read_text(encoding="utf-8"))
            validate_document(doc, "plan")
            plan = AllocatedPlan.from_dict(doc)
        except (json.JSONDecodeError, PartitionError, ModelError, TypeError, ValueError) as exc:
            raise ModelError(f"{args.plan}: not a valid plan ({exc})") from None
    else:
        plan = _plan(spec, args)
    sp = build_scenario_program(spec, plan, args.bound, seed=args.seed)
    solution = solve_mixed(sp, threads=args.threads)
    vseed = args.seed if args.validation_seed is None else args.validation_seed
    manifest = RunManifest("validate", _params(args), {"scenario": args.seed, "validation": vseed, "rho": args.rho_seed},
                           input_sha256=input_hash)
    if not solution.ok:
        print(f"solver status: {solution.status}"
              + (f" (certificate row {solution.certificate_row})" if solution.certificate_row is not None else ""),
              file=sys.stderr)
        return EXIT_SOLVER
    est = empirical_violation(spec, solution, plan, args.trials, seed=vseed)
    csv_text = est.to_csv(manifest.sha256)
    sol_text = to_json({**solution.to_dict(), "manifest_sha256": manifest.sha256}, indent=1) + "\n"
    _write_outputs(args.out, manifest, {"report.csv": csv_text, "solution.json": sol_text})
    verdict = "PASS" if est.passed else "FAIL"
    if args.json:
        doc = {"plan": plan.to_dict(), "objective_value": solution.objective_value, "y_star": list(solution.y_star),
               "sampled_rows": sp.sampled_rows, "violations": est.to_dict(), "manifest_sha256": manifest.sha256}
        sys.stdout.write(to_json(doc, indent=1) + "\n")
    else:
        print(f"parts={plan.P} K={sp.K} sampled_rows={sp.sampled_rows} objective={_fmt(solution.objective_value)}")
        sys.stdout.write(csv_text)
        targets = ", ".join(f"{e:.6g}" for e in plan.epsilons)
        print(f"{verdict}: total rate {est.total.rate:.6g} vs eps {plan.epsilon:.6g}; part targets ({targets})")
    return EXIT_OK if est.passed else EXIT_MISMATCH


COMMANDS = {"generate": cmd_generate, "partition": cmd_partition, "table1": cmd_table1, "validate": cmd_validate}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (ModelError, ScenarioError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BoundsError, PartitionError, SetFunctionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
