import itertools
import math

import numpy as np
import pytest

from ccpart.bounds import E_FACTOR, explicit_sample_size
from ccpart.partition import (
    AllocatedPlan,
    CostMetric,
    Partition,
    PartitionError,
    continuous_cost,
    efficient_partition,
    gamma_oracle,
    optimal_epsilon,
    plan_for_partition,
    sigma,
    total_cost,
)
from ccpart.rank import RankOracle, RowStructure
from ccpart.setfn import IndexSet, SetFunctionOracle, check_monotone_submodular, enumerate_partitions
from ccpart.model import gen_block_example, gen_prop3

from helpers import coverage_oracle, mask_of, random_supports


def block(m, n, r):
    rows = [RowStructure(j, IndexSet.range(0, m), m) for j in range(r - 1)]
    rows.append(RowStructure(r - 1, IndexSet.range(0, n), n))
    return rows, RankOracle("support_proxy", n, r, rows=rows), CostMetric.from_rows("nnz", rows)


def test_metric_kinds():
    rows, _, _ = block(2, 5, 4)
    assert CostMetric.from_rows("rows", rows)(IndexSet.of([0, 3])) == 2
    assert CostMetric.from_rows("nnz", rows)(IndexSet.of([0, 3])) == 7
    assert CostMetric.from_rows("flops", rows)(IndexSet.of([0, 3])) == 14
    samples = CostMetric.from_rows("samples", rows)
    assert samples(IndexSet.of([0])) == samples(IndexSet.range(0, 4)) == 1
    custom = CostMetric("custom", [1.0, 2.5], offset=0.5)
    assert custom(IndexSet.of([0, 1])) == 4.0 and custom.singleton(1) == 3.0
    with pytest.raises(PartitionError):
        CostMetric("custom", [0.0, 1.0])
    with pytest.raises(PartitionError):
        CostMetric("bogus", [1.0])


def test_metric_modular_on_many_rows():
    rng = np.random.default_rng(0)
    w = rng.integers(1, 50, size=37).astype(float)
    met = CostMetric("custom", w)
    for _ in range(100):
        sel = [j for j in range(37) if rng.random() < 0.4]
        assert met(IndexSet.of(sel)) == pytest.approx(w[sel].sum(), rel=1e-15)


def test_partition_validation():
    p = Partition.of([[3, 2], [0, 1]], 4)
    assert p.to_lists() == [[0, 1], [2, 3]]
    for bad in ([[0, 1], [1, 2, 3]], [[0, 1]], [[0, 1], [], [2, 3]], [[0, 1, 2, 3, 4]]):
        with pytest.raises(PartitionError):
            Partition.of(bad, 4)
    assert Partition.trivial(3).to_lists() == [[0, 1, 2]]


def test_sigma_examples():
    rows = [RowStructure(0, IndexSet.of([0]), 1)]
    rho = lambda A: 1
    assert sigma(IndexSet.of([0]), 1, math.exp(-1), 1, rho, CostMetric.from_rows("rows", rows)) == pytest.approx(1.0)
    _, oracle, nnz = block(10, 100, 100)
    assert sigma(IndexSet.of([99]), 2, 1e-3, 1, oracle, nnz) == pytest.approx(10660.0902459542, rel=1e-13)
    A = IndexSet.range(0, 7)
    double = CostMetric("custom", [2 * w for w in nnz.weights])
    assert sigma(A, 3, 1e-3, 1, oracle, double) == pytest.approx(2 * sigma(A, 3, 1e-3, 1, oracle, nnz), rel=1e-15)


def test_optimal_epsilon_examples():
    eps, obj = optimal_epsilon([5.0, 5.0, 5.0], 0.09)
    assert eps == pytest.approx([0.03] * 3, rel=1e-15)
    eps, obj = optimal_epsilon([1.0, 4.0], 0.1)
    assert eps == pytest.approx([0.1 / 3, 0.2 / 3], rel=1e-15)
    assert obj == pytest.approx(142.3779036182394, rel=1e-14)
    eps, obj = optimal_epsilon([7.0], 0.2)
    assert eps == [0.2] and obj == pytest.approx(E_FACTOR / 0.2 * 7.0, rel=1e-15)
    with pytest.raises(PartitionError):
        optimal_epsilon([1.0, 0.0], 0.1)


def test_optimal_epsilon_identity_and_grid():
    rng = np.random.default_rng(1)
    for _ in range(30):
        P = int(rng.integers(1, 5))
        s = rng.uniform(0.5, 100.0, size=P)
        eps = float(rng.uniform(0.01, 0.3))
        e, obj = optimal_epsilon(list(s), eps)
        assert math.fsum(e) == pytest.approx(eps, rel=1e-14)
        assert obj == pytest.approx(E_FACTOR * math.fsum(s / np.array(e)), rel=1e-9)
        # coarse grid over the simplex never beats the closed form
        for w in itertools.product(np.linspace(0.05, 1, 12), repeat=P):
            w = np.array(w) / np.sum(w)
            assert E_FACTOR * np.sum(s / (eps * w)) >= obj * (1 - 1e-12)


def test_table_cells_via_total_cost():
    for r, n, trivial, split in [(10, 20, 90200, 128270), (100, 100, 3652590, 1715090)]:
        _, rho, nnz = block(10, n, r)
        assert total_cost(Partition.trivial(r), [0.05], [1e-3], rho, nnz) == trivial
        two = Partition.of([range(r - 1), [r - 1]], r)
        assert total_cost(two, [0.025, 0.025], [5e-4, 5e-4], rho, nnz) == split


def test_continuous_cost_matches_objective():
    _, rho, nnz = block(10, 100, 100)
    two = Partition.of([range(99), [99]], 100)
    plan = plan_for_partition(two, rho, nnz, 0.05, 1e-3)
    _, obj = optimal_epsilon(plan.sigmas, 0.05)
    assert plan.predicted_cost_continuous == pytest.approx(obj, rel=1e-12)
    assert continuous_cost(two, plan.epsilons, plan.betas, rho, nnz) == pytest.approx(plan.predicted_cost_continuous, rel=1e-12)


def test_gamma_monotone_exhaustive():
    rng = np.random.default_rng(2)
    for _ in range(5):
        r = 8
        supports = random_supports(rng, r, 6)
        rows = [RowStructure(j, IndexSet(s), s.bit_count()) for j, s in enumerate(supports)]
        rho = RankOracle("support_proxy", 6, r, rows=rows).as_oracle()
        for kind in ("nnz", "rows", "samples"):
            g = gamma_oracle(3, 1e-3, 2, rho, CostMetric.from_rows(kind, rows))
            assert check_monotone_submodular(g).monotone


def prop3_ratio(n):
    r = n * n + 1
    spec = gen_prop3(n)
    rho = RankOracle("support_proxy", spec.n, r, rows=spec.row_structures())
    nnz = CostMetric.from_rows("nnz", spec.row_structures())
    whole = total_cost(Partition.trivial(r), [0.05], [1e-3], rho, nnz)
    split = total_cost(Partition.of([range(r - 1), [r - 1]], r), [0.025] * 2, [5e-4] * 2, rho, nnz)
    return whole / split


def test_prop3_family_ratio():
    ratios = [prop3_ratio(n) for n in (5, 10, 20, 40)]
    assert ratios == pytest.approx([0.661146496815, 0.945913666610, 1.523354564756, 2382920 / 887560], rel=1e-11)
    assert all(a < b for a, b in zip(ratios, ratios[1:]))


def test_efficient_partition_small_block():
    rows, rho, nnz = block(10, 20, 10)
    plan = efficient_partition(10, nnz, 0.05, 1e-3, rho_oracle=rho)
    assert plan.trivial_cost_explicit == 90200
    assert plan.predicted_cost_continuous <= plan.trivial_cost_continuous
    assert [c["P"] for c in plan.candidates] == list(range(1, 9))


def test_efficient_partition_samples_metric_trivial():
    rows, rho, _ = block(3, 10, 12)
    plan = efficient_partition(12, CostMetric.from_rows("samples", rows), 0.1, 1e-3, rho_oracle=rho)
    assert plan.P == 1


def test_efficient_partition_single_row():
    rows = [RowStructure(0, IndexSet.of([0, 1]), 2)]
    rho = RankOracle("support_proxy", 2, 1, rows=rows)
    plan = efficient_partition(1, CostMetric.from_rows("nnz", rows), 0.1, 1e-3, rho_oracle=rho)
    assert plan.P == 1 and plan.K_explicit == [explicit_sample_size(0.1, 1e-3, 2).K]


def test_efficient_partition_threads_deterministic():
    spec = gen_block_example(4, 12, 14, seed=0)
    nnz = CostMetric.from_rows("nnz", spec.row_structures())
    a = efficient_partition(spec, nnz, 0.05, 1e-3, threads=1)
    b = efficient_partition(spec, nnz, 0.05, 1e-3, threads=3)
    assert a.to_dict() == b.to_dict()


def test_plan_round_trip():
    spec = gen_block_example(4, 12, 14, seed=0)
    plan = efficient_partition(spec, CostMetric.from_rows("nnz", spec.row_structures()), 0.05, 1e-3)
    again = AllocatedPlan.from_dict(plan.to_dict())
    assert again.to_dict() == plan.to_dict()
    with pytest.raises(PartitionError, match="missing field"):
        AllocatedPlan.from_dict({k: v for k, v in plan.to_dict().items() if k != "K_implicit"})


def test_parameter_guards():
    rows, rho, nnz = block(2, 4, 5)
    with pytest.raises(PartitionError):
        efficient_partition(5, nnz, 0.05, 0.5, rho_oracle=rho)
    with pytest.raises(PartitionError):
        efficient_partition(5, nnz, 0.05, 1e-3, P_max=6, rho_oracle=rho)
    with pytest.raises(PartitionError):
        efficient_partition(6, nnz, 0.05, 1e-3, rho_oracle=rho)


def brute_force_best(r, rho, metric, eps, beta, c=1):
    best = math.inf
    for parts in enumerate_partitions(list(range(r))):
        P = len(parts)
        sig = [sigma(IndexSet(mask_of(p)), P, beta, c, rho, metric) for p in parts]
        best = min(best, optimal_epsilon(sig, eps)[1])
    return best


@pytest.mark.parametrize("seed", range(8))
def test_efficient_partition_within_bound(seed):
    rng = np.random.default_rng(400 + seed)
    r = int(rng.integers(2, 7))
    n = int(rng.integers(2, 8))
    supports = random_supports(rng, r, n)
    rows = [RowStructure(j, IndexSet(s), int(rng.integers(1, 20))) for j, s in enumerate(supports)]
    rho = RankOracle("support_proxy", n, r, rows=rows).as_oracle()
    met = CostMetric.from_rows("nnz", rows)
    plan = efficient_partition(r, met, 0.1, 1e-3, P_max=r, rho_oracle=rho)
    best = brute_force_best(r, rho, met, 0.1, 1e-3)
    assert plan.predicted_cost_continuous <= (2 - 2 / r) ** 2 * best * (1 + 1e-12)
    assert plan.predicted_cost_continuous <= plan.trivial_cost_continuous
