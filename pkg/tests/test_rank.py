import numpy as np
import pytest

from ccpart.rank import (
    ChunkedUnion,
    RankOracle,
    RowStructure,
    numeric_rank,
    sampled_linear_rank,
    support_proxy_rank,
)
from ccpart.setfn import IndexSet, check_monotone_submodular

from helpers import linear_system


def block_rows(m, n, r):
    rows = [RowStructure(j, IndexSet.range(0, m), m) for j in range(r - 1)]
    return rows + [RowStructure(r - 1, IndexSet.range(0, n), n)]


def test_flops_default():
    assert RowStructure(0, IndexSet.of([0, 1]), 2).flops == 4
    assert RowStructure(0, IndexSet.of([0, 1]), 2, flops=7).flops == 7
    with pytest.raises(ValueError):
        RowStructure(0, IndexSet(), 0)


def test_proxy_examples():
    rows = block_rows(10, 100, 100)
    assert support_proxy_rank(rows, IndexSet()) == 0
    assert support_proxy_rank(rows, IndexSet.range(0, 99)) == 10
    assert support_proxy_rank(rows, IndexSet.of([99])) == 100
    two = [RowStructure(0, IndexSet.of([0, 1]), 2), RowStructure(1, IndexSet.of([1, 2]), 2)]
    assert support_proxy_rank(two, IndexSet.of([0, 1])) == 3


def test_chunked_union_matches_loop():
    rng = np.random.default_rng(0)
    masks = [int(rng.integers(0, 2**40)) for _ in range(77)]
    u = ChunkedUnion(masks)
    for _ in range(300):
        sel = [j for j in range(77) if rng.random() < 0.3]
        want = 0
        for j in sel:
            want |= masks[j]
        assert u(sum(1 << j for j in sel)) == want


def test_oracle_proxy_matches_function():
    rows = block_rows(3, 7, 6)
    oracle = RankOracle("support_proxy", 7, 6, rows=rows)
    for mask in range(1 << 6):
        assert oracle.rank(IndexSet(mask)) == support_proxy_rank(rows, IndexSet(mask), 7)
    fn = oracle.as_oracle()
    assert fn.value(0b111111) == 7 and fn.eval_count == 1


def test_sampled_single_generic_row():
    oracle = RankOracle("sampled_linear", 3, 1, sampler=lambda g: g.uniform(1, 2, size=(1, 3)), samples=10)
    assert sampled_linear_rank(oracle, IndexSet.of([0])) == 3


def test_sampled_block_last_row_is_full():
    m, n, r = 4, 12, 6

    def sampler(g):
        A = np.zeros((r, n))
        A[:-1, :m] = g.uniform(1, 2, size=(r - 1, m))
        A[-1] = g.uniform(1, 2, size=n)
        return A

    oracle = RankOracle("sampled_linear", n, r, sampler=sampler)
    assert oracle.rank(IndexSet.of([r - 1])) == n
    assert oracle.rank(IndexSet.range(0, r - 1)) == m


def test_sampled_constant_row_has_rank_one():
    oracle = RankOracle("sampled_linear", 3, 1, sampler=lambda g: np.array([[1.0, 2.0, 3.0]]), samples=10)
    assert oracle.rank(IndexSet.of([0])) == 1


def test_degenerate_sampler_flags():
    oracle = RankOracle("sampled_linear", 3, 2, sampler=lambda g: np.zeros((2, 3)))
    with pytest.warns(RuntimeWarning):
        assert oracle.rank(IndexSet.of([0])) == 0
    assert oracle.degenerate


def test_sampled_rank_deterministic():
    rows, sampler = linear_system(np.random.default_rng(3), 8, 6)
    a = RankOracle("sampled_linear", 6, 8, sampler=sampler, seed=5)
    b = RankOracle("sampled_linear", 6, 8, sampler=sampler, seed=5)
    assert [a.rank(IndexSet(m)) for m in range(256)] == [b.rank(IndexSet(m)) for m in range(256)]


def test_numeric_rank_tolerance():
    M = np.diag([1.0, 1e-6, 1e-12])
    assert numeric_rank(M) == 2
    assert numeric_rank(M, tol=1e-3) == 1
    assert numeric_rank(np.zeros((0, 3))) == 0


@pytest.mark.parametrize("seed", range(10))
def test_both_oracles_monotone_submodular_and_dominance(seed):
    rng = np.random.default_rng(seed)
    r, n = int(rng.integers(3, 9)), int(rng.integers(2, 7))
    rows, sampler = linear_system(rng, r, n)
    sampled = RankOracle("sampled_linear", n, r, sampler=sampler, seed=seed)
    proxy = RankOracle("support_proxy", n, r, rows=rows)
    for kind in (sampled, proxy):
        assert check_monotone_submodular(kind.as_oracle()).ok
    s_tab, p_tab = sampled.as_oracle().table(), proxy.as_oracle().table()
    assert np.all(s_tab <= p_tab) and np.all(p_tab <= n)


def test_constructor_validation():
    with pytest.raises(ValueError):
        RankOracle("exact", 2, 2)
    with pytest.raises(ValueError):
        RankOracle("support_proxy", 2, 2)
    with pytest.raises(ValueError):
        RankOracle("sampled_linear", 2, 2)
