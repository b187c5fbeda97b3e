"""Splitting off one dense row of a sparse block makes the scenario program cheaper.

The block instance has r-1 rows touching m of the n variables and one row
touching all n. Solving it as one chance constraint needs samples for rank n
on every row; isolating the dense row lets the sparse rows use rank m.
"""
import argparse
import time

from ccpart.cli import plan_table, table1_cells
from ccpart.model import gen_block_example
from ccpart.partition import CostMetric, efficient_partition
from ccpart.rank import RankOracle

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--m", type=int, default=10)
parser.add_argument("--n", type=int, default=40, help="variables; 100 reproduces the large cells (about a minute)")
parser.add_argument("--r", type=int, default=40)
args = parser.parse_args()

print("stored nonzeros of the sampled program (eps=0.05, beta=1e-3):")
for cell in table1_cells():
    print(f"  m={cell['m']:<3} n={cell['n']:<4} r={cell['r']:<4} {cell['partition']:<8} {cell['value']:>9}")

spec = gen_block_example(args.m, args.n, args.r)
rows = spec.row_structures()
start = time.perf_counter()
plan = efficient_partition(spec, CostMetric.from_rows("nnz", rows), 0.05, 1e-3,
                           rho_oracle=RankOracle("support_proxy", spec.n, spec.r, rows=rows))
print(f"\nefficient partition of block m={args.m}, n={args.n}, r={args.r} "
      f"({time.perf_counter() - start:.1f} s):")
print(plan_table(plan))
print(f"savings over the single constraint: {1 - plan.predicted_cost_explicit / plan.trivial_cost_explicit:.1%}")
