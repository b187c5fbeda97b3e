"""How many scenarios does a chance constraint need?

Compares the explicit closed-form sample size with the implicit binomial-tail
one across support ranks, then splits a risk budget between parts of
different difficulty with the closed-form allocation.
"""
from ccpart.bounds import explicit_sample_size, implicit_sample_size
from ccpart.partition import optimal_epsilon

EPS, BETA = 0.1, 1e-3

print(f"sample sizes at eps={EPS}, beta={BETA}")
print(f"{'rank':>6} {'explicit':>9} {'implicit':>9}")
for rho in (1, 2, 5, 10, 20, 50):
    ex = explicit_sample_size(EPS, BETA, rho).K
    im = implicit_sample_size(EPS, BETA, rho).K
    print(f"{rho:>6} {ex:>9} {im:>9}")

# A cheap part and an expensive one: the allocation gives the expensive part
# the larger share of the violation budget, in proportion to sqrt(sigma).
sigmas = [50.0, 5000.0]
eps_star, _ = optimal_epsilon(sigmas, EPS)
allocated = sum(s / e for s, e in zip(sigmas, eps_star))
even = sum(s / (EPS / 2) for s in sigmas)
print()
print(f"sigmas {sigmas}: allocated eps {[round(e, 5) for e in eps_star]}")
print(f"relative cost: allocated 1.000, even split {even / allocated:.3f}")
