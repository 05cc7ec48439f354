# %% [markdown]
# # Few agents, near-optimal
#
# With a constant number of agents we can search a geometric grid of
# target values and ask an oracle whether some allocation meets them.

# %%
import numpy as np

from nswalloc import instances, nsw
from nswalloc.constagents import GridSearchConfig, const_agents_search, decompose, swap_round
from nswalloc.exact import exact_opt

inst = instances.random_coverage(2, 6, seed=4)
res = const_agents_search(inst, GridSearchConfig(delta=0.05))
print("grid exponents:", res.exponents, "iterations:", res.iterations)
print("ratio to optimum:", exact_opt(inst).opt_nsw / nsw(inst, res.allocation))

# %% [markdown]
# The rounded oracle works from a fractional point. A fractional assignment
# splits into a convex combination of allocations, and swap rounding merges
# them while keeping each item's marginals.

# %%
y = np.array([[0.3, 0.5], [0.7, 0.25]])
dec = decompose(y)
for coef, alloc in dec.terms:
    print(round(coef, 3), [sorted(b) for b in alloc.bundles])
print(np.round(dec.matrix(), 3))

counts = np.zeros_like(y)
for seed in range(5000):
    for i, b in enumerate(swap_round(dec, seed).bundles):
        counts[i, list(b)] += 1
print("empirical marginals:\n", np.round(counts / 5000, 2))
