# %% [markdown]
# # Why the first matching decides everything
#
# Two agents, one big item and a long tail of unit items. The naive loop
# (match, remove, repeat) hands the big item to the agent who values it
# slightly more, and the other agent is left with one crumb.

# %%
import math

from nswalloc import instances, naive_repeated_matching, nsw, smatch, smatch_trace
from nswalloc.exact import exact_opt

inst = instances.example1(m=20, M=20.0, eps=0.5)
for i, v in enumerate(inst.valuations):
    print(i, v.values[:4], "...")

# %%
naive = naive_repeated_matching(inst)
print("naive bundles:", [sorted(b) for b in naive.bundles])
print("naive NSW:", nsw(inst, naive), "which is sqrt(39.5) =", math.sqrt(39.5))

# %% [markdown]
# SMatch weights the first round by log of the item plus a keep-aside
# estimate of what the agent could still collect. Agent B has nowhere else
# to find value, so the big item goes to B.

# %%
trace = smatch_trace(inst)
print("first-round matching:", trace.rounds[0].pairs)
print("SMatch NSW:", nsw(inst, trace.allocation))
print("optimum:", exact_opt(inst).opt_nsw)

# %%
for m in (20, 50, 100, 200):
    big = instances.example1(m=m, M=float(m))
    print(m, round(nsw(big, smatch(big)) / nsw(big, naive_repeated_matching(big)), 2))
