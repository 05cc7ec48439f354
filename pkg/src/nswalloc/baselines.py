"""Two simple matching strategies that the main algorithms are compared against."""

from __future__ import annotations

from . import _rounds
from .core import Allocation, Instance
from .matching import Mode, build_weights, max_weight_matching
from .valuations import Additive

__all__ = ["single_matching_fill", "naive_repeated_matching"]


def single_matching_fill(inst: Instance) -> Allocation:
    """One matching on singleton values; everything else goes through the greedy fill."""
    bundles: list[set[int]] = [set() for _ in range(inst.n)]
    remaining = set(range(inst.m))
    if remaining:
        M = max_weight_matching(build_weights(inst, sorted(remaining), Mode.PHASE1_SINGLETON))
        _rounds.apply(bundles, remaining, M)
    _rounds.greedy_fill(inst, bundles, remaining)
    return Allocation(tuple(frozenset(b) for b in bundles))


def naive_repeated_matching(inst: Instance) -> Allocation:
    """Match on current bundle value, allocate, repeat until no item is left.

    Unlike SMatch there is no keep-aside term in the first round, so an
    agent can lose its only valuable item to someone who is compensated
    by many small items later.  Additive agents use ``v_i(x_i) + v_i(j)``,
    all others ``v_i(x_i ∪ {j})``.  Items adding nothing to anyone are
    handed out by the greedy fill.
    """
    mode = Mode.SMATCH_LATER if all(isinstance(v, Additive) for v in inst.valuations) else Mode.SMATCH_LATER_MARGINAL
    bundles: list[set[int]] = [set() for _ in range(inst.n)]
    remaining = set(range(inst.m))
    while remaining:
        state = {"bundles": tuple(frozenset(b) for b in bundles)}
        M = max_weight_matching(build_weights(inst, sorted(remaining), mode, state, skip_zero_value=True))
        if not M.pairs:
            break
        _rounds.apply(bundles, remaining, M)
    _rounds.greedy_fill(inst, bundles, remaining)
    return Allocation(tuple(frozenset(b) for b in bundles))
