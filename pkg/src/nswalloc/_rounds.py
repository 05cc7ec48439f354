"""Bookkeeping shared by the repeated-matching algorithms."""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from .core import Instance
from .matching import Matching, WeightMatrix


def apply(bundles: list[set[int]], remaining: set[int], matching: Matching) -> None:
    for i, j in matching.pairs:
        bundles[i].add(j)
        remaining.discard(j)


def dead_columns(W: WeightMatrix) -> list[int]:
    """Items no agent may be matched to in this round."""
    dead = ~np.isfinite(W.weights).any(axis=0) if W.rows else np.ones(W.cols, dtype=bool)
    return [W.items[c] for c in np.flatnonzero(dead)]


def fill_gain(inst: Instance, bundle: Iterable[int], agent: int, j: int) -> tuple[int, float]:
    """Sort key (larger is better) for handing item ``j`` to ``agent`` during a fill.

    Agents holding nothing of value come first if the item is worth
    something to them; otherwise agents compare by the increase in their
    weighted log value.
    """
    val = inst.valuations[agent]
    eta = inst.weights[agent]
    bundle = frozenset(bundle)
    before = val.value(bundle)
    after = val.value(bundle | {j})
    if before <= 0:
        return (1, eta * math.log(after)) if after > 0 else (0, 0.0)
    return 0, eta * (math.log(after) - math.log(before))


def greedy_fill(inst: Instance, bundles: list[set[int]], items: Iterable[int]) -> list[tuple[int, int]]:
    """Hand out ``items`` in index order, each to the agent gaining the most.

    Ties go to the lowest agent index.  Returns the ``(agent, item)``
    assignments made; ``bundles`` is updated in place.
    """
    made = []
    for j in sorted(items):
        best = max(range(inst.n), key=lambda i: (fill_gain(inst, bundles[i], i, j), -i))
        bundles[best].add(j)
        made.append((best, j))
    return made
