"""RepReMatch: three-phase repeated matching for submodular agents.

Phase 1 runs a few matchings on singleton values and sets those items
aside.  Phase 2 matches the rest on bundle value until nothing is left.
Phase 3 puts the Phase-1 items back, runs one more matching on bundle
value, and hands whatever is still unassigned to the greedy fill.

Only value queries are used, so any monotone valuation with ``v(∅) = 0``
is accepted.  The approximation guarantee needs submodularity, which is
not checked here (see :func:`nswalloc.valuations.check_submodular`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _rounds
from .core import Allocation, Instance
from .matching import Matching, Mode, build_weights, max_weight_matching

__all__ = ["PhaseLedger", "phase_bound", "reprematch", "reprematch_ledger"]


def phase_bound(n: int) -> int:
    """Number of singleton-value matchings run before the release: ``ceil(log2 n)``."""
    if n < 1:
        raise ValueError("need at least one agent")
    return math.ceil(math.log2(n)) if n > 1 else 0


@dataclass(frozen=True)
class PhaseLedger:
    phase1_bundles: tuple[frozenset[int], ...]
    phase2_bundles: tuple[frozenset[int], ...]
    phase3_matching: Matching
    leftovers: tuple[tuple[int, int], ...]  # (agent, item) pairs from the fill
    final: Allocation
    phase1_rounds: tuple[Matching, ...] = ()
    phase2_rounds: tuple[Matching, ...] = ()

    @property
    def released(self) -> frozenset[int]:
        return frozenset().union(*self.phase1_bundles)


def _frozen(bundles):
    return tuple(frozenset(b) for b in bundles)


def reprematch_ledger(inst: Instance) -> PhaseLedger:
    n = inst.n
    remaining = set(range(inst.m))

    phase1: list[set[int]] = [set() for _ in range(n)]
    rounds1 = []
    for _ in range(phase_bound(n)):
        if not remaining:
            break
        W = build_weights(inst, sorted(remaining), Mode.PHASE1_SINGLETON)
        M = max_weight_matching(W)
        if not M.pairs:
            break
        _rounds.apply(phase1, remaining, M)
        rounds1.append(M)

    phase2: list[set[int]] = [set() for _ in range(n)]
    rounds2 = []
    while remaining:
        W = build_weights(inst, sorted(remaining), Mode.PHASE2_CUMULATIVE, {"bundles": _frozen(phase2)})
        M = max_weight_matching(W)
        if not M.pairs:
            # nobody can be matched to what is left; the fill takes care of it
            break
        _rounds.apply(phase2, remaining, M)
        rounds2.append(M)
    unmatched_phase2 = set(remaining)

    released = set().union(*phase1)
    final = [set(b) for b in phase2]
    W = build_weights(inst, sorted(released), Mode.PHASE3_REMATCH, {"bundles": _frozen(phase2)})
    M3 = max_weight_matching(W)
    _rounds.apply(final, released, M3)
    fill = _rounds.greedy_fill(inst, final, released | unmatched_phase2)

    return PhaseLedger(
        phase1_bundles=_frozen(phase1),
        phase2_bundles=_frozen(phase2),
        phase3_matching=M3,
        leftovers=tuple(fill),
        final=Allocation(_frozen(final)),
        phase1_rounds=tuple(rounds1),
        phase2_rounds=tuple(rounds2),
    )


def reprematch(inst: Instance) -> Allocation:
    return reprematch_ledger(inst).final
