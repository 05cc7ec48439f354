"""SMatch: repeated matchings with a keep-aside estimate in the first round.

The first matching uses edge weights ``eta_i * ln(v_i(j) + u_i / n)``,
where ``u_i`` is the agent's value for everything outside its top ``2n``
items.  This gives the high-value items to agents who would not be
compensated later.  Subsequent rounds match the remaining items on the
agent's resulting bundle value, until nothing is left.

Three variants:

``additive``
    additive or restricted-additive agents; later rounds use
    ``v_i(x_i) + v_i(j)``.
``marginal``
    budget-additive and SPLC agents (additive also accepted); later rounds
    use ``v_i(x_i ∪ {j})``.  SPLC copies are already separate items in
    :class:`~nswalloc.valuations.SPLC`.
``restricted``
    restricted-additive agents; an item never goes to an agent valuing it
    at zero, which keeps the output Pareto optimal.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _rounds
from .core import Allocation, Instance, keepaside_value
from .matching import Matching, Mode, build_weights, max_weight_matching
from .valuations import ADDITIVE_LIKE, Additive, RestrictedAdditive

__all__ = ["VARIANTS", "IncompatibleValuationError", "SMatchState", "SMatchTrace", "smatch", "smatch_trace"]

VARIANTS = ("additive", "marginal", "restricted")


class IncompatibleValuationError(TypeError):
    """The algorithm does not apply to the instance's valuation families."""


@dataclass(frozen=True)
class SMatchState:
    u: tuple[float, ...]
    bundles: tuple[frozenset[int], ...]
    round: int


@dataclass(frozen=True)
class SMatchTrace:
    u: tuple[float, ...]
    rounds: tuple[Matching, ...]
    # items nobody could be matched to, handed to agent 0 in the given round
    leftovers: tuple[tuple[int, tuple[int, ...]], ...]
    allocation: Allocation


def _check_variant(inst: Instance, variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown SMatch variant {variant!r}; choose from {VARIANTS}")
    for i, val in enumerate(inst.valuations):
        if variant == "additive" and not isinstance(val, Additive):
            raise IncompatibleValuationError(f"smatch requires additive valuations (agent {i} is {val.family})")
        if variant == "restricted" and not isinstance(val, RestrictedAdditive):
            raise IncompatibleValuationError(f"smatch-restricted requires restricted additive valuations (agent {i} is {val.family})")
        if variant == "marginal" and not isinstance(val, ADDITIVE_LIKE):
            raise IncompatibleValuationError(f"smatch requires additive-like valuations (agent {i} is {val.family})")


def smatch_trace(inst: Instance, variant: str = "additive") -> SMatchTrace:
    """Run SMatch and keep every round's matching."""
    _check_variant(inst, variant)
    u = tuple(keepaside_value(inst, i) for i in range(inst.n))
    bundles: list[set[int]] = [set() for _ in range(inst.n)]
    remaining = set(range(inst.m))
    rounds: list[Matching] = []
    leftovers: list[tuple[int, tuple[int, ...]]] = []
    later = Mode.SMATCH_LATER_MARGINAL if variant == "marginal" else Mode.SMATCH_LATER

    t = 0
    while remaining:
        state = SMatchState(u, tuple(frozenset(b) for b in bundles), t)
        if t == 0:
            W = build_weights(inst, sorted(remaining), Mode.SMATCH_FIRST, {"u": state.u}, skip_zero_value=variant == "restricted")
        else:
            # an item adding nothing to an agent's bundle is not an edge
            W = build_weights(inst, sorted(remaining), later, {"bundles": state.bundles}, skip_zero_value=True)
        dead = _rounds.dead_columns(W)
        if dead:
            bundles[0].update(dead)
            remaining.difference_update(dead)
            leftovers.append((t, tuple(dead)))
        M = max_weight_matching(W)
        _rounds.apply(bundles, remaining, M)
        rounds.append(M)
        t += 1
    alloc = Allocation(tuple(frozenset(b) for b in bundles))
    return SMatchTrace(u, tuple(rounds), tuple(leftovers), alloc)


def smatch(inst: Instance, variant: str = "additive") -> Allocation:
    return smatch_trace(inst, variant).allocation
