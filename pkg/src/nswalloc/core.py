"""Instances, allocations, Nash social welfare, and per-agent item rankings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .valuations import ADDITIVE_LIKE, BudgetAdditive, RestrictedAdditive, SPLC, Valuation

__all__ = [
    "InstanceError",
    "AllocationError",
    "Instance",
    "Allocation",
    "RankedItems",
    "Welfare",
    "validate_instance",
    "nsw",
    "log_nsw",
    "welfare",
    "rank_items",
    "keepaside_value",
    "standalone_values",
]


class InstanceError(ValueError):
    """An instance violates one of its invariants."""


class AllocationError(ValueError):
    """An allocation is incomplete, overlapping, or the wrong shape."""


@dataclass(frozen=True)
class Instance:
    weights: tuple[float, ...]
    valuations: tuple[Valuation, ...]
    m: int
    metadata: dict | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "valuations", tuple(self.valuations))

    @classmethod
    def build(cls, valuations: Sequence[Valuation], weights: Sequence[float] | None = None, metadata: dict | None = None) -> "Instance":
        """Instance over the items of the first valuation; weights default to 1."""
        valuations = tuple(valuations)
        m = valuations[0].m if valuations else 0
        if weights is None:
            weights = (1.0,) * len(valuations)
        inst = cls(tuple(weights), valuations, m, metadata)
        validate_instance(inst)
        return inst

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def items(self) -> range:
        return range(self.m)

    @property
    def symmetric(self) -> bool:
        return len(set(self.weights)) <= 1

    def scaled(self, factors: Sequence[float]) -> "Instance":
        """Instance whose agent ``i`` values every set ``factors[i]`` times as much."""
        from .valuations import Additive, Coverage, XOS, SubadditiveHalves

        out = []
        for val, c in zip(self.valuations, factors):
            c = float(c)
            if isinstance(val, RestrictedAdditive) or type(val) is Additive:
                out.append(Additive([c * x for x in val.values]))
            elif isinstance(val, BudgetAdditive):
                out.append(BudgetAdditive([c * x for x in val.values], c * val.cap))
            elif isinstance(val, SPLC):
                out.append(SPLC([[c * x for x in row] for row in val.copy_values]))
            elif isinstance(val, Coverage):
                out.append(Coverage([c * w for w in val.element_weights], val.covers))
            elif isinstance(val, XOS):
                out.append(XOS([[c * x for x in cl] for cl in val.clauses]))
            elif isinstance(val, SubadditiveHalves):
                out.append(SubadditiveHalves(val.m_items, c * val.big, val.own))
            else:
                raise TypeError(f"cannot scale valuation family {val.family!r}")
        return Instance(self.weights, tuple(out), self.m, self.metadata)


@dataclass(frozen=True)
class Allocation:
    """One bundle of item indices per agent; bundles are pairwise disjoint."""

    bundles: tuple[frozenset[int], ...]

    def __post_init__(self):
        bundles = tuple(frozenset(int(j) for j in b) for b in self.bundles)
        object.__setattr__(self, "bundles", bundles)
        seen: set[int] = set()
        for i, b in enumerate(bundles):
            clash = seen & b
            if clash:
                raise AllocationError(f"item {min(clash)} assigned twice (again to agent {i})")
            seen |= b

    @classmethod
    def empty(cls, n: int) -> "Allocation":
        return cls(tuple(frozenset() for _ in range(n)))

    @classmethod
    def from_owner(cls, owner: Sequence[int], n: int) -> "Allocation":
        """Build from ``owner[j]`` = agent holding item ``j`` (negative = unassigned)."""
        bundles = [set() for _ in range(n)]
        for j, i in enumerate(owner):
            if i >= 0:
                bundles[int(i)].add(j)
        return cls(tuple(frozenset(b) for b in bundles))

    @property
    def n(self) -> int:
        return len(self.bundles)

    def allocated(self) -> frozenset[int]:
        return frozenset().union(*self.bundles) if self.bundles else frozenset()

    def is_complete(self, m: int) -> bool:
        return self.allocated() == frozenset(range(m))

    def owner(self, m: int) -> list[int]:
        owner = [-1] * m
        for i, b in enumerate(self.bundles):
            for j in b:
                owner[j] = i
        return owner

    def with_items(self, agent: int, items: Iterable[int]) -> "Allocation":
        bundles = list(self.bundles)
        bundles[agent] = bundles[agent] | frozenset(items)
        return Allocation(tuple(bundles))

    def as_lists(self) -> list[list[int]]:
        return [sorted(b) for b in self.bundles]


@dataclass(frozen=True)
class RankedItems:
    agent: int
    order: tuple[int, ...]


@dataclass(frozen=True)
class Welfare:
    nsw: float
    log_nsw: float
    values: tuple[float, ...]


def validate_instance(inst: Instance) -> None:
    """Raise :class:`InstanceError` naming the first violated invariant."""
    if inst.n < 1:
        raise InstanceError("instance needs at least one agent")
    if not isinstance(inst.m, int) or inst.m < 0:
        raise InstanceError(f"item count {inst.m!r} must be a non-negative integer")
    if len(inst.weights) != inst.n:
        raise InstanceError(f"{len(inst.weights)} weights for {inst.n} agents")
    for i, w in enumerate(inst.weights):
        if not math.isfinite(w) or w <= 0:
            raise InstanceError(f"agent {i}: nonpositive weight {w}")
    global_values = None
    for i, val in enumerate(inst.valuations):
        if not isinstance(val, Valuation):
            raise InstanceError(f"agent {i}: {type(val).__name__} is not a valuation")
        if val.m != inst.m:
            raise InstanceError(f"agent {i}: valuation is over {val.m} items, instance has {inst.m}")
        problems = val.problems()
        if problems:
            raise InstanceError(f"agent {i}: {problems[0]}")
        if isinstance(val, RestrictedAdditive):
            if global_values is None:
                global_values = val.global_values
            elif val.global_values != global_values:
                raise InstanceError(f"agent {i}: restricted valuations disagree on global item values")
    splc = [v for v in inst.valuations if isinstance(v, SPLC)]
    if splc:
        shape = [len(r) for r in splc[0].copy_values]
        for v in splc[1:]:
            if [len(r) for r in v.copy_values] != shape:
                raise InstanceError("SPLC agents disagree on the number of copies per good")


def _check_complete(inst: Instance, alloc: Allocation) -> None:
    if alloc.n != inst.n:
        raise AllocationError(f"allocation has {alloc.n} bundles for {inst.n} agents")
    allocated = alloc.allocated()
    stray = [j for j in allocated if not 0 <= j < inst.m]
    if stray:
        raise AllocationError(f"item {min(stray)} out of range [0, {inst.m})")
    if len(allocated) != inst.m:
        missing = min(set(range(inst.m)) - allocated)
        raise AllocationError(f"incomplete allocation: item {missing} unassigned")


def bundle_values(inst: Instance, alloc: Allocation) -> tuple[float, ...]:
    return tuple(val.value(b) for val, b in zip(inst.valuations, alloc.bundles))


def weighted_log_nsw(weights: Sequence[float], values: Sequence[float]) -> float:
    """``sum(w * ln v) / sum(w)``, or ``-inf`` as soon as some value is zero."""
    if any(v <= 0 for v in values):
        return -math.inf
    total = math.fsum(weights)
    return math.fsum(w * math.log(v) for w, v in zip(weights, values)) / total


def welfare(inst: Instance, alloc: Allocation) -> Welfare:
    _check_complete(inst, alloc)
    values = bundle_values(inst, alloc)
    log = weighted_log_nsw(inst.weights, values)
    return Welfare(math.exp(log) if log > -math.inf else 0.0, log, values)


def nsw(inst: Instance, alloc: Allocation) -> float:
    """Weighted geometric mean of bundle values, ``(prod v_i^w_i)^(1/sum w)``."""
    return welfare(inst, alloc).nsw


def log_nsw(inst: Instance, alloc: Allocation) -> float:
    return welfare(inst, alloc).log_nsw


def standalone_values(val: Valuation) -> np.ndarray:
    """Per-item values used for ranking.

    Additive-like families report each item's own value (for SPLC the value
    of that particular copy); everything else falls back to singleton values.
    """
    if isinstance(val, ADDITIVE_LIKE):
        return val.item_values()
    return val.singleton_values()


def rank_items(inst: Instance, agent: int, items: Iterable[int] | None = None) -> RankedItems:
    """Items sorted by the agent's value, descending; ties by ascending index."""
    pool = sorted(set(range(inst.m) if items is None else items))
    for j in pool:
        if not 0 <= j < inst.m:
            raise IndexError(f"item {j} out of range [0, {inst.m})")
    vals = standalone_values(inst.valuations[agent])
    return RankedItems(agent, tuple(sorted(pool, key=lambda j: (-vals[j], j))))


def keepaside_value(inst: Instance, agent: int) -> float:
    """Total value of the agent's items ranked ``2n+1`` through ``m``.

    Budget-additive agents get this sum capped at their budget.  SPLC copies
    count as separate items, each worth its own copy value.
    """
    val = inst.valuations[agent]
    if not isinstance(val, ADDITIVE_LIKE):
        raise TypeError(f"keep-aside value needs an additive-like valuation, got {val.family!r}")
    order = rank_items(inst, agent).order
    vals = val.item_values()
    tail = order[2 * inst.n :]
    u = math.fsum(vals[j] for j in tail)
    if isinstance(val, BudgetAdditive):
        u = min(u, val.cap)
    return u
