"""Envy-freeness up to one item (EF1), strong EF1, and Pareto optimality."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Allocation, AllocationError, Instance
from .exact import is_pareto_optimal

__all__ = ["Check", "FairnessReport", "is_ef1", "is_strong_ef1", "check_fairness"]

# absolute slack for float comparisons between bundle values
TOL = 1e-9


@dataclass(frozen=True)
class Check:
    ok: bool
    witnesses: tuple[tuple[int, int, str], ...] = ()

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class FairnessReport:
    ef1: bool
    strong_ef1: bool
    po: bool | None = None
    witnesses: tuple[tuple[int, int, str], ...] = field(default=())


def _require_complete(inst: Instance, alloc: Allocation) -> None:
    if alloc.n != inst.n or not alloc.is_complete(inst.m):
        raise AllocationError("fairness checks need a complete allocation")


def is_ef1(inst: Instance, alloc: Allocation) -> Check:
    """Every envy of ``i`` towards ``k`` disappears after dropping some item of ``x_k``."""
    _require_complete(inst, alloc)
    witnesses = []
    for i, vi in enumerate(inst.valuations):
        own = vi.value(alloc.bundles[i])
        for k, other in enumerate(alloc.bundles):
            if k == i or vi.value(other) <= own + TOL:
                continue
            if not any(vi.value(other - {g}) <= own + TOL for g in other):
                witnesses.append((i, k, f"agent {i} envies agent {k} after removing any single item"))
    return Check(not witnesses, tuple(witnesses))


def is_strong_ef1(inst: Instance, alloc: Allocation) -> Check:
    """Each bundle has one item whose removal ends everyone's envy towards it."""
    _require_complete(inst, alloc)
    own = [v.value(b) for v, b in zip(inst.valuations, alloc.bundles)]
    witnesses = []
    for k, bundle in enumerate(alloc.bundles):
        if not bundle:
            continue
        fixed = False
        for g in sorted(bundle):
            rest = bundle - {g}
            if all(own[i] + TOL >= inst.valuations[i].value(rest) for i in range(inst.n) if i != k):
                fixed = True
                break
        if not fixed:
            enviers = [i for i in range(inst.n) if i != k and inst.valuations[i].value(bundle) > own[i] + TOL]
            witnesses.append((enviers[0] if enviers else -1, k, f"no single item of agent {k}'s bundle removes all envy"))
    return Check(not witnesses, tuple(witnesses))


def check_fairness(inst: Instance, alloc: Allocation, pareto: bool = False, limit: int | None = None) -> FairnessReport:
    ef1 = is_ef1(inst, alloc)
    strong = is_strong_ef1(inst, alloc)
    if strong and not ef1:
        raise AssertionError("strong EF1 holds but EF1 fails")  # pragma: no cover - invariant
    po = bool(is_pareto_optimal(inst, alloc, limit)) if pareto else None
    return FairnessReport(bool(ef1), bool(strong), po, ef1.witnesses + strong.witnesses)
