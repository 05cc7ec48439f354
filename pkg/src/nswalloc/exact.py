"""Brute-force oracles: exact NSW optimum, value-vector feasibility, Pareto checks.

All three enumerate the ``n**m`` complete allocations.  Allocations are
encoded as owner tuples ``(a_0, ..., a_{m-1})`` with ``a_j`` the agent
receiving item ``j``, and visited in lexicographic order of that tuple
(item 0 is the most significant digit).  "First" always refers to this
order, which is also the tie-break for the optimum.

Bundle values come from per-agent subset tables so a chunk of allocations
is evaluated with a handful of numpy gathers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .core import Allocation, Instance, nsw as _nsw, log_nsw as _log_nsw, bundle_values

__all__ = [
    "OracleLimitError",
    "OptResult",
    "ParetoResult",
    "DEFAULT_LIMIT",
    "oracle_limit",
    "exact_opt",
    "feasible",
    "is_pareto_optimal",
    "enumerate_values",
]

DEFAULT_LIMIT = 10**7
_CHUNK_BITS = 16


class OracleLimitError(RuntimeError):
    """The exhaustive search would visit more allocations than allowed."""


def oracle_limit(limit: int | None = None) -> int:
    """Explicit limit, else ``$NSW_ORACLE_LIMIT``, else ``DEFAULT_LIMIT``."""
    if limit is not None:
        return int(limit)
    env = os.environ.get("NSW_ORACLE_LIMIT")
    return int(float(env)) if env else DEFAULT_LIMIT


def _count(inst: Instance) -> int:
    return inst.n ** inst.m


def _guard(inst: Instance, limit: int | None) -> None:
    cap = oracle_limit(limit)
    if _count(inst) > cap:
        raise OracleLimitError(f"{inst.n}**{inst.m} = {_count(inst)} allocations exceeds the oracle limit {cap}")


def _tables(inst: Instance) -> list[np.ndarray]:
    return [val.subset_table() for val in inst.valuations]


def _digit_masks(n: int, k: int, shift: int) -> np.ndarray:
    """Per-agent item bitmasks for all ``n**k`` owner tuples of ``k`` items.

    The tuples cover items ``shift .. shift+k-1`` in lexicographic order
    (lowest item index most significant).  Shape ``(n**k, n)``.
    """
    count = n**k
    idx = np.arange(count, dtype=np.int64)
    masks = np.zeros((count, n), dtype=np.int64)
    for pos in range(k):
        item = shift + pos
        digit = (idx // n ** (k - 1 - pos)) % n
        masks[np.arange(count), digit] |= np.int64(1) << item
    return masks


def enumerate_values(inst: Instance, limit: int | None = None) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield ``(first_index, masks, values)`` chunks over all allocations.

    ``masks[r, i]`` is the bundle bitmask of agent ``i`` in allocation
    ``first_index + r`` and ``values[r, i]`` its value.
    """
    _guard(inst, limit)
    n, m = inst.n, inst.m
    if m == 0:
        yield 0, np.zeros((1, n), dtype=np.int64), np.array([[val.value(()) for val in inst.valuations]])
        return
    if n == 1:
        full = np.array([[(1 << m) - 1]], dtype=np.int64)
        yield 0, full, np.array([[inst.valuations[0].value(range(m))]])
        return
    tables = _tables(inst)
    low = min(m, max(1, int(_CHUNK_BITS / math.log2(n))))
    high = m - low
    low_masks = _digit_masks(n, low, high)
    high_masks = _digit_masks(n, high, 0) if high else np.zeros((1, n), dtype=np.int64)
    per_chunk = n**low
    agent_cols = np.arange(n)
    for h in range(high_masks.shape[0]):
        masks = low_masks | high_masks[h]
        values = np.empty(masks.shape)
        for i in agent_cols:
            values[:, i] = tables[i][masks[:, i]]
        yield h * per_chunk, masks, values


def _index_to_allocation(index: int, n: int, m: int) -> Allocation:
    owner = [0] * m
    for j in range(m - 1, -1, -1):
        index, owner[j] = divmod(index, n)
    return Allocation.from_owner(owner, n)


def _mask_to_allocation(row: np.ndarray) -> Allocation:
    return Allocation(tuple(frozenset(j for j in range(64) if int(mask) >> j & 1) for mask in row))


@dataclass(frozen=True)
class OptResult:
    best: Allocation
    opt_nsw: float
    opt_log_nsw: float
    explored: int


def exact_opt(inst: Instance, limit: int | None = None) -> OptResult:
    """Allocation maximizing NSW by exhaustive enumeration.

    Allocations compare first by the number of agents with zero value
    (fewer is better), then by the weighted log-NSW of the remaining agents.
    The first allocation in enumeration order wins ties.
    """
    eta = np.asarray(inst.weights)
    best_key = None
    best_row = None
    explored = 0
    for start, masks, values in enumerate_values(inst, limit):
        explored += len(values)
        positive = values > 0
        zeros = (~positive).sum(axis=1)
        with np.errstate(divide="ignore"):
            logs = np.where(positive, np.log(np.where(positive, values, 1.0)), 0.0)
        score = logs @ eta
        zmin = zeros.min()
        cand = np.flatnonzero(zeros == zmin)
        r = cand[np.argmax(score[cand])]
        key = (-int(zmin), float(score[r]))
        if best_key is None or key > best_key:
            best_key, best_row = key, masks[r]
    best = _mask_to_allocation(best_row)
    return OptResult(best, _nsw(inst, best), _log_nsw(inst, best), explored)


def feasible(inst: Instance, targets: Sequence[float], slack: float = 1.0, limit: int | None = None) -> Allocation | None:
    """First allocation with ``v_i(x_i) >= slack * targets[i]`` for all ``i``, else None."""
    need = slack * np.asarray(targets, dtype=float)
    if need.shape != (inst.n,):
        raise ValueError(f"expected {inst.n} targets")
    for _, masks, values in enumerate_values(inst, limit):
        ok = np.all(values >= need, axis=1)
        if ok.any():
            return _mask_to_allocation(masks[int(np.argmax(ok))])
    return None


@dataclass(frozen=True)
class ParetoResult:
    optimal: bool
    witness: Allocation | None = None

    def __bool__(self):
        return self.optimal


def is_pareto_optimal(inst: Instance, alloc: Allocation, limit: int | None = None, rtol: float = 1e-9) -> ParetoResult:
    """Search for a complete allocation that weakly improves everyone and strictly someone.

    Values within ``rtol`` (relative) of each other count as equal.  The
    witness, when one exists, is the first dominating allocation.
    """
    current = np.asarray(bundle_values(inst, alloc))
    tol = rtol * np.maximum(1.0, np.abs(current))
    for _, masks, values in enumerate_values(inst, limit):
        weak = np.all(values >= current - tol, axis=1)
        strict = np.any(values > current + tol, axis=1)
        dom = weak & strict
        if dom.any():
            return ParetoResult(False, _mask_to_allocation(masks[int(np.argmax(dom))]))
    return ParetoResult(True)
