"""Valuation families behind a single value-oracle interface.

Every valuation is an immutable object over the item index set ``range(m)``
answering set-value queries.  The families are

* :class:`Additive`: sum of per-item values.
* :class:`RestrictedAdditive`: additive, each item worth either a global
  value ``v_j`` or nothing.
* :class:`BudgetAdditive`: additive value truncated at a cap.
* :class:`SPLC`: separable piecewise-linear concave.  Copies of a good are
  distinct items; the value of holding ``l`` copies of good ``g`` is the sum
  of the first ``l`` copy values of ``g``.
* :class:`Coverage`: weighted size of the union of the universe elements
  covered by the items.
* :class:`XOS`: maximum over a list of additive clauses.
* :class:`SubadditiveHalves`: the two-halves construction that is subadditive
  but not submodular.

Besides ``value`` each class can tabulate its value on every subset of items
(:meth:`Valuation.subset_table`), indexed by bitmask.  The exhaustive oracles
and the Monte Carlo estimators work off these tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

__all__ = [
    "Valuation",
    "Additive",
    "RestrictedAdditive",
    "BudgetAdditive",
    "SPLC",
    "Coverage",
    "XOS",
    "SubadditiveHalves",
    "ADDITIVE_LIKE",
    "SubmodularityReport",
    "value",
    "marginal",
    "check_submodular",
    "check_monotone",
    "valuation_from_dict",
]

# 2**24 float64 entries is 128 MiB, which is as far as the tables go.
MAX_TABLE_ITEMS = 24


def _as_items(S: Iterable[int], m: int) -> frozenset[int]:
    items = frozenset(int(j) for j in S)
    for j in items:
        if j < 0 or j >= m:
            raise IndexError(f"item {j} out of range [0, {m})")
    return items


def _check_table_size(m: int) -> None:
    if m > MAX_TABLE_ITEMS:
        raise ValueError(f"subset table needs 2**{m} entries; limit is {MAX_TABLE_ITEMS} items")


def _additive_table(values: np.ndarray) -> np.ndarray:
    """Sum of ``values`` over every subset, indexed by bitmask."""
    m = len(values)
    _check_table_size(m)
    table = np.zeros(1 << m)
    for k in range(m):
        half = 1 << k
        table[half : 2 * half] = table[:half] + values[k]
    return table


def _count_table(members: np.ndarray) -> np.ndarray:
    """Number of flagged items in every subset, indexed by bitmask."""
    m = len(members)
    _check_table_size(m)
    table = np.zeros(1 << m, dtype=np.int64)
    for k in range(m):
        half = 1 << k
        table[half : 2 * half] = table[:half] + int(members[k])
    return table


class Valuation:
    """Base class: a monotone set function on ``range(m)`` with ``v(empty) = 0``."""

    family: str = "abstract"
    m: int

    def value(self, S: Iterable[int]) -> float:
        return self._value(_as_items(S, self.m))

    def _value(self, items: frozenset[int]) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def marginal(self, j: int, S: Iterable[int]) -> float:
        """Value gained by adding item ``j`` to ``S``; ``j`` must not be in ``S``."""
        items = _as_items(S, self.m)
        if j in items:
            raise ValueError(f"item {j} already in the base set")
        _as_items((j,), self.m)
        return self._value(items | {j}) - self._value(items)

    def singleton_values(self) -> np.ndarray:
        return np.array([self._value(frozenset((j,))) for j in range(self.m)])

    def subset_table(self) -> np.ndarray:
        """Value of every subset; entry ``mask`` holds ``v({j : bit j of mask set})``."""
        _check_table_size(self.m)
        table = np.empty(1 << self.m)
        for mask in range(1 << self.m):
            table[mask] = self._value(frozenset(j for j in range(self.m) if mask >> j & 1))
        return table

    def problems(self) -> list[str]:
        """Internal-consistency violations of the parameters (empty when valid)."""
        return []

    def to_dict(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError


def _nonnegative(name: str, values: Iterable[float]) -> list[str]:
    out = []
    for j, x in enumerate(values):
        if not math.isfinite(x) or x < 0:
            out.append(f"{name}[{j}] = {x} is not a finite non-negative value")
    return out


@dataclass(frozen=True)
class Additive(Valuation):
    values: tuple[float, ...]
    family = "additive"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))

    @property
    def m(self) -> int:
        return len(self.values)

    def _value(self, items):
        return float(sum(self.values[j] for j in sorted(items)))

    def marginal(self, j, S):
        items = _as_items(S, self.m)
        if j in items:
            raise ValueError(f"item {j} already in the base set")
        return self.values[j]

    def item_values(self) -> np.ndarray:
        """Per-item values used for ranking and keep-aside sums."""
        return np.array(self.values, dtype=float)

    def singleton_values(self):
        return self.item_values()

    def subset_table(self):
        return _additive_table(self.item_values())

    def problems(self):
        return _nonnegative("values", self.values)

    def to_dict(self):
        return {"family": self.family, "values": list(self.values)}


@dataclass(frozen=True)
class RestrictedAdditive(Additive):
    """Additive with ``v(j)`` equal to the global value ``v_j`` on the interest set, else 0."""

    values: tuple[float, ...] = field(init=False)
    global_values: tuple[float, ...] = ()
    interest: frozenset[int] = frozenset()
    family = "restricted"

    def __post_init__(self):
        g = tuple(float(x) for x in self.global_values)
        interest = frozenset(int(j) for j in self.interest)
        object.__setattr__(self, "global_values", g)
        object.__setattr__(self, "interest", interest)
        object.__setattr__(self, "values", tuple(g[j] if j in interest else 0.0 for j in range(len(g))))

    def problems(self):
        out = _nonnegative("global_values", self.global_values)
        out += [f"interest item {j} out of range" for j in sorted(self.interest) if not 0 <= j < len(self.global_values)]
        return out

    def to_dict(self):
        return {
            "family": self.family,
            "global_values": list(self.global_values),
            "interest": sorted(self.interest),
        }


@dataclass(frozen=True)
class BudgetAdditive(Valuation):
    values: tuple[float, ...]
    cap: float
    family = "budget_additive"

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(x) for x in self.values))
        object.__setattr__(self, "cap", float(self.cap))

    @property
    def m(self):
        return len(self.values)

    def _value(self, items):
        return min(float(sum(self.values[j] for j in sorted(items))), self.cap)

    def item_values(self):
        return np.array(self.values, dtype=float)

    def subset_table(self):
        return np.minimum(_additive_table(self.item_values()), self.cap)

    def problems(self):
        out = _nonnegative("values", self.values)
        if not math.isfinite(self.cap) or self.cap < 0:
            out.append(f"cap = {self.cap} is not a finite non-negative value")
        return out

    def to_dict(self):
        return {"family": self.family, "values": list(self.values), "cap": self.cap}


@dataclass(frozen=True)
class SPLC(Valuation):
    """Separable piecewise-linear concave valuation over copy-expanded items.

    ``copy_values[g]`` lists the agent's value for the 1st, 2nd, ... copy of
    good ``g``; good ``g`` therefore owns ``len(copy_values[g])`` consecutive
    item indices.  The value of a set depends only on how many copies of
    each good it holds.
    """

    copy_values: tuple[tuple[float, ...], ...]
    family = "splc"

    def __post_init__(self):
        cv = tuple(tuple(float(x) for x in row) for row in self.copy_values)
        object.__setattr__(self, "copy_values", cv)
        good_of = tuple(g for g, row in enumerate(cv) for _ in row)
        object.__setattr__(self, "_good_of", good_of)
        prefix = tuple(tuple(np.concatenate([[0.0], np.cumsum(row)]).tolist()) for row in cv)
        object.__setattr__(self, "_prefix", prefix)

    @property
    def m(self):
        return len(self._good_of)

    @property
    def goods(self) -> int:
        return len(self.copy_values)

    def good_of(self, j: int) -> int:
        return self._good_of[j]

    def copy_counts(self, S: Iterable[int]) -> list[int]:
        counts = [0] * self.goods
        for j in _as_items(S, self.m):
            counts[self._good_of[j]] += 1
        return counts

    def value_counts(self, counts: Iterable[int]) -> float:
        """Value of holding ``counts[g]`` copies of each good ``g``."""
        counts = list(counts)
        if len(counts) != self.goods:
            raise ValueError(f"expected {self.goods} copy counts, got {len(counts)}")
        total = 0.0
        for g, c in enumerate(counts):
            if c < 0 or c > len(self.copy_values[g]):
                raise ValueError(f"good {g}: {c} copies requested, {len(self.copy_values[g])} exist")
            total += self._prefix[g][c]
        return total

    def _value(self, items):
        counts = [0] * self.goods
        for j in items:
            counts[self._good_of[j]] += 1
        return float(sum(self._prefix[g][c] for g, c in enumerate(counts)))

    def item_values(self):
        # each copy counted as a separate item worth its own copy value
        return np.array([x for row in self.copy_values for x in row], dtype=float)

    def subset_table(self):
        _check_table_size(self.m)
        table = np.zeros(1 << self.m)
        good_of = np.array(self._good_of)
        for g in range(self.goods):
            counts = _count_table(good_of == g)
            table += np.asarray(self._prefix[g])[counts]
        return table

    def problems(self):
        out = []
        for g, row in enumerate(self.copy_values):
            out += _nonnegative(f"copy_values[{g}]", row)
            for k in range(1, len(row)):
                if row[k] > row[k - 1]:
                    out.append(f"non-concave copy values for good {g}: copy {k + 1} worth {row[k]} > copy {k} worth {row[k - 1]}")
        return out

    def to_dict(self):
        return {"family": self.family, "copy_values": [list(r) for r in self.copy_values]}


@dataclass(frozen=True)
class Coverage(Valuation):
    """``v(S)`` is the total weight of universe elements covered by items in ``S``."""

    element_weights: tuple[float, ...]
    covers: tuple[frozenset[int], ...]
    family = "coverage"

    def __post_init__(self):
        object.__setattr__(self, "element_weights", tuple(float(x) for x in self.element_weights))
        object.__setattr__(self, "covers", tuple(frozenset(int(e) for e in c) for c in self.covers))

    @property
    def m(self):
        return len(self.covers)

    def _value(self, items):
        covered = set()
        for j in items:
            covered |= self.covers[j]
        return float(sum(self.element_weights[e] for e in sorted(covered)))

    def subset_table(self):
        _check_table_size(self.m)
        u = len(self.element_weights)
        if u > 62:
            return super().subset_table()
        item_masks = [sum(1 << e for e in c) for c in self.covers]
        cover = np.zeros(1 << self.m, dtype=np.int64)
        for k, mask in enumerate(item_masks):
            half = 1 << k
            cover[half : 2 * half] = cover[:half] | mask
        table = np.zeros(1 << self.m)
        for e, w in enumerate(self.element_weights):
            table += w * ((cover >> e) & 1)
        return table

    def problems(self):
        out = _nonnegative("element_weights", self.element_weights)
        u = len(self.element_weights)
        for j, c in enumerate(self.covers):
            out += [f"item {j} covers element {e} outside universe of size {u}" for e in sorted(c) if not 0 <= e < u]
        return out

    def to_dict(self):
        return {
            "family": self.family,
            "element_weights": list(self.element_weights),
            "covers": [sorted(c) for c in self.covers],
        }


@dataclass(frozen=True)
class XOS(Valuation):
    """Maximum over additive clauses; each clause lists one value per item."""

    clauses: tuple[tuple[float, ...], ...]
    family = "xos"

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(float(x) for x in c) for c in self.clauses))

    @property
    def m(self):
        return len(self.clauses[0]) if self.clauses else 0

    def _value(self, items):
        if not items:
            return 0.0
        return max(float(sum(c[j] for j in sorted(items))) for c in self.clauses)

    def clause_values(self, S: Iterable[int]) -> list[float]:
        items = _as_items(S, self.m)
        return [float(sum(c[j] for j in sorted(items))) for c in self.clauses]

    def subset_table(self):
        return np.max([_additive_table(np.asarray(c)) for c in self.clauses], axis=0)

    def problems(self):
        if not self.clauses:
            return ["XOS valuation needs at least one clause"]
        out = []
        for h, c in enumerate(self.clauses):
            if len(c) != len(self.clauses[0]):
                out.append(f"clause {h} has {len(c)} entries, expected {len(self.clauses[0])}")
            out += _nonnegative(f"clauses[{h}]", c)
        return out

    def to_dict(self):
        return {"family": self.family, "clauses": [list(c) for c in self.clauses]}


@dataclass(frozen=True)
class SubadditiveHalves(Valuation):
    """``v(S) = max(M, |S ∩ own| * M)`` for nonempty ``S`` and ``v(empty) = 0``.

    ``own`` is the half of the items this agent is after.
    """

    m_items: int
    big: float
    own: frozenset[int]
    family = "subadditive_halves"

    def __post_init__(self):
        object.__setattr__(self, "own", frozenset(int(j) for j in self.own))
        object.__setattr__(self, "big", float(self.big))

    @property
    def m(self):
        return self.m_items

    def _value(self, items):
        if not items:
            return 0.0
        return max(self.big, len(items & self.own) * self.big)

    def subset_table(self):
        counts = _count_table(np.array([j in self.own for j in range(self.m)]))
        table = np.maximum(self.big, counts * self.big)
        table[0] = 0.0
        return table

    def problems(self):
        out = []
        if not math.isfinite(self.big) or self.big <= 0:
            out.append(f"M = {self.big} must be positive")
        out += [f"own item {j} out of range" for j in sorted(self.own) if not 0 <= j < self.m_items]
        return out

    def to_dict(self):
        return {"family": self.family, "m": self.m_items, "M": self.big, "own": sorted(self.own)}


ADDITIVE_LIKE = (Additive, BudgetAdditive, SPLC)

_FAMILIES = {
    "additive": lambda d: Additive(d["values"]),
    "restricted": lambda d: RestrictedAdditive(global_values=d["global_values"], interest=d["interest"]),
    "budget_additive": lambda d: BudgetAdditive(d["values"], d["cap"]),
    "splc": lambda d: SPLC(d["copy_values"]),
    "coverage": lambda d: Coverage(d["element_weights"], d["covers"]),
    "xos": lambda d: XOS(d["clauses"]),
    "subadditive_halves": lambda d: SubadditiveHalves(d["m"], d["M"], d["own"]),
}


def valuation_from_dict(d: dict) -> Valuation:
    try:
        build = _FAMILIES[d["family"]]
    except KeyError:
        raise ValueError(f"unknown valuation family {d.get('family')!r}") from None
    return build(d)


def value(val: Valuation, S: Iterable[int]) -> float:
    return val.value(S)


def marginal(val: Valuation, j: int, S: Iterable[int]) -> float:
    return val.marginal(j, S)


@dataclass(frozen=True)
class SubmodularityReport:
    passed: bool
    trials: int
    witness: tuple | None = None  # (h, S1, S2, gain over S1, gain over S1 ∪ S2)

    def __bool__(self):
        return self.passed


def check_submodular(val: Valuation, trials: int = 1000, seed: int | None = 0, tol: float = 1e-9) -> SubmodularityReport:
    """Sample ``(h, S1, S2)`` and look for ``v(h | S1 ∪ S2) > v(h | S1)``."""
    m = val.m
    if m == 0:
        return SubmodularityReport(True, 0)
    rng = np.random.default_rng(seed)
    for t in range(trials):
        h = int(rng.integers(m))
        rest = np.array([j for j in range(m) if j != h])
        p1, p2 = rng.random(2)
        S1 = frozenset(int(j) for j in rest[rng.random(len(rest)) < p1])
        S2 = frozenset(int(j) for j in rest[rng.random(len(rest)) < p2]) - S1
        gain_small = val.marginal(h, S1)
        gain_big = val.marginal(h, S1 | S2)
        if gain_big > gain_small + tol:
            return SubmodularityReport(False, t + 1, (h, S1, S2, gain_small, gain_big))
    return SubmodularityReport(True, trials)


def check_monotone(val: Valuation, trials: int = 1000, seed: int | None = 0) -> tuple | None:
    """Return a ``(S, T)`` pair with ``S ⊆ T`` and ``v(S) > v(T)``, or None."""
    m = val.m
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        T = frozenset(int(j) for j in np.flatnonzero(rng.random(m) < rng.random()))
        S = frozenset(j for j in T if rng.random() < 0.5)
        if val.value(S) > val.value(T):
            return S, T
    return None
