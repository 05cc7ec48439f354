"""Grid search over target value vectors for a small, fixed number of agents.

Every valuation is rescaled so that all agents value the full item set at
the same power ``Max`` of ``1 + delta``.  A target vector then assigns each
agent a grid value ``(1 + delta) ** k_i``, and its weighted log objective is
``sum_i eta_i * k_i``.  The search looks for the largest objective level at
which some target vector is accepted by a feasibility oracle:

* ``exact``: brute force over all allocations, accepting a target vector
  when some allocation reaches ``(1 - 1/e) * V_i`` for every agent;
* ``rounded``: a fractional point grown greedily on the multilinear
  extension, decomposed into integral allocations and swap-rounded.  This
  one is a heuristic and carries no guarantee.

With the exact oracle the returned allocation has NSW at least
``(1 - 1/e) / (1 + delta)`` times the optimum, because the grid point just
below the optimal value vector is always accepted.

The module also exposes the rounding building blocks: Monte Carlo and exact
multilinear extensions, convex decomposition of a fractional assignment,
and randomized swap rounding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _rounds
from .core import Allocation, Instance
from .exact import enumerate_values
from .valuations import MAX_TABLE_ITEMS, Valuation

__all__ = [
    "GridSearchConfig",
    "GridSearchResult",
    "FractionalAssignment",
    "ConvexDecomposition",
    "ExactOracle",
    "RoundedOracle",
    "const_agents_solve",
    "const_agents_search",
    "multilinear_estimate",
    "exact_multilinear",
    "decompose",
    "swap_round",
]

SLACK = 1 - 1 / math.e
_RTOL = 1e-9
_ZERO = 1e-12


@dataclass(frozen=True)
class GridSearchConfig:
    delta: float = 0.05
    beta: float | None = None  # lower end of the grid; None means delta times the smallest positive singleton
    oracle: str = "exact"
    sample_count: int = 2000
    seed: int = 0
    limit: int | None = None

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.beta is not None and not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.oracle not in ("exact", "rounded"):
            raise ValueError(f"unknown oracle {self.oracle!r}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be at least 1")


@dataclass(frozen=True)
class FractionalAssignment:
    """``y[i, j]`` is the fraction of item ``j`` given to agent ``i``."""

    y: np.ndarray

    def __post_init__(self):
        y = np.array(self.y, dtype=float, copy=True)
        if y.ndim != 2:
            raise ValueError("fractional assignment must be an agents x items matrix")
        if (y < -_ZERO).any() or (y > 1 + _ZERO).any():
            raise ValueError("entries must lie in [0, 1]")
        if (y.sum(axis=0) > 1 + 1e-9).any():
            raise ValueError("some item is assigned more than once in total")
        y = np.clip(y, 0.0, 1.0)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class ConvexDecomposition:
    terms: tuple[tuple[float, Allocation], ...]
    n: int
    m: int

    def matrix(self) -> np.ndarray:
        """The fractional assignment these terms average to."""
        y = np.zeros((self.n, self.m))
        for coef, alloc in self.terms:
            for i, bundle in enumerate(alloc.bundles):
                for j in bundle:
                    y[i, j] += coef
        return y


# -- multilinear extension ---------------------------------------------------


def _mask_weights(m: int) -> np.ndarray:
    return np.int64(1) << np.arange(m, dtype=np.int64)


def multilinear_estimate(val: Valuation, y: Sequence[float], samples: int = 10_000, seed: int | None = 0) -> float:
    """Monte Carlo estimate of ``E[v(Z)]`` with item ``j`` in ``Z`` independently w.p. ``y[j]``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (val.m,):
        raise ValueError(f"expected {val.m} probabilities")
    if (y < 0).any() or (y > 1).any():
        raise ValueError("probabilities must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    use_table = val.m <= MAX_TABLE_ITEMS
    table = val.subset_table() if use_table else None
    total = 0.0
    chunk = max(1, 2**20 // max(1, val.m))
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        Z = rng.random((k, val.m)) < y
        if use_table:
            total += float(table[Z.astype(np.int64) @ _mask_weights(val.m)].sum())
        else:
            total += sum(val.value(np.flatnonzero(z)) for z in Z)
        done += k
    return total / samples


def _mask_probabilities(y: np.ndarray) -> np.ndarray:
    p = np.ones(1)
    for q in y:
        p = np.concatenate([p * (1 - q), p * q])
    return p


def exact_multilinear(val: Valuation, y: Sequence[float]) -> float:
    """Multilinear extension by summing over all ``2**m`` subsets."""
    y = np.asarray(y, dtype=float)
    if y.shape != (val.m,):
        raise ValueError(f"expected {val.m} probabilities")
    return float(_mask_probabilities(y) @ val.subset_table())


def _gradient(table: np.ndarray, y: np.ndarray) -> np.ndarray:
    grad = np.empty(len(y))
    for j in range(len(y)):
        hi, lo = y.copy(), y.copy()
        hi[j], lo[j] = 1.0, 0.0
        grad[j] = _mask_probabilities(hi) @ table - _mask_probabilities(lo) @ table
    return grad


# -- decomposition and rounding ----------------------------------------------


def decompose(y) -> ConvexDecomposition:
    """Write ``y`` as a convex combination of (partial) allocations.

    Each step builds one allocation by giving every item to whoever holds
    the most remaining mass for it, where "nobody" holds ``1 - sum_i y[i, j]``.
    Its coefficient is the smallest of those masses, which is then peeled off.
    """
    fa = y if isinstance(y, FractionalAssignment) else FractionalAssignment(y)
    n, m = fa.n, fa.m
    if m == 0:
        return ConvexDecomposition(((1.0, Allocation.empty(n)),), n, m)
    mass = np.vstack([fa.y, np.clip(1 - fa.y.sum(axis=0), 0.0, 1.0)])
    mass[mass < _ZERO] = 0.0
    terms = []
    left = 1.0
    while left > _ZERO:
        pick = np.argmax(mass, axis=0)
        coef = float(mass[pick, np.arange(m)].min())
        if coef <= _ZERO:
            break
        owner = np.where(pick == n, -1, pick)
        terms.append((coef, Allocation.from_owner(owner.tolist(), n)))
        mass[pick, np.arange(m)] -= coef
        mass[mass < _ZERO] = 0.0
        left -= coef
    total = sum(c for c, _ in terms)
    terms = tuple((c / total, a) for c, a in terms)
    return ConvexDecomposition(terms, n, m)


def swap_round(dec: ConvexDecomposition, seed: int | None = 0) -> Allocation:
    """Merge the terms pairwise into one allocation, preserving marginals in expectation.

    Merging ``(b0, S0)`` with ``(b1, S1)``: for each item the two assign
    differently, with probability ``b0 / (b0 + b1)`` ``S1`` adopts ``S0``'s
    choice and otherwise ``S0`` adopts ``S1``'s.  In the allocation matroid
    each item is its own part, so every swap resolves one item.
    """
    rng = np.random.default_rng(seed)
    n, m = dec.n, dec.m
    b0, alloc0 = dec.terms[0]
    cur = np.array(alloc0.owner(m))
    for b1, alloc1 in dec.terms[1:]:
        other = np.array(alloc1.owner(m))
        for j in np.flatnonzero(cur != other):
            if rng.random() < b0 / (b0 + b1):
                other[j] = cur[j]
            else:
                cur[j] = other[j]
        b0 += b1
    return Allocation.from_owner(cur.tolist(), n)


# -- oracles -----------------------------------------------------------------


class ExactOracle:
    """First allocation (in enumeration order) reaching ``slack * V_i`` for every agent."""

    def __init__(self, inst: Instance, slack: float = SLACK, limit: int | None = None):
        chunks = list(enumerate_values(inst, limit))
        self.masks = np.concatenate([c[1] for c in chunks])
        self.values = np.concatenate([c[2] for c in chunks])
        self.slack = slack
        self.calls = 0

    def first_feasible(self, targets: np.ndarray) -> tuple[int, Allocation] | None:
        """Index of the first feasible row of ``targets`` and its witness."""
        targets = np.atleast_2d(np.asarray(targets, dtype=float))
        need = self.slack * targets * (1 - _RTOL)
        rows = max(1, 2**22 // max(1, self.values.size))
        for start in range(0, len(need), rows):
            block = need[start : start + rows]
            self.calls += len(block)
            ok = (self.values[None, :, :] >= block[:, None, :]).all(axis=2)
            hit = ok.any(axis=1)
            if hit.any():
                k = int(np.argmax(hit))
                row = self.masks[int(np.argmax(ok[k]))]
                return start + k, Allocation(tuple(frozenset(j for j in range(64) if int(b) >> j & 1) for b in row))
        return None

    def __call__(self, targets) -> Allocation | None:
        found = self.first_feasible(targets)
        return None if found is None else found[1]


class RoundedOracle:
    """Heuristic oracle: greedy fractional point, decomposition and swap rounding.

    The fractional point is grown in ``1/steps`` increments; each increment
    gives every item to the agent with the best multilinear gradient,
    favouring agents still short of their target.  Acceptance is decided on
    the rounded allocation itself.
    """

    def __init__(self, inst: Instance, slack: float = SLACK, samples: int = 2000, seed: int = 0, steps: int = 10, attempts: int = 8):
        if inst.m > MAX_TABLE_ITEMS:
            raise ValueError(f"the rounded oracle handles at most {MAX_TABLE_ITEMS} items")
        self.inst = inst
        self.tables = [v.subset_table() for v in inst.valuations]
        self.slack, self.samples, self.seed = slack, samples, seed
        self.steps, self.attempts = steps, attempts
        self.calls = 0

    def fractional(self, targets: np.ndarray) -> FractionalAssignment:
        n, m = self.inst.n, self.inst.m
        y = np.zeros((n, m))
        for _ in range(self.steps):
            F = np.array([_mask_probabilities(y[i]) @ self.tables[i] for i in range(n)])
            urgency = np.where(F < targets, 1.0, 1e-3) / np.maximum(targets, _ZERO)
            grad = np.vstack([_gradient(self.tables[i], y[i]) for i in range(n)])
            best = np.argmax(urgency[:, None] * grad, axis=0)
            y[best, np.arange(m)] += 1.0 / self.steps
        return FractionalAssignment(np.minimum(y, 1.0))

    def __call__(self, targets) -> Allocation | None:
        self.calls += 1
        targets = np.asarray(targets, dtype=float)
        need = self.slack * targets * (1 - _RTOL)
        inst = self.inst
        fa = self.fractional(targets)
        for i, val in enumerate(inst.valuations):
            if multilinear_estimate(val, fa.y[i], self.samples, self.seed + i) < need[i] * (1 - 0.1):
                return None
        dec = decompose(fa)
        for attempt in range(self.attempts):
            alloc = swap_round(dec, self.seed + attempt)
            bundles = [set(b) for b in alloc.bundles]
            _rounds.greedy_fill(inst, bundles, set(range(inst.m)) - alloc.allocated())
            values = [v.value(b) for v, b in zip(inst.valuations, bundles)]
            if all(v >= t for v, t in zip(values, need)):
                return Allocation(tuple(frozenset(b) for b in bundles))
        return None

    def first_feasible(self, targets: np.ndarray) -> tuple[int, Allocation] | None:
        for k, row in enumerate(np.atleast_2d(targets)):
            alloc = self(row)
            if alloc is not None:
                return k, alloc
        return None


# -- grid search -------------------------------------------------------------


@dataclass(frozen=True)
class GridSearchResult:
    allocation: Allocation
    exponents: tuple[int, ...] | None  # accepted grid point, None when nothing was accepted
    scale: tuple[float, ...]
    grid: tuple[int, int]  # smallest and largest exponent
    iterations: int
    oracle_calls: int
    history: tuple[tuple[float, bool], ...] = field(default=())


def _fallback(inst: Instance) -> Allocation:
    bundles: list[set[int]] = [set() for _ in range(inst.n)]
    _rounds.greedy_fill(inst, bundles, range(inst.m))
    return Allocation(tuple(frozenset(b) for b in bundles))


def _frontier(eta: np.ndarray, level: float, k_lo: int, k_hi: int) -> np.ndarray:
    """Grid vectors reaching ``level``, last coordinate as small as possible, in lexicographic order."""
    n = len(eta)
    rows = []
    tol = 1e-9 * max(1.0, abs(level))
    for head in itertools.product(range(k_lo, k_hi + 1), repeat=n - 1):
        rest = level - float(np.dot(eta[:-1], head))
        last = max(k_lo, math.ceil((rest - tol) / eta[-1]))
        if last <= k_hi:
            rows.append((*head, last))
    return np.array(rows, dtype=np.int64).reshape(-1, n)


def const_agents_search(inst: Instance, cfg: GridSearchConfig | None = None) -> GridSearchResult:
    """Bisect on the weighted grid exponent ``sum_i eta_i k_i`` and report what was found."""
    cfg = cfg or GridSearchConfig()
    n = inst.n
    base = 1 + cfg.delta
    totals = np.array([v.value(range(inst.m)) for v in inst.valuations])
    if n == 0 or (totals <= 0).any():
        # every allocation has NSW zero
        return GridSearchResult(_fallback(inst), None, (1.0,) * n, (0, 0), 0, 0)

    k_hi = math.ceil(math.log(totals.max(), base) - 1e-12)
    top = base**k_hi
    scale = top / totals
    scaled = inst.scaled(scale)
    singles = np.concatenate([v.singleton_values() for v in scaled.valuations])
    positive = singles[singles > 0]
    beta = cfg.beta if cfg.beta is not None else cfg.delta * (positive.min() if positive.size else top)
    k_lo = min(k_hi, math.floor(math.log(beta, base)))

    if cfg.oracle == "exact":
        oracle = ExactOracle(scaled, SLACK, cfg.limit)
    else:
        oracle = RoundedOracle(scaled, SLACK, cfg.sample_count, cfg.seed)
    eta = np.asarray(inst.weights, dtype=float)
    cap = 64 * max(1, math.ceil(math.log(top / beta, base)))

    def probe(level):
        cands = _frontier(eta, level, k_lo, k_hi)
        if not len(cands):
            return None
        found = oracle.first_feasible(base ** cands.astype(float))
        return None if found is None else (tuple(int(k) for k in cands[found[0]]), found[1])

    history = []
    lo_level = float(eta.sum() * k_lo)
    best = probe(lo_level)
    history.append((lo_level, best is not None))
    if best is None:
        return GridSearchResult(_fallback(inst), None, tuple(scale), (k_lo, k_hi), 0, oracle.calls, tuple(history))
    lo_level = float(np.dot(eta, best[0]))
    hi_level = float(eta.sum() * k_hi) + min(eta) / 2  # just above the largest level
    tol = 1e-9 * max(1.0, abs(hi_level))
    iterations = 0
    while hi_level - lo_level > tol and iterations < cap:
        iterations += 1
        mid = (lo_level + hi_level) / 2
        hit = probe(mid)
        history.append((mid, hit is not None))
        if hit is None:
            hi_level = mid
        else:
            best = hit
            # feasible at mid means feasible at every lower level
            lo_level = max(mid, float(np.dot(eta, hit[0])))
    if iterations >= cap:
        raise RuntimeError("grid search did not converge within the iteration cap")
    exps, alloc = best
    return GridSearchResult(alloc, exps, tuple(scale), (k_lo, k_hi), iterations, oracle.calls, tuple(history))


def const_agents_solve(inst: Instance, cfg: GridSearchConfig | None = None) -> Allocation:
    return const_agents_search(inst, cfg).allocation
