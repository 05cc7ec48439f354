"""Maximum-weight agent/item matchings on log-valued weight matrices.

Weights are ``eta_i * ln(arg)`` for some mode-dependent argument; an edge
whose argument is zero is forbidden and carries :data:`SENTINEL`.  The
matching returned is of maximum cardinality over the allowed edges and,
among those, of maximum total weight.  Remaining ties go to the
lexicographically smallest sorted ``(agent, item)`` sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import Instance

__all__ = [
    "SENTINEL",
    "WeightMatrix",
    "Matching",
    "Mode",
    "max_weight_matching",
    "build_weights",
    "matching_weight",
]

SENTINEL = -math.inf

# relative tolerance when deciding that two matchings weigh the same
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class WeightMatrix:
    """Agents x columns weights; ``items[c]`` is the item index behind column ``c``."""

    weights: np.ndarray
    items: tuple[int, ...]

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2:
            raise ValueError("weight matrix must be two-dimensional")
        if w.shape[1] != len(self.items):
            raise ValueError(f"{w.shape[1]} columns but {len(self.items)} item labels")
        if np.isnan(w).any() or np.isposinf(w).any():
            raise ValueError("weights must be finite or SENTINEL")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "items", tuple(int(j) for j in self.items))

    @classmethod
    def from_array(cls, weights) -> "WeightMatrix":
        w = np.asarray(weights, dtype=float)
        return cls(w, tuple(range(w.shape[1])))

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def cols(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class Matching:
    """Pairs of ``(agent, item)``, sorted by agent."""

    pairs: tuple[tuple[int, int], ...]

    def as_dict(self) -> dict[int, int]:
        return dict(self.pairs)

    def items(self) -> frozenset[int]:
        return frozenset(j for _, j in self.pairs)

    def __len__(self):
        return len(self.pairs)


def matching_weight(W: WeightMatrix, pairs: Sequence[tuple[int, int]]) -> float:
    col = {j: c for c, j in enumerate(W.items)}
    return math.fsum(W.weights[i, col[j]] for i, j in pairs)


def _solve(w: np.ndarray, allowed: np.ndarray) -> tuple[int, float]:
    """Cardinality and weight of a max-cardinality, max-weight matching."""
    rows, cols = w.shape
    if rows == 0 or cols == 0 or not allowed.any():
        return 0, 0.0
    finite = w[allowed]
    # any extra matched edge must outweigh every possible weight difference
    pad = 1.0 + (finite.max() - finite.min()) * min(rows, cols) + np.abs(finite).max()
    profit = np.where(allowed, w + pad, 0.0)
    r, c = linear_sum_assignment(profit, maximize=True)
    keep = allowed[r, c]
    return int(keep.sum()), math.fsum(w[r[keep], c[keep]])


def max_weight_matching(W: WeightMatrix) -> Matching:
    """Maximum-cardinality, maximum-weight matching with deterministic ties.

    The optimum is solved as a linear assignment; the canonical optimal
    matching is then fixed greedily, agent by agent in index order, taking
    the smallest item with which the optimum remains attainable (or leaving
    the agent unmatched when that is the only option).
    """
    w = W.weights
    allowed = np.isfinite(w)
    card, best = _solve(w, allowed)
    if card == 0:
        return Matching(())
    tol = TIE_RTOL * max(1.0, abs(best))

    rows = list(range(W.rows))
    cols = list(range(W.cols))
    pairs: list[tuple[int, int]] = []
    need_card, need_weight = card, best
    for a in range(W.rows):
        rows.remove(a)
        chosen = None
        for c in cols:
            if not allowed[a, c]:
                continue
            rest_cols = [k for k in cols if k != c]
            sub = np.ix_(rows, rest_cols)
            k, wt = _solve(w[sub], allowed[sub])
            if k == need_card - 1 and wt + w[a, c] >= need_weight - tol:
                chosen = c
                break
        if chosen is None:
            continue
        pairs.append((a, W.items[chosen]))
        need_card -= 1
        need_weight -= w[a, chosen]
        cols.remove(chosen)
        if need_card == 0:
            break
    return Matching(tuple(pairs))


class Mode(Enum):
    SMATCH_FIRST = "smatch_first"
    SMATCH_LATER = "smatch_later"
    SMATCH_LATER_MARGINAL = "smatch_later_marginal"
    PHASE1_SINGLETON = "phase1_singleton"
    PHASE2_CUMULATIVE = "phase2_cumulative"
    PHASE3_REMATCH = "phase3_rematch"


_NEEDS = {
    Mode.SMATCH_FIRST: "u",
    Mode.SMATCH_LATER: "bundles",
    Mode.SMATCH_LATER_MARGINAL: "bundles",
    Mode.PHASE1_SINGLETON: None,
    Mode.PHASE2_CUMULATIVE: "bundles",
    Mode.PHASE3_REMATCH: "bundles",
}


def _log_weights(eta: float, args: np.ndarray, forbid: np.ndarray | None = None) -> np.ndarray:
    out = np.full(args.shape, SENTINEL)
    ok = args > 0
    if forbid is not None:
        ok &= ~forbid
    out[ok] = eta * np.log(args[ok])
    return out


def build_weights(
    inst: Instance,
    unallocated: Sequence[int],
    mode: Mode,
    state: Mapping | None = None,
    *,
    skip_zero_value: bool = False,
) -> WeightMatrix:
    """Weight matrix for one matching round.

    ``mode`` picks the log argument of edge ``(i, j)``:

    ``SMATCH_FIRST``          ``v_i(j) + u_i / n``  (``state["u"]``)
    ``SMATCH_LATER``          ``v_i(x_i) + v_i(j)``
    ``SMATCH_LATER_MARGINAL`` ``v_i(x_i ∪ {j})``
    ``PHASE1_SINGLETON``      ``v_i(j)``
    ``PHASE2_CUMULATIVE``     ``v_i(x_i ∪ {j})``
    ``PHASE3_REMATCH``        ``v_i(x_i ∪ {j})``

    where ``x_i`` is ``state["bundles"][i]``.  A zero argument gives
    :data:`SENTINEL`.  With ``skip_zero_value`` an edge is also forbidden
    when the item adds nothing to the agent: ``v_i(j) = 0`` in the
    first-round and additive modes, zero marginal gain in the union modes.
    """
    state = dict(state or {})
    key = _NEEDS[mode]
    if key is not None and key not in state:
        raise ValueError(f"mode {mode.value} needs state[{key!r}]")
    items = tuple(int(j) for j in unallocated)
    cols = np.array(items, dtype=int)
    rows = []
    for i, (eta, val) in enumerate(zip(inst.weights, inst.valuations)):
        if mode is Mode.SMATCH_FIRST or mode is Mode.PHASE1_SINGLETON or mode is Mode.SMATCH_LATER:
            single = _singletons(val)[cols] if items else np.zeros(0)
        if mode is Mode.SMATCH_FIRST:
            args = single + state["u"][i] / inst.n
            forbid = single <= 0 if skip_zero_value else None
        elif mode is Mode.PHASE1_SINGLETON:
            args, forbid = single, None
        elif mode is Mode.SMATCH_LATER:
            base = val.value(state["bundles"][i])
            args = base + single
            forbid = single <= 0 if skip_zero_value else None
        else:
            bundle = frozenset(state["bundles"][i])
            base = val.value(bundle)
            args = np.array([val.value(bundle | {j}) for j in items])
            forbid = args <= base if skip_zero_value else None
        rows.append(_log_weights(eta, np.asarray(args, dtype=float), forbid))
    w = np.vstack(rows) if rows else np.zeros((0, len(items)))
    return WeightMatrix(w.reshape(inst.n, len(items)), items)


def _singletons(val) -> np.ndarray:
    cached = getattr(val, "_singleton_cache", None)
    if cached is None:
        cached = np.asarray(val.singleton_values(), dtype=float)
        object.__setattr__(val, "_singleton_cache", cached)
    return cached
