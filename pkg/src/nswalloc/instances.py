"""Instance generators and the JSON instance file format.

The constructed families reproduce known bad cases for matching-based
algorithms.  Their items are labelled so that the engine's tie-break
(smallest agent, then smallest item) walks into the adversarial run.
The random families are plain test fodder.

File format (``schema_version`` 1)::

    {
      "schema_version": 1,
      "n": 2, "m": 3,
      "weights": [1.0, 2.0],
      "valuations": [{"family": "additive", "values": [1, 2, 3]}, ...],
      "metadata": {"family": "random_additive", "params": {...}, "seed": 7}
    }

Valuation descriptors are the ``to_dict`` output of each family.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .core import Instance, InstanceError, validate_instance
from .valuations import (
    SPLC,
    XOS,
    Additive,
    BudgetAdditive,
    Coverage,
    RestrictedAdditive,
    SubadditiveHalves,
    valuation_from_dict,
)

__all__ = [
    "SCHEMA_VERSION",
    "FAMILIES",
    "InstanceFileError",
    "generate",
    "example1",
    "subadditive_gap",
    "xos_gap",
    "asym_tight",
    "asym_tight_optimum",
    "po_gap",
    "random_additive",
    "random_restricted",
    "random_ba",
    "random_splc",
    "random_coverage",
    "to_dict",
    "from_dict",
    "dumps",
    "loads",
    "save",
    "load",
]

SCHEMA_VERSION = 1


def _build(valuations, weights=None, family=None, params=None, seed=None) -> Instance:
    # normalise through JSON so that a saved and reloaded instance compares equal
    meta = json.loads(json.dumps({"family": family, "params": params or {}, "seed": seed}))
    try:
        return Instance.build(valuations, weights, meta)
    except InstanceError as exc:
        raise ValueError(str(exc)) from None


# -- constructed families ----------------------------------------------------


def example1(m: int = 20, M: float = 20.0, eps: float | None = None) -> Instance:
    """Two unit-weight agents and ``m + 1`` items.

    A values item 0 at ``M + eps`` and each of items ``1..m`` at 1.  B values
    item 0 at ``M``, item 1 at 1 and nothing else.  Matching without any
    look-ahead hands item 0 to A and leaves B with a single unit item.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if M <= 0:
        raise ValueError("M must be positive")
    eps = 0.5 * M / m if eps is None else float(eps)
    if eps < 0:
        raise ValueError("eps must be non-negative")
    a = [M + eps] + [1.0] * m
    b = [M, 1.0] + [0.0] * (m - 1)
    return _build([Additive(a), Additive(b)], family="example1", params={"m": m, "M": M, "eps": eps})


def subadditive_gap(m: int = 8, M: float = 10.0) -> Instance:
    """Two agents with ``v(S) = max(M, M * |S ∩ own|)``; each wants half of the items.

    Agent 0 wants the odd-indexed items and agent 1 the even-indexed ones,
    so that lowest-index ties keep handing each agent the other's item.
    """
    if m < 2 or m % 2:
        raise ValueError("m must be even")
    if M <= 0:
        raise ValueError("M must be positive")
    odd = frozenset(range(1, m, 2))
    even = frozenset(range(0, m, 2))
    vals = [SubadditiveHalves(m, M, odd), SubadditiveHalves(m, M, even)]
    return _build(vals, family="subadditive_gap", params={"m": m, "M": M})


def xos_gap(k: int = 10, M: float = 100.0, eps: float | None = None) -> Instance:
    """Two XOS agents over ``2k`` items, each with a "real" clause and a decoy clause.

    Agent 0's real clause is ``M`` on items ``0..k-1``.  Its decoy is
    ``M + eps`` on items ``k..k+2`` and ``eps`` on the rest of the second
    half.  Agent 1 is the mirror image.
    """
    if k <= 3:
        raise ValueError("k must exceed 3")
    eps = 1e-3 * M if eps is None else float(eps)
    if M <= 0 or eps <= 0:
        raise ValueError("M and eps must be positive")
    zeros = [0.0] * k
    decoy = [M + eps] * 3 + [eps] * (k - 3)
    a = XOS([[M] * k + zeros, zeros + decoy])
    b = XOS([zeros + [M] * k, decoy + zeros])
    return _build([a, b], family="xos_gap", params={"k": k, "M": M, "eps": eps})


def asym_tight(n: int = 4, m: int = 2, W: float = 100.0, M: float = 1.0, eps: float = 0.1, eps_bar: float | None = None) -> Instance:
    """Heavy agent 0 against ``n - 1`` light agents, over ``m`` groups of ``n**2`` items.

    Within each group, positions ``0..n-1`` form block 0 and positions
    ``b*n..(b+1)*n-1`` form block ``b``.  Agent 0 (weight ``W``) values
    block 0 at ``M`` and nothing else.  Agent ``k >= 1`` values block 0 at
    ``M + eps`` and its own block ``k`` at ``M + eps_bar``.  Item
    ``g * n**2 + p`` is position ``p`` of group ``g``.
    """
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 and m >= 1")
    eps_bar = eps / 2 if eps_bar is None else float(eps_bar)
    if not eps > eps_bar > 0:
        raise ValueError("need eps > eps_bar > 0")
    if W <= 0 or M <= 0:
        raise ValueError("W and M must be positive")
    size = n * n
    rows = np.zeros((n, m * size))
    for g in range(m):
        base = g * size
        rows[0, base : base + n] = M
        for k in range(1, n):
            rows[k, base : base + n] = M + eps
            rows[k, base + k * n : base + (k + 1) * n] = M + eps_bar
    params = {"n": n, "m": m, "W": W, "M": M, "eps": eps, "eps_bar": eps_bar}
    return _build([Additive(r) for r in rows], [W] + [1.0] * (n - 1), family="asym_tight", params=params)


def asym_tight_optimum(inst: Instance):
    """The optimal allocation of an :func:`asym_tight` instance: agent ``k`` takes block ``k`` of every group."""
    from .core import Allocation

    n = inst.n
    size = n * n
    owner = [(j % size) // n for j in range(inst.m)]
    return Allocation.from_owner(owner, n)


def po_gap(eps: float = 0.01) -> Instance:
    """Two agents, four items: values ``(2+eps, 2, eps, eps)`` and ``(1, 1, 1, 1)``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    vals = [Additive([2 + eps, 2.0, eps, eps]), Additive([1.0] * 4)]
    return _build(vals, family="po_gap", params={"eps": eps})


# -- random families ---------------------------------------------------------


def _weights(rng, n, weight_range):
    if weight_range is None:
        return None
    lo, hi = weight_range
    return rng.uniform(lo, hi, n).round(6).tolist()


def random_additive(n: int = 2, m: int = 4, low: float = 0.0, high: float = 10.0, weight_range=None, seed: int | None = 0) -> Instance:
    rng = np.random.default_rng(seed)
    vals = [Additive(row) for row in rng.uniform(low, high, (n, m))]
    params = {"n": n, "m": m, "low": low, "high": high, "weight_range": weight_range}
    return _build(vals, _weights(rng, n, weight_range), "random_additive", params, seed)


def random_restricted(n: int = 2, m: int = 4, p: float = 0.5, low: float = 1.0, high: float = 10.0, weight_range=None, seed: int | None = 0) -> Instance:
    """Each agent is interested in each item independently with probability ``p``."""
    rng = np.random.default_rng(seed)
    g = rng.uniform(low, high, m)
    interest = rng.random((n, m)) < p
    vals = [RestrictedAdditive(global_values=g, interest=np.flatnonzero(row)) for row in interest]
    params = {"n": n, "m": m, "p": p, "low": low, "high": high, "weight_range": weight_range}
    return _build(vals, _weights(rng, n, weight_range), "random_restricted", params, seed)


def random_ba(n: int = 2, m: int = 4, low: float = 0.0, high: float = 10.0, cap_range=(0.3, 0.8), weight_range=None, seed: int | None = 0) -> Instance:
    """Budget-additive agents whose cap is a random fraction of their total value."""
    rng = np.random.default_rng(seed)
    vals = []
    for row in rng.uniform(low, high, (n, m)):
        vals.append(BudgetAdditive(row, float(row.sum()) * rng.uniform(*cap_range)))
    params = {"n": n, "m": m, "low": low, "high": high, "cap_range": list(cap_range), "weight_range": weight_range}
    return _build(vals, _weights(rng, n, weight_range), "random_ba", params, seed)


def random_splc(n: int = 2, m: int = 4, max_copies: int = 3, low: float = 0.0, high: float = 10.0, weight_range=None, seed: int | None = 0) -> Instance:
    """SPLC agents over ``m`` copy-items, grouped into goods of up to ``max_copies`` copies."""
    rng = np.random.default_rng(seed)
    counts = []
    while sum(counts) < m:
        counts.append(int(min(rng.integers(1, max_copies + 1), m - sum(counts))))
    vals = []
    for _ in range(n):
        vals.append(SPLC([sorted(rng.uniform(low, high, c), reverse=True) for c in counts]))
    params = {"n": n, "m": m, "max_copies": max_copies, "low": low, "high": high, "weight_range": weight_range}
    return _build(vals, _weights(rng, n, weight_range), "random_splc", params, seed)


def random_coverage(n: int = 2, m: int = 4, universe: int = 8, per_item: int = 2, low: float = 0.1, high: float = 1.0, weight_range=None, seed: int | None = 0) -> Instance:
    """Each agent has its own element weights and its own sets; item ``j`` covers ``per_item`` elements."""
    if not 1 <= per_item <= universe:
        raise ValueError("per_item must lie in [1, universe]")
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(n):
        weights = rng.uniform(low, high, universe)
        covers = [rng.choice(universe, per_item, replace=False) for _ in range(m)]
        vals.append(Coverage(weights, covers))
    params = {"n": n, "m": m, "universe": universe, "per_item": per_item, "low": low, "high": high, "weight_range": weight_range}
    return _build(vals, _weights(rng, n, weight_range), "random_coverage", params, seed)


FAMILIES: dict[str, Callable[..., Instance]] = {
    "example1": example1,
    "subadditive_gap": subadditive_gap,
    "xos_gap": xos_gap,
    "asym_tight": asym_tight,
    "po_gap": po_gap,
    "random_additive": random_additive,
    "random_restricted": random_restricted,
    "random_ba": random_ba,
    "random_splc": random_splc,
    "random_coverage": random_coverage,
}

_SEEDED = {name for name in FAMILIES if name.startswith("random_")}


def generate(family: str, params: dict[str, Any] | None = None, seed: int | None = 0) -> Instance:
    """Build an instance of ``family``; constructed families ignore ``seed``."""
    try:
        make = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; known: {', '.join(sorted(FAMILIES))}") from None
    params = dict(params or {})
    if family in _SEEDED:
        return make(seed=seed, **params)
    inst = make(**params)
    inst.metadata["seed"] = seed
    return inst


# -- files -------------------------------------------------------------------


class InstanceFileError(ValueError):
    """Malformed or invalid instance file; the message names the line or field."""


def to_dict(inst: Instance) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "n": inst.n,
        "m": inst.m,
        "weights": list(inst.weights),
        "valuations": [v.to_dict() for v in inst.valuations],
        "metadata": inst.metadata or {},
    }


def _require(d: dict, key: str, kind, where: str = ""):
    if key not in d:
        raise InstanceFileError(f"{where}{key}: missing field")
    if not isinstance(d[key], kind):
        raise InstanceFileError(f"{where}{key}: expected {getattr(kind, '__name__', kind)}, got {type(d[key]).__name__}")
    return d[key]


def from_dict(d: dict) -> Instance:
    if not isinstance(d, dict):
        raise InstanceFileError("top level must be a JSON object")
    version = _require(d, "schema_version", int)
    if version != SCHEMA_VERSION:
        raise InstanceFileError(f"schema_version: unsupported version {version}")
    n = _require(d, "n", int)
    m = _require(d, "m", int)
    weights = _require(d, "weights", list)
    descs = _require(d, "valuations", list)
    if len(weights) != n:
        raise InstanceFileError(f"weights: {len(weights)} entries for n = {n}")
    if len(descs) != n:
        raise InstanceFileError(f"valuations: {len(descs)} entries for n = {n}")
    for i, w in enumerate(weights):
        if not isinstance(w, (int, float)) or isinstance(w, bool):
            raise InstanceFileError(f"weights[{i}]: expected a number")
        if not math.isfinite(w) or w <= 0:
            raise InstanceFileError(f"weights[{i}]: weight must be positive, got {w}")
    vals = []
    for i, desc in enumerate(descs):
        if not isinstance(desc, dict):
            raise InstanceFileError(f"valuations[{i}]: expected an object")
        try:
            vals.append(valuation_from_dict(desc))
        except (KeyError, TypeError, ValueError) as exc:
            raise InstanceFileError(f"valuations[{i}]: {exc}") from None
    metadata = d.get("metadata") or {}
    if not isinstance(metadata, dict):
        raise InstanceFileError("metadata: expected an object")
    inst = Instance(tuple(weights), tuple(vals), m, metadata)
    try:
        validate_instance(inst)
    except InstanceError as exc:
        msg = str(exc)
        if msg.startswith("agent "):
            idx, _, rest = msg[len("agent ") :].partition(": ")
            msg = f"valuations[{idx}]: {rest}"
        raise InstanceFileError(msg) from None
    return inst


def dumps(inst: Instance) -> str:
    return json.dumps(to_dict(inst), indent=2, sort_keys=True) + "\n"


def loads(text: str) -> Instance:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(d)


def save(inst: Instance, path) -> None:
    Path(path).write_text(dumps(inst), encoding="utf-8")


def load(path) -> Instance:
    return loads(Path(path).read_text(encoding="utf-8"))
