import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nswalloc import instances
from nswalloc.core import Instance, nsw
from nswalloc.exact import exact_opt
from nswalloc.matching import Mode, build_weights
from nswalloc.reprematch import phase_bound, reprematch, reprematch_ledger
from nswalloc.valuations import Additive

families = st.sampled_from(["random_coverage", "random_ba"])
sizes = st.tuples(st.integers(2, 3), st.integers(1, 7), st.integers(0, 10**6))


@pytest.mark.parametrize("n, k", [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4)])
def test_phase_bound(n, k):
    assert phase_bound(n) == k


def test_phase_bound_rejects_zero():
    with pytest.raises(ValueError):
        phase_bound(0)


def test_single_agent():
    inst = Instance.build([Additive([1, 2, 3])])
    led = reprematch_ledger(inst)
    assert led.phase1_bundles == (frozenset(),)
    assert led.final.bundles == (frozenset({0, 1, 2}),)


def test_example1_rematches_item_0_to_b():
    inst = instances.example1(20, 20.0, 0.5)
    led = reprematch_ledger(inst)
    assert (1, 0) in led.phase3_matching.pairs
    assert nsw(inst, led.final) >= exact_opt(inst).opt_nsw / 12


def test_subadditive_gap_trace():
    inst = instances.subadditive_gap(8, 10.0)
    assert nsw(inst, reprematch(inst)) == pytest.approx(10.0)


def test_xos_gap_trace():
    inst = instances.xos_gap(10, 100.0, 0.1)
    led = reprematch_ledger(inst)
    assert led.final.bundles == (frozenset(range(10, 20)), frozenset(range(10)))
    assert nsw(inst, led.final) == pytest.approx(301.0)


@given(families, sizes)
def test_ledger_invariants(family, args):
    n, m, seed = args
    inst = instances.generate(family, {"n": n, "m": m}, seed)
    led = reprematch_ledger(inst)
    assert sum(len(b) for b in led.phase1_bundles) <= n * phase_bound(n)
    released = frozenset().union(*led.phase1_bundles)
    assert led.released == released
    assert led.phase3_matching.items() <= released
    # final = phase 2 + phase 3 + fill, each item exactly once
    parts = [j for b in led.phase2_bundles for j in b]
    parts += [j for _, j in led.phase3_matching.pairs]
    parts += [j for _, j in led.leftovers]
    assert sorted(parts) == list(range(m))
    for i in range(n):
        final = led.final.bundles[i]
        assert led.phase2_bundles[i] <= final
        assert inst.valuations[i].value(final) >= inst.valuations[i].value(led.phase2_bundles[i])


@given(families, sizes)
def test_guarantee(family, args):
    n, m, seed = args
    inst = instances.generate(family, {"n": n, "m": m}, seed)
    opt = exact_opt(inst).opt_nsw
    assert nsw(inst, reprematch(inst)) * 2 * n * (math.log2(n) + 2) >= opt * (1 - 1e-9)


@given(sizes)
def test_deterministic(args):
    n, m, seed = args
    inst = instances.random_coverage(n, m, seed=seed)
    assert reprematch_ledger(inst) == reprematch_ledger(inst)


@given(families, st.integers(2, 3), st.integers(2, 6), st.integers(0, 10**6))
def test_phase3_graph_matches_agents_to_top_items(family, n, m, seed):
    """Agents whose top-item sets were all released can each get one of them."""
    inst = instances.generate(family, {"n": n, "m": m}, seed)
    led = reprematch_ledger(inst)
    best = exact_opt(inst).best
    released = sorted(led.released)
    W = build_weights(inst, released, Mode.PHASE3_REMATCH, {"bundles": led.phase2_bundles})
    col = {j: c for c, j in enumerate(released)}
    top = {}
    for i, val in enumerate(inst.valuations):
        single = val.singleton_values()
        if not best.bundles[i]:
            continue
        g1 = max(best.bundles[i], key=lambda j: (single[j], -j))
        G1 = {j for j in range(m) if single[j] >= single[g1]}
        if single[g1] > 0 and G1 <= set(released):
            top[i] = sorted(G1)
    agents = sorted(top)
    found = any(
        len(set(pick)) == len(pick) and all(np.isfinite(W.weights[a, col[j]]) for a, j in zip(agents, pick))
        for pick in itertools.product(*(top[a] for a in agents))
    )
    assert found or not agents
