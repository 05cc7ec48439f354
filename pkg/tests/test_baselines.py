import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nswalloc import instances
from nswalloc.baselines import naive_repeated_matching, single_matching_fill
from nswalloc.core import Allocation, Instance, nsw
from nswalloc.exact import exact_opt
from nswalloc.smatch import smatch
from nswalloc.valuations import Additive

EPS = 0.5


def test_example1_naive_trace():
    inst = instances.example1(20, 20.0, EPS)
    alloc = naive_repeated_matching(inst)
    assert 0 in alloc.bundles[0]
    assert alloc.bundles[1] == frozenset({1})
    assert nsw(inst, alloc) == pytest.approx(math.sqrt(20 + EPS + 19))


def test_example1_single_matching():
    inst = instances.example1(20, 20.0, EPS)
    assert nsw(inst, single_matching_fill(inst)) <= math.sqrt(20 + EPS + 20 - 1) + 1e-9


@pytest.mark.parametrize("m", [20, 100])
def test_naive_gap_grows_with_m(m):
    inst = instances.example1(m, float(m), EPS)
    # B takes item 0 and A the m unit items: a lower bound on the optimum
    witness = Allocation.from_owner([1] + [0] * m, 2)
    ratio = nsw(inst, witness) / nsw(inst, naive_repeated_matching(inst))
    assert ratio >= math.sqrt(m * m) / math.sqrt(m + m + EPS)


def test_example1_opt_matches_closed_form():
    inst = instances.example1(20, 20.0, EPS)
    assert exact_opt(inst).opt_nsw == pytest.approx(20.0)


@pytest.mark.parametrize("algo", [single_matching_fill, naive_repeated_matching])
def test_single_agent(algo):
    inst = Instance.build([Additive([1, 0, 2])])
    assert algo(inst).bundles == (frozenset({0, 1, 2}),)


@given(st.integers(0, 10**6))
def test_square_additive_single_matching_is_optimal(seed):
    inst = instances.random_additive(3, 3, low=0.1, seed=seed)
    assert nsw(inst, single_matching_fill(inst)) == pytest.approx(exact_opt(inst).opt_nsw)


@given(st.sampled_from(["random_additive", "random_ba", "random_coverage"]), st.integers(1, 3), st.integers(0, 7), st.integers(0, 10**6))
def test_complete(family, n, m, seed):
    inst = instances.generate(family, {"n": n, "m": m}, seed)
    assert single_matching_fill(inst).is_complete(m)
    assert naive_repeated_matching(inst).is_complete(m)


def test_naive_vs_smatch_on_small_additive():
    """Measured, not a guarantee: naive rarely beats SMatch on 2 x 4 instances."""
    worse = 0
    for seed in range(100):
        inst = instances.random_additive(2, 4, seed=seed)
        worse += nsw(inst, naive_repeated_matching(inst)) <= nsw(inst, smatch(inst)) + 1e-12
    print(f"naive <= smatch on {worse}/100 seeds")
    assert worse >= 50
