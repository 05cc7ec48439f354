import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nswalloc import instances
from nswalloc.constagents import (
    SLACK,
    ConvexDecomposition,
    ExactOracle,
    FractionalAssignment,
    GridSearchConfig,
    const_agents_search,
    const_agents_solve,
    decompose,
    exact_multilinear,
    multilinear_estimate,
    swap_round,
)
from nswalloc.core import Allocation, Instance, nsw
from nswalloc.exact import exact_opt
from nswalloc.valuations import Additive, Coverage


@pytest.mark.parametrize("kwargs", [{"delta": 0}, {"beta": -1}, {"oracle": "magic"}, {"sample_count": 0}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        GridSearchConfig(**kwargs)


def test_single_agent_takes_everything():
    inst = Instance.build([Additive([1, 2, 3])])
    assert const_agents_solve(inst).bundles == (frozenset({0, 1, 2}),)


def test_identical_unit_values():
    inst = Instance.build([Additive([1, 1]), Additive([1, 1])])
    alloc = const_agents_solve(inst, GridSearchConfig(delta=0.1))
    assert nsw(inst, alloc) == pytest.approx(1.0)


def test_worthless_agent_gives_some_complete_allocation():
    inst = Instance.build([Additive([1, 1]), Additive([0, 0])])
    res = const_agents_search(inst)
    assert res.exponents is None
    assert res.allocation.is_complete(2)


def test_scaling_equalises_totals():
    inst = instances.random_coverage(2, 4, seed=3)
    res = const_agents_search(inst, GridSearchConfig(delta=0.05))
    totals = [c * v.value(range(4)) for c, v in zip(res.scale, inst.valuations)]
    assert totals[0] == pytest.approx(totals[1])
    assert totals[0] == pytest.approx(1.05 ** res.grid[1])


@given(st.integers(1, 6), st.integers(0, 10**6), st.sampled_from([0.05, 0.2]))
def test_guarantee_on_coverage(m, seed, delta):
    inst = instances.random_coverage(2, m, seed=seed)
    opt = exact_opt(inst).opt_nsw
    got = nsw(inst, const_agents_solve(inst, GridSearchConfig(delta=delta)))
    assert got >= SLACK * (1 - delta) * opt * (1 - 1e-9)


@given(st.integers(1, 5), st.integers(0, 10**6))
def test_asymmetric_weights_guarantee(m, seed):
    inst = instances.random_additive(2, m, low=0.5, weight_range=(0.5, 3), seed=seed)
    opt = exact_opt(inst).opt_nsw
    assert nsw(inst, const_agents_solve(inst)) >= SLACK * 0.95 * opt * (1 - 1e-9)


@given(st.integers(1, 5), st.integers(0, 10**6), st.data())
def test_grid_monotonicity(m, seed, data):
    inst = instances.random_coverage(2, m, seed=seed)
    oracle = ExactOracle(inst)
    k = np.array(data.draw(st.lists(st.integers(-20, 10), min_size=2, max_size=2)))
    drop = np.array(data.draw(st.lists(st.integers(0, 5), min_size=2, max_size=2)))
    if oracle(1.05 ** k) is not None:
        assert oracle(1.05 ** (k - drop)) is not None


def test_rounded_oracle_returns_complete_allocation():
    inst = instances.random_coverage(2, 4, seed=5)
    alloc = const_agents_solve(inst, GridSearchConfig(delta=0.3, oracle="rounded", sample_count=200))
    assert alloc.is_complete(4)


# -- multilinear extension ---------------------------------------------------


def test_multilinear_extremes():
    val = Coverage([1, 2, 3], [{0}, {1, 2}, {0, 2}])
    assert multilinear_estimate(val, [1, 1, 1], samples=5) == val.value(range(3))
    assert multilinear_estimate(val, [0, 0, 0], samples=5) == 0


def test_multilinear_additive_is_linear():
    val = Additive([2, 4])
    samples = 20_000
    est = multilinear_estimate(val, [0.5, 0.25], samples, seed=1)
    sd = math.sqrt(4 * 0.25 + 16 * 0.25 * 0.75) / math.sqrt(samples)
    assert abs(est - 2.0) <= 3 * sd
    assert exact_multilinear(val, [0.5, 0.25]) == pytest.approx(2.0)


def test_multilinear_is_seeded():
    val = Additive([1, 2, 3])
    assert multilinear_estimate(val, [0.3] * 3, 100, seed=4) == multilinear_estimate(val, [0.3] * 3, 100, seed=4)


def test_multilinear_coverage_against_enumeration():
    inst = instances.random_coverage(1, 6, seed=11)
    val = inst.valuations[0]
    y = np.random.default_rng(0).uniform(0, 1, 6)
    est = multilinear_estimate(val, y, 100_000, seed=2)
    assert est == pytest.approx(exact_multilinear(val, y), rel=0.01)


# -- decomposition and rounding ----------------------------------------------


def test_decompose_integral_point():
    y = np.array([[1, 0, 0], [0, 1, 0]])
    dec = decompose(y)
    assert len(dec.terms) == 1
    coef, alloc = dec.terms[0]
    assert coef == 1 and alloc.bundles == (frozenset({0}), frozenset({1}))


def test_decompose_zero():
    dec = decompose(np.zeros((2, 3)))
    assert dec.terms == ((1.0, Allocation.empty(2)),)


def test_decompose_one_item():
    dec = decompose(np.array([[0.3], [0.7]]))
    assert [(round(c, 12), a.bundles) for c, a in dec.terms] == [
        (0.7, (frozenset(), frozenset({0}))),
        (0.3, (frozenset({0}), frozenset())),
    ]


def test_decompose_rejects_overassignment():
    with pytest.raises(ValueError):
        decompose(np.array([[0.6], [0.6]]))


fractional = st.tuples(st.integers(1, 4), st.integers(1, 6), st.integers(0, 10**6))


@given(fractional)
def test_decompose_reconstructs(args):
    n, m, seed = args
    rng = np.random.default_rng(seed)
    y = rng.dirichlet(np.ones(n + 1), m).T[:n]
    if seed % 3 == 0:
        y = np.round(y, 1)
        y = y / np.maximum(1, y.sum(axis=0))
    dec = decompose(y)
    assert len(dec.terms) <= n * m + 1
    assert sum(c for c, _ in dec.terms) == pytest.approx(1.0)
    assert np.allclose(dec.matrix(), y, atol=1e-9)


def test_swap_round_single_term():
    alloc = Allocation.from_owner([1, 0, -1], 2)
    dec = ConvexDecomposition(((1.0, alloc),), 2, 3)
    assert swap_round(dec, 0) == alloc


def test_swap_round_one_item_frequency():
    dec = ConvexDecomposition(
        ((0.3, Allocation.from_owner([0], 2)), (0.7, Allocation.from_owner([1], 2))),
        2,
        1,
    )
    trials = 10_000
    hits = sum(0 in swap_round(dec, s).bundles[0] for s in range(trials))
    sd = math.sqrt(0.3 * 0.7 / trials)
    assert abs(hits / trials - 0.3) <= 3 * sd


@given(fractional)
def test_swap_round_output_is_one_of_the_supports(args):
    n, m, seed = args
    y = np.random.default_rng(seed).dirichlet(np.ones(n + 1), m).T[:n]
    dec = decompose(y)
    out = swap_round(dec, seed)
    for i, bundle in enumerate(out.bundles):
        for j in bundle:
            assert y[i, j] > 0


def test_fractional_assignment_shape():
    fa = FractionalAssignment([[0.5, 0], [0.5, 1]])
    assert (fa.n, fa.m) == (2, 2)
    with pytest.raises(ValueError):
        FractionalAssignment([0.5])
