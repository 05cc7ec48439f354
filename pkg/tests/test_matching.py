import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import best_matching
from nswalloc.core import Instance
from nswalloc.matching import SENTINEL, Mode, WeightMatrix, build_weights, matching_weight, max_weight_matching
from nswalloc.valuations import Additive, Coverage


def test_picks_heavier_pairing():
    W = WeightMatrix.from_array([[1, 5], [4, 1]])
    assert max_weight_matching(W).pairs == ((0, 1), (1, 0))


def test_cardinality_beats_weight():
    # matching both agents is worth less than agent 0 alone on item 0
    W = WeightMatrix.from_array([[100, 1], [1, SENTINEL]])
    M = max_weight_matching(W)
    assert len(M) == 2
    assert M.pairs == ((0, 1), (1, 0))


def test_ties_go_to_smallest_items():
    W = WeightMatrix.from_array(np.zeros((2, 3)))
    assert max_weight_matching(W).pairs == ((0, 0), (1, 1))


def test_all_sentinel_gives_empty_matching():
    W = WeightMatrix.from_array([[SENTINEL, SENTINEL]])
    assert len(max_weight_matching(W)) == 0


def test_item_labels_are_used():
    W = WeightMatrix(np.array([[1.0, 2.0]]), (7, 9))
    assert max_weight_matching(W).pairs == ((0, 9),)


def test_rejects_nan():
    with pytest.raises(ValueError):
        WeightMatrix.from_array([[math.nan]])


def test_smatch_first_row():
    # additive v = (4, 1), u = 2, n = 1 -> ln(4 + 2), ln(1 + 2)
    inst = Instance.build([Additive([4, 1])])
    W = build_weights(inst, [0, 1], Mode.SMATCH_FIRST, {"u": (2.0,)})
    assert W.weights[0] == pytest.approx([math.log(6), math.log(3)])


def test_phase1_singleton_row():
    inst = Instance.build([Additive([math.e, math.e**2])], weights=[2])
    W = build_weights(inst, [0, 1], Mode.PHASE1_SINGLETON)
    assert W.weights[0] == pytest.approx([2, 4])


def test_phase2_uses_union_value():
    # bundle {0} covers {a, b}; item 1 adds c, so the union is worth 3
    inst = Instance.build([Coverage([1, 1, 1], [{0, 1}, {1, 2}])], weights=[1.5])
    W = build_weights(inst, [1], Mode.PHASE2_CUMULATIVE, {"bundles": (frozenset({0}),)})
    assert W.weights[0, 0] == pytest.approx(1.5 * math.log(3))


def test_zero_argument_is_sentinel():
    inst = Instance.build([Additive([0, 1])])
    W = build_weights(inst, [0, 1], Mode.PHASE1_SINGLETON)
    assert W.weights[0, 0] == SENTINEL


def test_skip_zero_value_forbids_useless_items():
    inst = Instance.build([Additive([0, 1])])
    W = build_weights(inst, [0, 1], Mode.SMATCH_LATER, {"bundles": (frozenset(),)}, skip_zero_value=False)
    assert W.weights[0, 0] == SENTINEL  # v(x) + v(j) = 0 anyway
    W = build_weights(inst, [0], Mode.SMATCH_LATER, {"bundles": (frozenset({1}),)}, skip_zero_value=True)
    assert W.weights[0, 0] == SENTINEL
    W = build_weights(inst, [0], Mode.SMATCH_LATER, {"bundles": (frozenset({1}),)})
    assert W.weights[0, 0] == 0.0


def test_mode_needs_state():
    inst = Instance.build([Additive([1])])
    with pytest.raises(ValueError, match="needs state"):
        build_weights(inst, [0], Mode.SMATCH_FIRST)


def test_later_forms_agree_on_additive():
    rng = np.random.default_rng(0)
    inst = Instance.build([Additive(rng.uniform(0, 5, 6)) for _ in range(3)])
    state = {"bundles": (frozenset({0}), frozenset({1, 2}), frozenset())}
    a = build_weights(inst, [3, 4, 5], Mode.SMATCH_LATER, state)
    b = build_weights(inst, [3, 4, 5], Mode.SMATCH_LATER_MARGINAL, state)
    assert np.allclose(a.weights, b.weights)


matrices = st.tuples(st.integers(1, 5), st.integers(1, 5)).flatmap(
    lambda shape: arrays(float, shape, elements=st.sampled_from([SENTINEL, -3.0, -1.0, 0.0, 1.0, 2.0, 2.5, 7.0]))
)


@given(matrices)
def test_matches_exhaustive_oracle(w):
    W = WeightMatrix.from_array(w)
    M = max_weight_matching(W)
    card, weight, choice = best_matching(w)
    assert len(M) == card
    assert (matching_weight(W, M.pairs) if M.pairs else 0.0) == pytest.approx(weight, abs=1e-9)
    expected = tuple((a, c) for a, c in enumerate(choice) if c is not None)
    assert M.pairs == expected


@given(matrices)
def test_matching_is_injective_and_uses_allowed_edges(w):
    M = max_weight_matching(WeightMatrix.from_array(w))
    items = [j for _, j in M.pairs]
    assert len(items) == len(set(items))
    assert all(np.isfinite(w[i, j]) for i, j in M.pairs)
