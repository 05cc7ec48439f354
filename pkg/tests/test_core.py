import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nswalloc.core import (
    Allocation,
    AllocationError,
    Instance,
    InstanceError,
    keepaside_value,
    log_nsw,
    nsw,
    rank_items,
    validate_instance,
)
from nswalloc.valuations import SPLC, Additive, BudgetAdditive, Coverage, RestrictedAdditive


def two_agents():
    return Instance.build([Additive([3, 1]), Additive([1, 3])])


def test_nsw_of_split():
    inst = two_agents()
    assert nsw(inst, Allocation((frozenset({0}), frozenset({1})))) == pytest.approx(3.0)


def test_weighted_nsw():
    inst = Instance.build([Additive([4, 0]), Additive([0, 1])], weights=[3, 1])
    # (4**3 * 1)**(1/4)
    assert nsw(inst, Allocation.from_owner([0, 1], 2)) == pytest.approx(4 ** 0.75)


def test_zero_value_agent_gives_zero():
    inst = two_agents()
    alloc = Allocation((frozenset({0, 1}), frozenset()))
    assert nsw(inst, alloc) == 0.0
    assert log_nsw(inst, alloc) == -math.inf


def test_allocation_rejects_overlap():
    with pytest.raises(AllocationError):
        Allocation((frozenset({0}), frozenset({0, 1})))


def test_nsw_needs_complete_allocation():
    with pytest.raises(AllocationError, match="item 1 unassigned"):
        nsw(two_agents(), Allocation((frozenset({0}), frozenset())))


def test_from_owner_skips_negative():
    alloc = Allocation.from_owner([1, -1, 0], 2)
    assert alloc.bundles == (frozenset({2}), frozenset({0}))
    assert not alloc.is_complete(3)
    assert alloc.owner(3) == [1, -1, 0]


@pytest.mark.parametrize(
    "build, message",
    [
        (lambda: Instance((1.0, -1.0), (Additive([1]), Additive([1])), 1), "nonpositive weight"),
        (lambda: Instance((1.0,), (Additive([1, 2]),), 3), "valuation is over 2 items"),
        (lambda: Instance((1.0,), (Additive([-1]),), 1), "non-negative"),
        (lambda: Instance((1.0,), (SPLC([[1, 2]]),), 2), "non-concave"),
        (
            lambda: Instance(
                (1.0, 1.0),
                (RestrictedAdditive(global_values=[1, 2], interest=[0]), RestrictedAdditive(global_values=[1, 3], interest=[1])),
                2,
            ),
            "disagree on global",
        ),
        (lambda: Instance((1.0, 1.0), (SPLC([[2, 1]]), SPLC([[1], [1]])), 2), "copies per good"),
    ],
)
def test_validation_messages(build, message):
    with pytest.raises(InstanceError, match=message):
        validate_instance(build())


def test_rank_items_ties_by_index():
    inst = Instance.build([Additive([2, 5, 2, 1])])
    assert rank_items(inst, 0).order == (1, 0, 2, 3)
    assert rank_items(inst, 0, [3, 2]).order == (2, 3)


def test_keepaside_sums_tail_beyond_2n():
    vals = [9, 1, 8, 2, 7, 3]
    inst = Instance.build([Additive(vals), Additive([1] * 6)])
    # top 4 for agent 0 are 9, 8, 7, 3; the tail is 2 + 1
    assert keepaside_value(inst, 0) == 3
    assert keepaside_value(inst, 1) == 2


def test_keepaside_budget_capped():
    inst = Instance.build([BudgetAdditive([5, 4, 3, 2, 1], 1.5)])
    assert keepaside_value(inst, 0) == 1.5


def test_keepaside_rejects_coverage():
    inst = Instance.build([Coverage([1], [{0}])])
    with pytest.raises(TypeError):
        keepaside_value(inst, 0)


def test_scaled_multiplies_values():
    inst = Instance.build([Additive([1, 2]), Coverage([1, 1], [{0}, {1}])])
    s = inst.scaled([2, 3])
    assert s.valuations[0].value([0, 1]) == 6
    assert s.valuations[1].value([0, 1]) == 6


@given(st.lists(st.floats(0.1, 10), min_size=2, max_size=2), st.lists(st.floats(0.1, 5), min_size=2, max_size=2))
def test_nsw_is_weighted_geometric_mean(vals, weights):
    inst = Instance.build([Additive([vals[0], 0]), Additive([0, vals[1]])], weights=weights)
    expected = math.exp((weights[0] * math.log(vals[0]) + weights[1] * math.log(vals[1])) / sum(weights))
    assert nsw(inst, Allocation.from_owner([0, 1], 2)) == pytest.approx(expected)
