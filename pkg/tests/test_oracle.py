import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rangeassign.core import ArrivalInstance, is_priority_feasible
from rangeassign.families import random_instance
from rangeassign.oracle import (
    CoverSet,
    InstanceTooLarge,
    all_cover_sets,
    approx_5alpha,
    brute_force_optimal,
    dual_violations,
    maximal_dual,
    minimal_tight_cover,
    solve_optimal,
)

from .conftest import any_instances


def product_enumerator(instance, alpha):
    """Every radius vector over pairwise distances, checked with a hand-rolled reachability loop."""
    n = instance.n
    d = [[instance.dist(i, j) for j in range(n)] for i in range(n)]
    options = [sorted({0.0, *(d[i][j] for j in range(i + 1, n))}) for i in range(n - 1)]
    best = math.inf
    for radii in itertools.product(*options):
        r = list(radii) + [0.0]
        ok = True
        for k in range(2, n + 1):
            seen, frontier = {0}, [0]
            while frontier:
                a = frontier.pop()
                for b in range(k):
                    if b not in seen and d[a][b] <= r[a] * (1 + 1e-12) + 1e-12:
                        seen.add(b)
                        frontier.append(b)
            if len(seen) < k:
                ok = False
                break
        if ok:
            best = min(best, sum(v**alpha for v in r))
    return best


def test_single_point():
    res = solve_optimal(ArrivalInstance.line([0]), 2)
    assert res.cost == 0 and res.assignment.ranges == (0.0,)


def test_two_points():
    res = solve_optimal(ArrivalInstance.line([0, 3]), 2)
    assert res.cost == 9
    assert res.cover == (CoverSet(0, 3.0),)


def test_one_dimensional_example():
    inst = ArrivalInstance.line([0, 1, 4.153])
    res = solve_optimal(inst, 2)
    assert res.cost == pytest.approx(product_enumerator(inst, 2), rel=1e-12)
    assert res.cost == pytest.approx(1 + 3.153**2)
    assert res.assignment.ranges == pytest.approx((1.0, 3.153, 0.0))


def test_size_limit():
    inst = ArrivalInstance.line(list(range(25)))
    with pytest.raises(InstanceTooLarge) as err:
        solve_optimal(inst, 2)
    assert err.value.n == 25 and err.value.limit == 20


@given(any_instances(min_n=1, max_n=6), st.sampled_from([1.5, 2.0, 3.0]))
def test_dp_matches_product_enumerator(inst, alpha):
    res = solve_optimal(inst, alpha)
    assert res.cost == pytest.approx(product_enumerator(inst, alpha), rel=1e-9, abs=1e-12)
    assert is_priority_feasible(inst, res.assignment)
    assert res.assignment.cost(alpha) == pytest.approx(res.cost)


@given(any_instances(min_n=1, max_n=8))
def test_dp_matches_branch_and_bound(inst):
    cost, assignment = brute_force_optimal(inst, 2.0)
    assert solve_optimal(inst, 2.0).cost == pytest.approx(cost, rel=1e-9, abs=1e-12)
    assert is_priority_feasible(inst, assignment)


def test_maximal_dual_collinear():
    inst = ArrivalInstance.line([0, 1, 2])
    dual = maximal_dual(inst, 2)
    assert dual.y == (0.0, 1.0, 1.0)
    # every constraint holds and every element sits in a tight set
    for s in all_cover_sets(inst):
        assert dual.load(inst, s) <= s.radius**2 + 1e-12
    for j in (1, 2):
        assert any(dual.is_tight(inst, s, 2) for s in all_cover_sets(inst) if j in s.members(inst))


@given(any_instances(min_n=2, max_n=9), st.sampled_from([2.0, 3.0]))
def test_maximal_dual_properties(inst, alpha):
    dual = maximal_dual(inst, alpha)
    assert dual_violations(inst, alpha, dual.y) == []
    sets = all_cover_sets(inst)
    for j in range(1, inst.n):
        assert any(dual.is_tight(inst, s, alpha) for s in sets if j in s.members(inst))
    assert dual.total <= solve_optimal(inst, alpha).cost * (1 + 1e-9) + 1e-12


@given(any_instances(min_n=2, max_n=9), st.sampled_from([2.0, 3.0]))
def test_minimal_tight_cover(inst, alpha):
    dual = maximal_dual(inst, alpha)
    cover = minimal_tight_cover(inst, alpha, dual)
    members = [s.members(inst) for s in cover]
    union = set().union(*members)
    assert union == set(range(1, inst.n))
    assert len({s.center for s in cover}) == len(cover)
    for s in cover:
        assert dual.is_tight(inst, s, alpha)
    # dropping any set uncovers something
    for k in range(len(cover)):
        rest = set().union(*(m for t, m in enumerate(members) if t != k))
        assert rest != union


def test_approx_two_points_is_tight():
    inst = ArrivalInstance.line([0, 2])
    assignment, cert = approx_5alpha(inst, 2)
    assert assignment.ranges == (10.0, 0.0)
    assert cert.sum_y == 4.0
    assert assignment.cost(2) == 100 == 25 * solve_optimal(inst, 2).cost


@given(any_instances(min_n=1, max_n=9), st.sampled_from([2.0, 3.0]))
def test_approx_properties(inst, alpha):
    assignment, cert = approx_5alpha(inst, alpha)
    assert is_priority_feasible(inst, assignment)
    cost = assignment.cost(alpha)
    assert cost <= cert.bound(alpha) * (1 + 1e-9) + 1e-12
    assert cert.sum_y <= solve_optimal(inst, alpha).cost * (1 + 1e-9) + 1e-12
    # independent centres share no positive-dual element
    pos = {s.center: {j for j in s.members(inst) if cert.dual.y[j] > 1e-12} for s in cert.cover}
    for a, b in itertools.combinations(cert.independent, 2):
        assert not pos[a] & pos[b]


@pytest.mark.parametrize("space", ["line", "plane", "metric"])
def test_approx_larger_instances(space):
    rng = np.random.default_rng(11)
    for _ in range(5):
        inst = random_instance(rng, space, 30)
        assignment, cert = approx_5alpha(inst, 2.0)
        assert is_priority_feasible(inst, assignment)
        assert assignment.cost(2.0) <= cert.bound(2.0) * (1 + 1e-9)


def test_dual_violations_detects_excess():
    inst = ArrivalInstance.line([0, 1])
    assert dual_violations(inst, 2, [0.0, 1.0]) == []
    assert dual_violations(inst, 2, [0.0, 1.5]) == [CoverSet(0, 1.0)]
    # p_1 not yet arrived
    assert dual_violations(inst, 2, [0.0]) == []
