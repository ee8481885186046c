from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import reach_matrix, true_roots_via_closure
from repolearn.errors import InconsistentInstanceError, ParameterError
from repolearn.gbs import GbsState, _split_exponent, find_defects, find_single_defect, group_testing_lower_bound
from repolearn.model import InstallationOracle, RepositoryInstance, evaluate_installation, topological_sort
from repolearn.truth import true_root_defects
from strategies import dags


def test_lower_bound_examples():
    assert group_testing_lower_bound(8, 2) == 6
    assert group_testing_lower_bound(8, 0) == 0
    assert group_testing_lower_bound(4, 1) == 3
    with pytest.raises(ParameterError):
        group_testing_lower_bound(3, 4)


@given(st.integers(0, 80), st.integers(0, 80))
def test_lower_bound_is_exact_ceil_log2(n, r):
    r = min(r, n)
    total = sum(math.comb(n, i) for i in range(r + 1))
    b = group_testing_lower_bound(n, r)
    assert 2 ** b >= total and (b == 0 or 2 ** (b - 1) < total)


@given(st.integers(1, 10**6), st.integers(1, 1000))
def test_split_exponent_is_floor_log2_ratio(l, r):
    if l < r:
        return
    alpha = _split_exponent(l, r)
    assert 2**alpha * r <= l < 2 ** (alpha + 1) * r
    assert Fraction(l, r) >= 2**alpha


def _path(n):
    return {(j, j - 1) for j in range(1, n)}


def test_no_defects_single_query():
    inst = RepositoryInstance(8, known_deps=_path(8))
    oracle = InstallationOracle(inst)
    assert find_defects(oracle, 8, inst.known_deps, 1) == set()
    assert oracle.query_count == 1


def test_path_with_one_root_defect():
    inst = RepositoryInstance(8, known_deps=_path(8), root_defects={2})
    oracle = InstallationOracle(inst)
    assert find_defects(oracle, 8, inst.known_deps, 1) == {2}
    assert oracle.query_count <= group_testing_lower_bound(8, 1) == 4


def test_random_dag_two_defects():
    rng = random.Random(4)
    for _ in range(30):
        n = 16
        perm = list(range(n))
        rng.shuffle(perm)
        k = {(perm[j], perm[i]) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.1}
        inst = RepositoryInstance(n, known_deps=k, root_defects=rng.sample(range(n), 2))
        oracle = InstallationOracle(inst)
        got = find_defects(oracle, n, k, 2)
        assert got == true_root_defects(inst)
        assert oracle.query_count <= group_testing_lower_bound(n, 2) + 1


def _defective(n, k, roots):
    m = reach_matrix(n, k)
    return {p for p in range(n) if any(m[p, d] for d in roots)}


@given(dags(min_n=1, max_n=12), st.data())
def test_properties_on_random_dags(dag, data):
    n, k = dag
    r = data.draw(st.integers(1, min(5, n)))
    defects = data.draw(st.sets(st.integers(0, n - 1), max_size=r))
    inst = RepositoryInstance(n, known_deps=k, root_defects=defects)
    oracle = InstallationOracle(inst)
    state: list[GbsState] = []
    got = find_defects(oracle, n, k, r, state=state)
    assert got == true_roots_via_closure(n, k, defects)
    assert oracle.query_count <= group_testing_lower_bound(n, r) + r - 1
    defective = _defective(n, k, defects)
    passed = 0
    for installation, ok in oracle.query_log:
        members = set(installation)
        # queries are closed under known dependencies
        assert all(p in members for q, p in k if q in members)
        assert ok == (not members & defective)
        if ok:
            passed |= installation.mask
    final = state[0]
    # cleared packages either passed a query or were left over once the budget ran out
    assert not any(final.cleared >> p & 1 for p in defective)
    if final.remaining_bound > 0:
        assert final.cleared & ~passed == 0
    # determinism
    again = InstallationOracle(inst)
    find_defects(again, n, k, r)
    assert [i.mask for i, _ in again.query_log] == [i.mask for i, _ in oracle.query_log]


@given(dags(min_n=2, max_n=10), st.data())
def test_queries_follow_the_topological_order(dag, data):
    n, k = dag
    r = data.draw(st.integers(1, min(4, n)))
    defects = data.draw(st.sets(st.integers(0, n - 1), max_size=r))
    inst = RepositoryInstance(n, known_deps=k, root_defects=defects)
    oracle = InstallationOracle(inst)
    roots = find_defects(oracle, n, k, r)
    order = topological_sort(inst)
    pos = {p: i for i, p in enumerate(order)}
    skippable = _defective(n, k, roots)
    for installation, _ in oracle.query_log:
        members = set(installation)
        top = max(pos[p] for p in members)
        # anything earlier in the order that is missing must be a found defect or depend on one
        assert all(q in members or q in skippable for q in order[:top])


def test_find_single_defect_single_element():
    inst = RepositoryInstance(3, root_defects={1})
    oracle = InstallationOracle(inst)
    state = GbsState(n=3, order=[0, 1, 2], remaining_bound=1)
    assert find_single_defect(oracle, [1], state) == 1
    assert oracle.query_count == 0


def test_find_single_defect_eight():
    inst = RepositoryInstance(8, known_deps=_path(8), root_defects={5})
    oracle = InstallationOracle(inst)
    state = GbsState(n=8, order=list(range(8)), remaining_bound=1)
    assert find_single_defect(oracle, list(range(8)), state) == 5
    assert oracle.query_count == 3
    assert state.cleared == 0b11111


@pytest.mark.parametrize("alpha", [0, 1, 2, 3, 4])
def test_find_single_defect_exhaustive_placement(alpha):
    size = 2**alpha
    for pos in range(size):
        inst = RepositoryInstance(size, root_defects={pos})
        oracle = InstallationOracle(inst)
        state = GbsState(n=size, order=list(range(size)), remaining_bound=1)
        assert find_single_defect(oracle, list(range(size)), state) == pos
        assert oracle.query_count <= alpha


def test_budget_exhausted_confirm_detects_violation():
    inst = RepositoryInstance(8, root_defects={1, 6})
    with pytest.raises(InconsistentInstanceError):
        find_defects(InstallationOracle(inst), 8, [], 1, confirm=True)
    # without confirm the run trusts the budget
    assert len(find_defects(InstallationOracle(inst), 8, [], 1)) == 1


def test_queries_only_add_satisfied_prerequisites():
    inst = RepositoryInstance(6, known_deps=_path(6), root_defects={0})
    oracle = InstallationOracle(inst)
    assert find_defects(oracle, 6, inst.known_deps, 1) == {0}
    for installation, ok in oracle.query_log:
        assert not ok
        assert 0 in installation
        assert not evaluate_installation(inst, installation)
