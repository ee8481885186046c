from __future__ import annotations

import json

import pytest

from oracles import relations, successful
from repolearn.errors import ParameterError
from repolearn.fixtures import (
    FIXTURE_KINDS,
    FixtureSpec,
    adaptive_lb_cycles,
    adaptive_lb_sets,
    build_fixture,
    conflict_chain,
    conflict_chain_weak_count,
    conflict_fan_q,
    full_learning_conflict_fan,
    full_learning_conflict_fan_pair,
    path_root_defect,
    path_root_defect_pair,
    single_conflict_path,
    single_conflict_path_pair,
    single_unknown_dep_path,
    single_unknown_dep_path_pair,
    star_defects,
    star_defects_pair,
)
from repolearn.learners import Bounds, learn_full_unknown_deps
from repolearn.model import InstallationOracle, RepositoryInstance
from repolearn.truth import feedback_diff, max_subrepo_bruteforce, weak_relations


def m(*ids):
    out = 0
    for i in ids:
        out |= 1 << i
    return out


def diff_set(pair):
    """Installations on which the two scenarios answer differently, by brute force."""
    a, b = (set(successful(x)) for x in pair)
    return sorted(a ^ b)


def witness(n, predicate):
    return [s for s in range(1 << n) if predicate(s)]


def contains(s, ids):
    return all(s >> i & 1 for i in ids)


def avoids(s, ids):
    return not any(s >> i & 1 for i in ids)


# path_root_defect ---------------------------------------------------------


@pytest.mark.parametrize("n", [2, 5, 9, 12])
def test_path_root_defect_only_the_pivot_prefix_succeeds(n):
    for i in range(1, n):
        inst = path_root_defect(n, i)
        assert successful(inst) == [0, m(*range(i))]


def test_path_root_defect_last_pivot_max_size():
    assert len(max_subrepo_bruteforce(path_root_defect(7, 6))) == 6


@pytest.mark.parametrize("n", [3, 8, 12])
def test_path_root_defect_pair_diff(n):
    for i in range(1, n):
        pair = path_root_defect_pair(n, i)
        assert successful(pair[1]) == [0]
        assert diff_set(pair) == feedback_diff(*pair) == [m(*range(i))]


def test_path_root_defect_range():
    with pytest.raises(ParameterError):
        path_root_defect(4, 4)
    with pytest.raises(ParameterError):
        path_root_defect(4, 0)


# star_defects -------------------------------------------------------------


@pytest.mark.parametrize("n,d,u", [(6, 1, 2), (8, 3, 2), (10, 2, 4), (12, 4, 3)])
def test_star_defects_claims(n, d, u):
    inst, twin = star_defects_pair(n, d, u)
    a, x = range(1, u + 1), range(u + 1, u + d)
    assert len(inst.unknown_deps) == u
    best = max_subrepo_bruteforce(inst)
    assert contains(best.mask, [0, *a])
    assert len(weak_relations(inst).true_defects) == d - 1
    assert len(weak_relations(twin).true_defects) == d
    # only installations with p, every a_i and no x_j tell the scenarios apart
    expected = witness(n, lambda s: contains(s, [0, *a]) and avoids(s, x))
    assert diff_set((inst, twin)) == feedback_diff(inst, twin) == expected


def test_star_defects_capacity():
    with pytest.raises(ParameterError):
        star_defects(4, 3, 2)


# conflict_chain ------------------------------------------------------------


@pytest.mark.parametrize("n,d,u,c", [(8, 1, 2, 1), (8, 1, 2, 2), (10, 2, 2, 3), (10, 2, 2, 4), (12, 2, 3, 5),
                                     (12, 1, 3, 6)])
def test_conflict_chain_claims(n, d, u, c):
    inst = conflict_chain(n, d, u, c)
    h = (c + 1) // 2
    a = list(range(1, u + 1))
    b = list(range(u + d, u + d + h))
    assert len(inst.unknown_deps) == u
    report = weak_relations(inst)
    assert len(report.weak_conflict_pairs) == conflict_chain_weak_count(c) <= c
    assert len(report.true_defects) == d - 1
    # every b_i weakly conflicts with p
    assert all((0, bi) in report.weak_conflict_pairs for bi in b)
    best = len(report.max_installation)
    tops = [s for s in successful(inst) if bin(s).count("1") == best]
    # maxima tie: one keeps every a_i and drops p (others swap some a_i for b_i or keep p)
    assert any(contains(s, a) and avoids(s, [0]) for s in tops)
    assert any(contains(s, [0, *a]) for s in tops)


def test_conflict_chain_count_is_c_for_odd_c():
    for c in (1, 3, 5):
        assert conflict_chain_weak_count(c) == c
    assert conflict_chain_weak_count(4) == 3


def test_conflict_chain_preconditions():
    with pytest.raises(ParameterError):
        conflict_chain(12, 1, 1, 3)
    with pytest.raises(ParameterError):
        conflict_chain(4, 1, 2, 4)


# single_conflict_path -----------------------------------------------------


@pytest.mark.parametrize("n", [3, 6, 10])
def test_single_conflict_path_prefix_rule(n):
    for ell in range(1, n):
        inst = single_conflict_path(n, ell)
        ok = set(successful(inst))
        for j in range(n):
            assert (m(0, *range(1, j + 1)) in ok) == (j < ell)
        assert len(inst.conflicts) == 1


@pytest.mark.parametrize("n", [3, 7, 12])
def test_single_conflict_path_pair_diff(n):
    for ell in range(2, n):
        pair = single_conflict_path_pair(n, ell)
        assert diff_set(pair) == feedback_diff(*pair) == [m(0, *range(1, ell))]


# single_unknown_dep_path --------------------------------------------------


@pytest.mark.parametrize("n", [3, 6, 12])
def test_single_unknown_dep_path_pair_diff(n):
    for i in range(1, n):
        pair = single_unknown_dep_path_pair(n, i)
        assert len(pair[0].unknown_deps) == 1
        assert diff_set(pair) == feedback_diff(*pair) == [m(*range(i))]
        for x in pair:
            ok = set(successful(x))
            assert all(m(*range(j)) in ok for j in range(i))


def test_single_unknown_dep_path_top_is_plain_path():
    assert single_unknown_dep_path(5, 5).unknown_deps == frozenset()


# full_learning_conflict_fan -----------------------------------------------


@pytest.mark.parametrize("n,d,u,c", [(6, 1, 1, 2), (8, 2, 2, 2), (10, 1, 3, 3), (12, 3, 2, 4), (12, 0, 4, 1)])
def test_conflict_fan_claims(n, d, u, c):
    inst, other = full_learning_conflict_fan_pair(n, d, u, c)
    q = conflict_fan_q(u, c, d)
    a = range(1, u + 1)
    s1 = list(range(u + 1, u + c + d))  # the b's and the x's
    for x in (inst, other):
        report = weak_relations(x)
        assert len(report.weak_conflict_pairs) <= c
        assert len(report.true_defects) == d
        assert len(x.unknown_deps) == u
    expected = witness(n, lambda s: contains(s, [0, q, *a]) and avoids(s, s1))
    assert diff_set((inst, other)) == feedback_diff(inst, other) == expected


def test_conflict_fan_capacity():
    with pytest.raises(ParameterError):
        full_learning_conflict_fan(5, 2, 2, 2)


# adaptive_lb_cycles -------------------------------------------------------


@pytest.mark.parametrize("n,d,u", [(4, 1, 1), (6, 1, 2), (8, 2, 2), (10, 3, 2), (12, 2, 4)])
def test_adaptive_cycles_claims(n, d, u):
    first, second = adaptive_lb_cycles(n, d, u)
    sets = adaptive_lb_sets(d, u)
    prime = list(range(u + d))
    assert len(sets["A1"]) == d and len(sets["A2"]) == u
    assert len(sets["B1"]) == d and len(sets["B2"]) == u
    ok1 = set(successful(first))
    rest = [p for p in range(n) if p not in prime]
    for extra in range(1 << len(rest)):
        s = m(*sets["A2"]) | m(*(rest[i] for i in range(len(rest)) if extra >> i & 1))
        assert s in ok1
    a2, b2 = m(*sets["A2"]), m(*sets["B2"])
    pmask = m(*prime)
    expected = witness(n, lambda s: (s & pmask) in (a2, b2))
    assert diff_set((first, second)) == feedback_diff(first, second) == expected
    for x in (first, second):
        assert len(weak_relations(x).true_defects) == d
        assert len(x.unknown_deps) <= u


def test_adaptive_cycles_capacity():
    with pytest.raises(ParameterError):
        adaptive_lb_cycles(5, 2, 1)


# Registry and positive control --------------------------------------------

SPECS = [
    FixtureSpec("path_root_defect", {"n": 8, "pivot": 3}),
    FixtureSpec("path_root_defect_twin", {"n": 8}),
    FixtureSpec("star_defects", {"n": 9, "d": 2, "u": 3}),
    FixtureSpec("conflict_chain", {"n": 10, "d": 2, "u": 2, "c": 3}),
    FixtureSpec("single_conflict_path", {"n": 8, "pivot": 4}),
    FixtureSpec("single_unknown_dep_path", {"n": 8, "pivot": 2}),
    FixtureSpec("full_learning_conflict_fan", {"n": 10, "d": 1, "u": 2, "c": 3}),
    FixtureSpec("adaptive_lb_cycles", {"n": 8, "d": 2, "u": 2}),
]


def test_every_kind_has_a_spec():
    assert sorted(s.kind for s in SPECS) == sorted(FIXTURE_KINDS)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_fixture_json_round_trip(spec):
    doc = json.loads(spec.to_json())
    assert doc["fixture"] == {"kind": spec.kind, "params": spec.params}
    assert RepositoryInstance.from_json_dict(doc) == spec.build()


def test_unknown_kind():
    with pytest.raises(ParameterError):
        build_fixture("nope", n=3)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_learner_recovers_every_fixture(spec):
    inst = spec.build()
    truth_defects, truth_deps, truth_conflicts = relations(inst)
    c = max(len(inst.conflicts), len(truth_conflicts))
    bounds = Bounds(len(truth_defects), len(inst.unknown_deps) + len(inst.known_deps), c)
    model = learn_full_unknown_deps(InstallationOracle(inst), inst.n, bounds, seed=1)
    assert model.defects == truth_defects
    assert model.weak_conflicts == truth_conflicts
    assert model.weak_dep_closure == truth_deps
