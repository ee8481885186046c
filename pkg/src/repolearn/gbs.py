"""Adaptive root-defect search when every dependency is known.

Generalized binary splitting run over a topological order of the known
dependencies: candidates are always taken as the lowest-index prefix of what is
left, so every package enters a query together with its prerequisites (either
in the same prefix or already cleared).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import InconsistentInstanceError, ParameterError
from .model import InstallationOracle, closure_from_edges, iter_bits, topological_order


def group_testing_lower_bound(n: int, r: int) -> int:
    """ceil(log2(sum_{i<=r} C(n, i))) in exact integer arithmetic."""
    if n < 0 or r < 0:
        raise ParameterError("n and r must be non-negative")
    if r > n:
        raise ParameterError(f"r = {r} exceeds n = {n}")
    total = sum(math.comb(n, i) for i in range(r + 1))
    return (total - 1).bit_length()


def _split_exponent(l: int, r: int) -> int:
    """Largest alpha with 2^alpha * r <= l, i.e. floor(log2(l / r))."""
    alpha = (l // r).bit_length() - 1
    return max(alpha, 0)


@dataclass
class GbsState:
    n: int
    order: list[int]
    remaining_bound: int
    cleared: int = 0
    found_roots: set[int] = field(default_factory=set)
    untested: list[int] = field(default_factory=list)  # kept in L order
    queries: int = 0

    def position(self) -> dict[int, int]:
        return {p: i for i, p in enumerate(self.order)}


class _Runner:
    def __init__(self, oracle: InstallationOracle, n: int, known_deps: Iterable[tuple[int, int]], r: int):
        if oracle.n != n:
            raise ParameterError("oracle width differs from n")
        if not 0 <= r <= n:
            raise ParameterError(f"need 0 <= r <= n, got r = {r}")
        deps = list(known_deps)
        self.oracle = oracle
        order = topological_order(n, deps)
        self.state = GbsState(n=n, order=order, remaining_bound=r, untested=list(order))
        closure = closure_from_edges(n, deps)
        self.dependents = [0] * n
        for q in range(n):
            for p in iter_bits(closure.rows[q]):
                self.dependents[p] |= 1 << q

    def test(self, members: Iterable[int]) -> bool:
        mask = self.state.cleared
        for p in members:
            mask |= 1 << p
        self.state.queries += 1
        return self.oracle.query_mask(mask)

    def declare_root(self, p: int) -> None:
        st = self.state
        if (st.cleared >> p) & 1:
            raise InconsistentInstanceError(f"package {p} was cleared earlier but is now implicated")
        st.found_roots.add(p)
        gone = self.dependents[p]
        st.untested = [x for x in st.untested if not (gone >> x) & 1]
        st.remaining_bound -= 1

    def clear(self, members: Iterable[int]) -> None:
        st = self.state
        done = 0
        for p in members:
            done |= 1 << p
        st.cleared |= done
        st.untested = [x for x in st.untested if not (done >> x) & 1]

    def find_single_defect(self, suspicious: list[int]) -> int:
        a = list(suspicious)
        while len(a) > 1:
            half = a[: len(a) // 2]
            if self.test(half):
                self.clear(half)
                a = a[len(half):]
            else:
                a = half
        return a[0]

    def run(self, confirm: bool) -> set[int]:
        st = self.state
        while st.remaining_bound > 0 and len(st.untested) > 2 * st.remaining_bound - 2:
            l = len(st.untested) - st.remaining_bound + 1
            alpha = _split_exponent(l, st.remaining_bound)
            t = st.untested[: 1 << alpha]
            if self.test(t):
                self.clear(t)
            else:
                self.declare_root(self.find_single_defect(t))
        for p in list(st.untested):
            if st.remaining_bound == 0:
                break
            if p not in st.untested:  # removed as a dependent of an earlier find
                continue
            if self.test([p]):
                self.clear([p])
            else:
                self.declare_root(p)
        if st.untested:
            # The budget is exhausted: every remaining package is clear by assumption.
            rest = list(st.untested)
            if confirm and not self.test(rest):
                raise InconsistentInstanceError(
                    f"more than the allowed root defects: {sorted(st.found_roots)} found, yet {rest} still fail"
                )
            self.clear(rest)
        return set(st.found_roots)


def find_defects(
    oracle: InstallationOracle,
    n: int,
    known_deps: Iterable[tuple[int, int]],
    r: int,
    *,
    confirm: bool = False,
    state: Optional[list] = None,
) -> set[int]:
    """Return the root defects of an instance with at most ``r`` of them.

    Assumes no unknown dependencies and no conflicts.  With ``confirm=True`` one
    extra query checks that packages left untested once the budget ran out are
    indeed clear.  Pass a list as ``state`` to receive the final ``GbsState``.
    """
    runner = _Runner(oracle, n, known_deps, r)
    roots = runner.run(confirm)
    if state is not None:
        state.append(runner.state)
    return roots


def find_single_defect(oracle: InstallationOracle, suspicious: list[int], state: GbsState) -> int:
    """Halve ``suspicious`` (given in L order) down to one root defect.

    Requires that ``suspicious`` together with ``state.cleared`` fails.  Passed
    halves are added to ``state.cleared``.  Uses at most ceil(log2 |suspicious|) queries.
    """
    if not suspicious:
        raise ParameterError("suspicious set is empty")
    runner = _Runner.__new__(_Runner)
    runner.oracle = oracle
    runner.state = state
    return runner.find_single_defect(list(suspicious))
