"""Brute-force ground truth by enumerating all 2^n installations.

Everything here is exponential and guarded at ``GUARD_N`` packages.  Learners
are accepted by comparing their output with these functions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Optional

from . import kernels
from .errors import GuardError
from .model import Installation, RepositoryInstance, closure_from_edges, iter_bits, mask_of

GUARD_N = 20
GUARD_C = 20


def _guard(n: int) -> None:
    if n > GUARD_N:
        raise GuardError(f"brute force over 2^{n} installations exceeds the n <= {GUARD_N} guard")


def successful_masks(instance: RepositoryInstance) -> list[int]:
    _guard(instance.n)
    return kernels.enumerate_successful(
        instance.n, instance.requirement_masks, instance.conflict_masks, instance.defect_mask
    )


def enumerate_successful(instance: RepositoryInstance) -> list[Installation]:
    """All successful installations, ascending by bitmask."""
    return [Installation(instance.n, m) for m in successful_masks(instance)]


@dataclass(frozen=True)
class TruthReport:
    n: int
    successful: tuple[int, ...]
    true_defects: frozenset
    weak_dep_pairs: frozenset
    weak_conflict_pairs: frozenset
    max_installation: Installation
    vacuous_dep_pairs: frozenset = field(default=frozenset())
    vacuous_conflict_pairs: frozenset = field(default=frozenset())

    @property
    def successful_installations(self) -> list[Installation]:
        return [Installation(self.n, m) for m in self.successful]

    @property
    def successful_count(self) -> int:
        return len(self.successful)

    @property
    def non_defects(self) -> frozenset:
        return frozenset(range(self.n)) - self.true_defects

    def to_json_dict(self) -> dict:
        return {
            "defects": sorted(self.true_defects),
            "weak_conflicts": sorted(list(p) for p in self.weak_conflict_pairs),
            "weak_deps": sorted(list(p) for p in self.weak_dep_pairs),
            "queries_used": 0,
            "bounds_used": {},
            "successful_count": self.successful_count,
            "max_installation": list(self.max_installation.members()),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


def weak_relations(instance: RepositoryInstance) -> TruthReport:
    """Defects, weak dependencies and weak conflicts straight from their definitions.

    Pairs that hold only vacuously because an endpoint is defective are kept apart
    in ``vacuous_*`` so the main sets follow the learner convention.
    """
    n = instance.n
    succ = successful_masks(instance)
    and_rows, or_rows = kernels.success_profiles(n, succ)
    defects = frozenset(p for p in range(n) if or_rows[p] == 0)
    deps, vac_deps, confs, vac_confs = set(), set(), set(), set()
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            if (and_rows[p] >> q) & 1:
                (vac_deps if p in defects else deps).add((p, q))
            if p < q and not (or_rows[p] >> q) & 1:
                (vac_confs if p in defects or q in defects else confs).add((p, q))
    return TruthReport(
        n=n,
        successful=tuple(succ),
        true_defects=defects,
        weak_dep_pairs=frozenset(deps),
        weak_conflict_pairs=frozenset(confs),
        max_installation=Installation(n, _max_mask(succ)),
        vacuous_dep_pairs=frozenset(vac_deps),
        vacuous_conflict_pairs=frozenset(vac_confs),
    )


def _max_mask(masks: Iterable[int]) -> int:
    best, best_size = 0, -1
    for m in masks:  # ascending, so the first mask of maximum size wins ties
        size = bin(m).count("1")
        if size > best_size:
            best, best_size = m, size
    return best


def max_subrepo_bruteforce(instance: RepositoryInstance) -> Installation:
    """A maximum successful installation; ties go to the smallest bitmask."""
    return Installation(instance.n, _max_mask(successful_masks(instance)))


def true_defects(instance: RepositoryInstance) -> frozenset:
    """Packages in no successful installation.

    With only known dependencies and no conflicts a package's prerequisite
    closure is itself an installation, so p is defective iff that closure holds
    a root defect; this path has no size guard.
    """
    if not instance.unknown_deps and not instance.conflicts:
        rows = closure_from_edges(instance.n, instance.known_deps).rows
        dm = instance.defect_mask
        return frozenset(p for p in range(instance.n) if rows[p] & dm)
    return weak_relations(instance).true_defects


def true_root_defects(instance: RepositoryInstance) -> frozenset:
    """Defects whose direct prerequisites are all non-defective."""
    defects = true_defects(instance)
    req = instance.requirement_masks
    dmask = mask_of(defects)
    return frozenset(p for p in defects if req[p] & dmask == 0)


def feedback_diff(first: RepositoryInstance, second: RepositoryInstance) -> list[int]:
    """Masks of the installations on which the two instances answer differently."""
    if first.n != second.n:
        raise ValueError("instances differ in size")
    a = set(successful_masks(first))
    b = set(successful_masks(second))
    return sorted(a ^ b)


def resolve_conflicts_exhaustive(
    n: int,
    known_deps: Iterable[tuple[int, int]],
    conflicts: Iterable[tuple[int, int]],
    defects: Iterable[int],
) -> Installation:
    """Largest package set obtained by dropping one endpoint of every conflict.

    Dropped packages and defects are removed together with everything that
    depends on them through ``known_deps``.  Runs over all 2^c choices; ties go
    to the smallest bitmask.
    """
    conflicts = sorted({(min(p, q), max(p, q)) for p, q in conflicts})
    if len(conflicts) > GUARD_C:
        raise GuardError(f"{len(conflicts)} conflicts exceed the c <= {GUARD_C} guard")
    closure = closure_from_edges(n, known_deps)
    # dependents[p]: packages whose prerequisite closure contains p
    dependents = [0] * n
    for q in range(n):
        for p in iter_bits(closure.rows[q]):
            dependents[p] |= 1 << q
    full = (1 << n) - 1
    base = 0
    for p in defects:
        base |= dependents[p]
    best: Optional[int] = None
    for choice in product((0, 1), repeat=len(conflicts)):
        removed = base
        for pick, pair in zip(choice, conflicts):
            removed |= dependents[pair[pick]]
        keep = full & ~removed
        if best is None or _better(keep, best):
            best = keep
    return Installation(n, full & ~base if best is None else best)


def _better(x: int, y: int) -> bool:
    cx, cy = bin(x).count("1"), bin(y).count("1")
    return cx > cy or (cx == cy and x < y)
