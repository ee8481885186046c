"""Seeded random repositories."""
from __future__ import annotations

import random
from typing import Optional

from .errors import CycleError, ParameterError
from .model import RepositoryInstance, closure_from_edges
from .truth import GUARD_N, weak_relations


def random_instance(
    n: int,
    *,
    known: int = 0,
    unknown: int = 0,
    conflicts: int = 0,
    defects: int = 0,
    seed: int = 0,
    strict: bool = False,
    acyclic_unknown: bool = False,
    r: Optional[int] = None,
) -> RepositoryInstance:
    """Draw a repository with the requested edge and defect counts.

    Known edges point forward along a random permutation, so they form a DAG.
    Unknown edges avoid K; with ``acyclic_unknown`` they follow the same
    permutation.  Root defects have no incoming dependency when ``strict``.
    Conflicts never touch a root defect.  Bounds are attached: ``d`` counts
    every defective package, ``u = |U|``, ``c`` the larger of ``|C|`` and the
    weak-conflict count.
    """
    if n < 0 or min(known, unknown, conflicts, defects) < 0:
        raise ParameterError("counts must be non-negative")
    rng = random.Random(seed)
    perm = list(range(n))
    rng.shuffle(perm)
    forward = [(perm[j], perm[i]) for i in range(n) for j in range(i + 1, n)]
    if known > len(forward):
        raise ParameterError(f"cannot place {known} known edges on {n} packages")
    k = set(rng.sample(forward, known))
    pool = forward if acyclic_unknown else [(q, p) for q in range(n) for p in range(n) if q != p]
    pool = [e for e in pool if e not in k]
    if unknown > len(pool):
        raise ParameterError(f"cannot place {unknown} unknown edges")
    u = set(rng.sample(pool, unknown))
    targets = {p for _, p in k | u}
    allowed = [p for p in range(n) if not (strict and p in targets)]
    if defects > len(allowed):
        raise ParameterError(f"cannot place {defects} root defects")
    d = set(rng.sample(allowed, defects))
    pairs = [(p, q) for p in range(n) for q in range(p + 1, n) if p not in d and q not in d]
    if conflicts > len(pairs):
        raise ParameterError(f"cannot place {conflicts} conflicts")
    c = set(rng.sample(pairs, conflicts))
    inst = RepositoryInstance(n, known_deps=k, unknown_deps=u, conflicts=c, root_defects=d, strict_model=strict)
    return inst.with_changes(bounds=derived_bounds(inst, r))


def derived_bounds(instance: RepositoryInstance, r: Optional[int] = None) -> dict:
    """The tightest ``d, u, c`` (and ``r``) the instance satisfies."""
    if instance.n <= GUARD_N:
        report = weak_relations(instance)
        d = len(report.true_defects)
        c = max(len(instance.conflicts), len(report.weak_conflict_pairs))
    else:
        # Without enumeration: defects through dependencies only.
        try:
            rows = closure_from_edges(instance.n, instance.all_deps).rows
        except CycleError:
            rows = None
        dm = instance.defect_mask
        d = len(instance.root_defects) if rows is None else sum(1 for row in rows if row & dm)
        c = len(instance.conflicts)
    out = {"d": d, "u": len(instance.unknown_deps), "c": c}
    out["r"] = len(instance.root_defects) if r is None else r
    return out

