"""Cover-free-family learners and the anytime wrapper.

Every learner draws a family, turns its vectors into installations, asks the
oracle about all of them, and reads the answer off the per-package success
sets ``S(p)``:

* ``p`` is defective iff ``S(p)`` is empty;
* non-defective ``p, q`` weakly conflict iff ``S(p) & S(q)`` is empty;
* non-defective ``p`` weakly depends on ``q`` iff ``S(p)`` is a subset of ``S(q)``.

``S(p)`` is stored as an int bitset over test indices.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .cff import (
    EXHAUSTIVE_MAX_N,
    CoverFreeFamily,
    build_exhaustive_cff,
    build_randomized_cff,
    pair_count,
    union_bound_size,
    verify_cff,
)
from .errors import ContractViolation, GuardError, ParameterError
from .model import (
    DependencyClosure,
    Installation,
    InstallationOracle,
    RepositoryInstance,
    closure_from_edges,
    contract_sccs,
    evaluate_mask,
    iter_bits,
    mask_of,
    strongly_connected_components,
)

CERTIFY_GUARD = 2 * 10**6
MAX_REDRAWS = 32

Pair = tuple[int, int]


@dataclass(frozen=True)
class Bounds:
    d: int = 0
    u: int = 0
    c: int = 0

    def __post_init__(self) -> None:
        if min(self.d, self.u, self.c) < 0:
            raise ParameterError(f"bounds must be non-negative: {self}")

    def as_dict(self) -> dict:
        return {"d": self.d, "u": self.u, "c": self.c}

    @classmethod
    def coerce(cls, value: "Bounds | dict | Sequence[int]") -> "Bounds":
        if isinstance(value, Bounds):
            return value
        if isinstance(value, dict):
            return cls(**{k: int(v) for k, v in value.items() if k in ("d", "u", "c")})
        return cls(*value)


@dataclass
class FeedbackTable:
    n: int
    tests: list[int] = field(default_factory=list)
    feedback: list[bool] = field(default_factory=list)
    success_sets: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.success_sets:
            self.success_sets = [0] * self.n

    def add(self, masks: Sequence[int], answers: Sequence[bool]) -> None:
        for mask, ok in zip(masks, answers):
            i = len(self.tests)
            self.tests.append(mask)
            self.feedback.append(bool(ok))
            if ok:
                bit = 1 << i
                for p in iter_bits(mask):
                    self.success_sets[p] |= bit

    def tested_set(self, p: int) -> int:
        """T(p) as a bitset over test indices."""
        return mask_of(i for i, t in enumerate(self.tests) if (t >> p) & 1)

    def success_indices(self, p: int) -> list[int]:
        return list(iter_bits(self.success_sets[p]))

    def __len__(self) -> int:
        return len(self.tests)


@dataclass(frozen=True)
class LearnedModel:
    n: int
    defects: frozenset
    weak_conflicts: frozenset
    weak_dep_closure: frozenset = frozenset()
    queries_used: int = 0
    bounds_used: dict = field(default_factory=dict, compare=False)
    table: Optional[FeedbackTable] = field(default=None, compare=False, repr=False)

    @property
    def non_defects(self) -> frozenset:
        return frozenset(range(self.n)) - self.defects

    def same_content(self, other: "LearnedModel") -> bool:
        return (
            self.defects == other.defects
            and self.weak_conflicts == other.weak_conflicts
            and self.weak_dep_closure == other.weak_dep_closure
        )

    def contracted(self):
        """Collapse mutual weak dependencies of non-defective packages into super-packages."""
        return contract_sccs(sorted(self.non_defects), self.weak_dep_closure)

    def to_json_dict(self) -> dict:
        return {
            "defects": sorted(self.defects),
            "weak_conflicts": sorted(list(p) for p in self.weak_conflicts),
            "weak_deps": sorted(list(p) for p in self.weak_dep_closure),
            "queries_used": self.queries_used,
            "bounds_used": dict(self.bounds_used),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"


# Families ---------------------------------------------------------------


def derive_seed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([seed, *keys]).generate_state(1)[0])


def learner_family(n: int, a: int, b: int, delta: float, seed: int, *keys: int) -> CoverFreeFamily:
    """An ``(n, a, b)`` family for a learner.

    Uses the exhaustive family when ``a + b > n`` or when it is no larger than
    the union-bound size.  Random families small enough to check are verified
    and redrawn from a derived seed until they pass.
    """
    if n > EXHAUSTIVE_MAX_N:
        exhaustive_size = None
    else:
        exhaustive_size = 1 << n
    if a + b > n:
        if exhaustive_size is None:
            raise ParameterError(f"a + b = {a + b} exceeds n = {n} and n is too wide for the exhaustive family")
        return build_exhaustive_cff(n, a, b)
    if exhaustive_size is not None and a and b and union_bound_size(n, a, b, delta) >= exhaustive_size:
        return build_exhaustive_cff(n, a, b)
    checkable = pair_count(n, a, b) <= CERTIFY_GUARD
    for attempt in range(MAX_REDRAWS):
        family = build_randomized_cff(n, a, b, delta, derive_seed(seed, *keys, attempt))
        if not checkable or verify_cff(family) is True:
            return family
    raise ParameterError(f"no valid ({n}, {a}, {b}) family after {MAX_REDRAWS} draws")


def planned_family_size(n: int, a: int, b: int, delta: float) -> int:
    """Size of the family ``learner_family`` returns for these parameters."""
    if a + b > n:
        return 1 << n
    if b == 0 or a == 0:
        return 1
    m = union_bound_size(n, a, b, delta)
    return min(m, 1 << n) if n <= EXHAUSTIVE_MAX_N else m


def planned_queries(algorithm: str, n: int, bounds: Bounds, delta: float = 0.01) -> Optional[int]:
    """Queries a learner issues (an upper bound for the two-phase learners, whose
    second phase runs on however many packages survive)."""
    d, u, c = bounds.d, bounds.u, bounds.c
    if algorithm == "max-subrepo":
        return planned_family_size(n, d, u + 1, delta)
    if algorithm == "full-known":
        return planned_family_size(n, d + c, 2, delta)
    if algorithm == "full-known-adaptive":
        return planned_family_size(n, d + c, 1, delta / 2) + planned_family_size(n, min(c, n - 2), 2, delta / 2)
    if algorithm == "full-unknown":
        return planned_family_size(n, d + c + u + 1, u + 2, delta)
    if algorithm == "full-unknown-layered":
        return sum(planned_family_size(n, d + c + (u - i) + 1, i + 2, delta / (u + 1)) for i in range(u + 1))
    if algorithm == "full-unknown-adaptive":
        return planned_family_size(n, u + c + d, u + 1, delta / 2) + planned_family_size(n, u + c + 1, u + 2, delta / 2)
    return None


def embed(family: CoverFreeFamily, universe: Sequence[int]) -> list[int]:
    """Map vectors over positions ``0..len(universe)-1`` onto package ids."""
    if family.n != len(universe):
        raise ContractViolation("family width differs from universe size")
    if list(universe) == list(range(len(universe))):
        return list(family.vectors)
    return [mask_of(universe[i] for i in iter_bits(v)) for v in family.vectors]


# Tests and feedback -------------------------------------------------------


def generate_tests(closure: DependencyClosure, family: CoverFreeFamily) -> list[Installation]:
    """Close every family vector under the known dependencies."""
    if family.n != closure.n:
        raise ContractViolation(f"family width {family.n} != repository size {closure.n}")
    masks = kernels.propagate_many(closure.n, family.vectors, closure.rows)
    return [Installation(closure.n, m) for m in masks]


def collect_feedback(
    oracle: InstallationOracle, tests: Sequence[Installation], table: Optional[FeedbackTable] = None
) -> FeedbackTable:
    """Query every test once and record per-package success sets."""
    table = FeedbackTable(oracle.n) if table is None else table
    answers = oracle.query_many(list(tests))
    table.add([t.mask for t in tests], answers)
    return table


def _run_masks(oracle: InstallationOracle, masks: Sequence[int], table: FeedbackTable) -> None:
    collect_feedback(oracle, [Installation(oracle.n, m) for m in masks], table)


# Inference --------------------------------------------------------------


def infer_defects(table: FeedbackTable, universe: Iterable[int]) -> frozenset:
    return frozenset(p for p in universe if table.success_sets[p] == 0)


def infer_conflicts(table: FeedbackTable, packages: Sequence[int]) -> frozenset:
    s = table.success_sets
    out = set()
    for i, p in enumerate(packages):
        for q in packages[i + 1:]:
            if s[p] & s[q] == 0:
                out.add((min(p, q), max(p, q)))
    return frozenset(out)


def infer_dependencies(table: FeedbackTable, packages: Sequence[int]) -> frozenset:
    s = table.success_sets
    return frozenset((p, q) for p in packages for q in packages if p != q and s[p] & ~s[q] == 0)


def _model(
    n: int,
    table: FeedbackTable,
    defects: frozenset,
    with_deps: bool,
    queries: int,
    bounds: Bounds,
    universe: Optional[Sequence[int]] = None,
) -> LearnedModel:
    pool = range(n) if universe is None else universe
    alive = [p for p in pool if p not in defects]
    return LearnedModel(
        n=n,
        defects=defects,
        weak_conflicts=infer_conflicts(table, alive),
        weak_dep_closure=infer_dependencies(table, alive) if with_deps else frozenset(),
        queries_used=queries,
        bounds_used=bounds.as_dict(),
        table=table,
    )


def _check_oracle(oracle: InstallationOracle, n: int) -> None:
    if oracle.n != n:
        raise ContractViolation(f"oracle width {oracle.n} != n = {n}")


# Learners ---------------------------------------------------------------


def learn_max_subrepo(
    oracle: InstallationOracle,
    n: int,
    known_deps: Iterable[Pair],
    bounds: Bounds | dict,
    *,
    delta: float = 0.01,
    seed: int = 0,
) -> frozenset:
    """Non-defective packages via one ``(n, d, u+1)`` family; assumes no conflicts.

    Without conflicts the non-defective packages form the maximum installation.
    """
    _check_oracle(oracle, n)
    bounds = Bounds.coerce(bounds)
    closure = closure_from_edges(n, known_deps)
    family = learner_family(n, bounds.d, bounds.u + 1, delta, seed, 1)
    table = collect_feedback(oracle, generate_tests(closure, family))
    return frozenset(range(n)) - infer_defects(table, range(n))


def learn_full_known_deps(
    oracle: InstallationOracle,
    n: int,
    known_deps: Iterable[Pair],
    bounds: Bounds | dict,
    *,
    delta: float = 0.01,
    seed: int = 0,
) -> LearnedModel:
    """Defects and weak conflicts from one ``(n, d+c, 2)`` family closed under K."""
    _check_oracle(oracle, n)
    bounds = Bounds.coerce(bounds)
    start = oracle.query_count
    closure = closure_from_edges(n, known_deps)
    family = learner_family(n, bounds.d + bounds.c, 2, delta, seed, 2)
    table = collect_feedback(oracle, generate_tests(closure, family))
    defects = infer_defects(table, range(n))
    return _model(n, table, defects, False, oracle.query_count - start, bounds)


def learn_full_known_deps_adaptive(
    oracle: InstallationOracle,
    n: int,
    known_deps: Iterable[Pair],
    bounds: Bounds | dict,
    *,
    delta: float = 0.01,
    seed: int = 0,
) -> LearnedModel:
    """Two phases: an ``(n, d+c, 1)`` family finds the defects, then a
    ``(n', c, 2)`` family over the ``n'`` survivors finds the conflicts."""
    _check_oracle(oracle, n)
    bounds = Bounds.coerce(bounds)
    start = oracle.query_count
    known_deps = list(known_deps)
    closure = closure_from_edges(n, known_deps)
    first = learner_family(n, bounds.d + bounds.c, 1, delta / 2, seed, 3, 1)
    table = collect_feedback(oracle, generate_tests(closure, first))
    defects = infer_defects(table, range(n))
    alive = [p for p in range(n) if p not in defects]
    if len(alive) >= 2:
        # Prerequisites of survivors survive too, so propagation stays inside.
        second = learner_family(len(alive), min(bounds.c, len(alive) - 2), 2, delta / 2, seed, 3, 2)
        vectors = embed(second, alive)
        _run_masks(oracle, kernels.propagate_many(n, vectors, closure.rows), table)
    return _model(n, table, defects, False, oracle.query_count - start, bounds)


def learn_full_unknown_deps(
    oracle: InstallationOracle,
    n: int,
    bounds: Bounds | dict,
    *,
    delta: float = 0.01,
    seed: int = 0,
) -> LearnedModel:
    """Everything from one raw ``(n, d+c+u+1, u+2)`` family.

    Known dependencies are not used, so ``bounds.u`` must also cover them.
    """
    _check_oracle(oracle, n)
    bounds = Bounds.coerce(bounds)
    start = oracle.query_count
    d, u, c = bounds.d, bounds.u, bounds.c
    family = learner_family(n, d + c + u + 1, u + 2, delta, seed, 4)
    table = FeedbackTable(n)
    _run_masks(oracle, family.vectors, table)
    defects = infer_defects(table, range(n))
    return _model(n, table, defects, True, oracle.query_count - start, bounds)


def layered_families(n: int, bounds: Bounds, delta: float, seed: int) -> list[CoverFreeFamily]:
    d, u, c = bounds.d, bounds.u, bounds.c
    share = delta / (u + 1)
    return [learner_family(n, d + c + (u - i) + 1, i + 2, share, seed, 5, i) for i in range(u + 1)]


def learn_full_unknown_deps_layered(
    oracle: InstallationOracle,
    n: int,
    bounds: Bounds | dict,
    *,
    delta: float = 0.01,
    seed: int = 0,
) -> LearnedModel:
    """Union of ``u+1`` families, layer ``i`` an ``(n, d+c+(u-i)+1, i+2)`` family."""
    _check_oracle(oracle, n)
    bounds = Bounds.coerce(bounds)
    start = oracle.query_count
    table = FeedbackTable(n)
    for family in layered_families(n, bounds, delta, seed):
        _run_masks(oracle, family.vectors, table)
    defects = infer_defects(table, range(n))
    return _model(n, table, defects, True, oracle.query_count - start, bounds)


def learn_full_unknown_deps_adaptive(
    oracle: InstallationOracle,
    n: int,
    bounds: Bounds | dict,
    *,
    delta: float = 0.01,
    seed: int = 0,
) -> LearnedModel:
    """An ``(n, u+c+d, u+1)`` family finds the defects; a ``(n', u+c+1, u+2)``
    family over the survivors then finds conflicts and dependencies."""
    _check_oracle(oracle, n)
    bounds = Bounds.coerce(bounds)
    start = oracle.query_count
    d, u, c = bounds.d, bounds.u, bounds.c
    first = learner_family(n, u + c + d, u + 1, delta / 2, seed, 6, 1)
    table = FeedbackTable(n)
    _run_masks(oracle, first.vectors, table)
    defects = infer_defects(table, range(n))
    alive = [p for p in range(n) if p not in defects]
    if len(alive) >= 2:
        second = learner_family(len(alive), u + c + 1, u + 2, delta / 2, seed, 6, 2)
        _run_masks(oracle, embed(second, alive), table)
    return _model(n, table, defects, True, oracle.query_count - start, bounds)


# Anytime wrapper ----------------------------------------------------------


def minimum_generating_edges(n: int, pairs: Iterable[Pair]) -> int:
    """Fewest edges whose transitive closure contains exactly ``pairs``' closure.

    Each strongly connected component of size k > 1 needs a k-cycle; the
    condensation needs its transitive reduction.
    """
    pairs = list(pairs)
    comps = strongly_connected_components(n, pairs)
    comp_of = [0] * n
    for cid, comp in enumerate(comps):
        for p in comp:
            comp_of[p] = cid
    total = sum(len(c) for c in comps if len(c) > 1)
    m = len(comps)
    edges = {(comp_of[q], comp_of[p]) for q, p in pairs if comp_of[q] != comp_of[p]}
    closure = closure_from_edges(m, edges)
    for x, y in edges:
        # (x, y) is redundant if y is reachable from some other direct successor z of x
        redundant = any(z != y and closure.reach(z, y) for (w, z) in edges if w == x)
        if not redundant:
            total += 1
    return total


def explains(model: LearnedModel, known_deps: Iterable[Pair], log: Sequence[tuple[int, bool]]) -> bool:
    """Replay every ``(mask, outcome)`` against the constraints the model implies."""
    known = frozenset(known_deps)
    candidate = RepositoryInstance(
        n=model.n,
        known_deps=known,
        unknown_deps=frozenset(model.weak_dep_closure) - known,
        conflicts=model.weak_conflicts,
        root_defects=model.defects,
    )
    return all(evaluate_mask(candidate, mask) == ok for mask, ok in log)


def bound_schedule(n: int, max_total: Optional[int] = None):
    """Bounds in nondecreasing d+u+c; within a total, larger d first, then larger c.

    Each coordinate stays within what ``n`` packages allow: ``d <= n``,
    ``c <= n(n-1)/2`` and ``u <= n(n-1)``.
    """
    d_max, c_max, u_max = n, n * (n - 1) // 2, n * (n - 1)
    cap = d_max + c_max + u_max if max_total is None else max_total
    for s in range(cap + 1):
        for d in range(min(s, d_max), -1, -1):
            for c in range(min(s - d, c_max), -1, -1):
                if s - d - c <= u_max:
                    yield Bounds(d=d, u=s - d - c, c=c)


@dataclass(frozen=True)
class AnytimeResult:
    model: LearnedModel
    bounds: Bounds
    rounds: int
    queries: int
    consistent: bool


def anytime_full_learning(
    oracle: InstallationOracle,
    n: int,
    known_deps: Iterable[Pair] = (),
    *,
    delta: float = 0.01,
    seed: int = 0,
    max_total: Optional[int] = None,
) -> AnytimeResult:
    """Learn without bounds by growing them until the model explains all feedback.

    Each round runs the flat unknown-dependency learner (known edges count
    towards its ``u``).  A round stops the search when replaying every query
    made so far against the model reproduces every answer and the model's size
    fits the round's bounds.
    """
    _check_oracle(oracle, n)
    known = list(known_deps)
    start = oracle.query_count
    log: list[tuple[int, bool]] = []
    rounds = 0
    last: Optional[tuple[LearnedModel, Bounds]] = None
    for bounds in bound_schedule(n, max_total):
        effective = Bounds(bounds.d, bounds.u + len(known), bounds.c)
        before = oracle.query_count
        try:
            model = learn_full_unknown_deps(oracle, n, effective, delta=delta, seed=derive_seed(seed, rounds))
        except (ParameterError, GuardError):
            continue
        rounds += 1
        table = model.table
        log.extend(zip(table.tests, table.feedback))
        model = LearnedModel(
            n=n,
            defects=model.defects,
            weak_conflicts=model.weak_conflicts,
            weak_dep_closure=model.weak_dep_closure,
            queries_used=oracle.query_count - start,
            bounds_used=bounds.as_dict(),
            table=table,
        )
        last = (model, bounds)
        assert oracle.query_count - before == len(table)
        fits = (
            len(model.defects) <= bounds.d
            and len(model.weak_conflicts) <= bounds.c
            and minimum_generating_edges(n, model.weak_dep_closure) <= bounds.u + len(known)
        )
        if fits and explains(model, known, log):
            return AnytimeResult(model, bounds, rounds, oracle.query_count - start, True)
    if last is None:
        empty = LearnedModel(n, frozenset(), frozenset(), frozenset(), oracle.query_count - start, {})
        return AnytimeResult(empty, Bounds(), rounds, oracle.query_count - start, False)
    model, bounds = last
    return AnytimeResult(model, bounds, rounds, oracle.query_count - start, False)
