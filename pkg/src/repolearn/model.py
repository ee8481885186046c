"""Ground-truth repositories, installations, and the query-counting oracle.

Dependency pairs are always oriented ``(q, p)``: *q depends on p*, so any
installation containing ``q`` but not ``p`` fails.  Package ids are dense
integers ``0..n-1`` and installations are bitmasks over them (bit ``i`` set
means package ``i`` is installed).
"""
from __future__ import annotations

import heapq
import json
import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Hashable, Iterable, Iterator, Mapping, Optional, Sequence

from . import kernels
from .errors import ContractViolation, CycleError

Pair = tuple[int, int]


@dataclass(frozen=True)
class Installation:
    """A set of packages submitted as one oracle query."""

    n: int
    mask: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ContractViolation("width must be non-negative")
        if self.mask < 0 or self.mask >> self.n:
            raise ContractViolation(f"mask {self.mask:#x} does not fit in width {self.n}")

    @classmethod
    def from_members(cls, n: int, members: Iterable[int]) -> "Installation":
        mask = 0
        for p in members:
            if not 0 <= p < n:
                raise ContractViolation(f"package {p} outside [0, {n})")
            mask |= 1 << p
        return cls(n, mask)

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Installation":
        return cls.from_members(len(bits), (i for i, b in enumerate(bits) if b))

    @classmethod
    def full(cls, n: int) -> "Installation":
        return cls(n, (1 << n) - 1)

    def members(self) -> tuple[int, ...]:
        return tuple(iter_bits(self.mask))

    def bits(self) -> tuple[int, ...]:
        return tuple((self.mask >> i) & 1 for i in range(self.n))

    def __contains__(self, p: object) -> bool:
        return isinstance(p, int) and 0 <= p < self.n and bool((self.mask >> p) & 1)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def issubset(self, other: "Installation") -> bool:
        _check_width(self, other.n)
        return self.mask & ~other.mask == 0

    def __or__(self, other: "Installation") -> "Installation":
        _check_width(self, other.n)
        return Installation(self.n, self.mask | other.mask)

    def __and__(self, other: "Installation") -> "Installation":
        _check_width(self, other.n)
        return Installation(self.n, self.mask & other.mask)

    def __repr__(self) -> str:
        return f"Installation(n={self.n}, members={list(self.members())})"


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(members: Iterable[int]) -> int:
    m = 0
    for p in members:
        m |= 1 << p
    return m


def _check_width(inst: Installation, n: int) -> None:
    if inst.n != n:
        raise ContractViolation(f"installation width {inst.n} != repository size {n}")


def _normalize_pairs(n: int, pairs: Iterable[Sequence[int]], what: str, *, ordered: bool) -> frozenset:
    seen = []
    for pair in pairs:
        if len(pair) != 2:
            raise ContractViolation(f"{what}: expected pairs, got {pair!r}")
        a, b = int(pair[0]), int(pair[1])
        for x in (a, b):
            if not 0 <= x < n:
                raise ContractViolation(f"{what}: package {x} outside [0, {n})")
        if a == b:
            raise ContractViolation(f"{what}: self pair ({a}, {a})")
        seen.append((a, b) if ordered else (min(a, b), max(a, b)))
    out = frozenset(seen)
    if len(out) != len(seen):
        raise ContractViolation(f"{what}: duplicate pairs")
    return out


@dataclass(frozen=True)
class RepositoryInstance:
    """Hidden ground truth: the mixed graph ``(P, C, K ∪ U)`` plus root defects.

    ``strict_model`` enforces that nothing depends on a root defect.  The
    default relaxed mode allows it, which the adaptive defect finder needs.
    """

    n: int
    known_deps: frozenset = frozenset()
    unknown_deps: frozenset = frozenset()
    conflicts: frozenset = frozenset()
    root_defects: frozenset = frozenset()
    strict_model: bool = False
    bounds: Optional[Mapping[str, int]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        n = self.n
        if n < 0:
            raise ContractViolation("n must be non-negative")
        k = _normalize_pairs(n, self.known_deps, "known_deps", ordered=True)
        u = _normalize_pairs(n, self.unknown_deps, "unknown_deps", ordered=True)
        c = _normalize_pairs(n, self.conflicts, "conflicts", ordered=False)
        d = [int(x) for x in self.root_defects]
        if any(not 0 <= x < n for x in d):
            raise ContractViolation("root_defects: package outside range")
        if len(set(d)) != len(d):
            raise ContractViolation("root_defects: duplicates")
        if k & u:
            raise ContractViolation("known_deps and unknown_deps overlap")
        object.__setattr__(self, "known_deps", k)
        object.__setattr__(self, "unknown_deps", u)
        object.__setattr__(self, "conflicts", c)
        object.__setattr__(self, "root_defects", frozenset(d))
        if self.bounds is not None:
            object.__setattr__(self, "bounds", dict(self.bounds))
        if self.strict_model:
            bad = [(q, p) for q, p in k | u if p in self.root_defects]
            if bad:
                raise ContractViolation(f"strict model forbids dependencies on root defects: {sorted(bad)}")
        topological_order(n, k)  # raises CycleError

    @property
    def packages(self) -> range:
        return range(self.n)

    @property
    def all_deps(self) -> frozenset:
        return self.known_deps | self.unknown_deps

    @cached_property
    def requirement_masks(self) -> tuple[int, ...]:
        """``req[q]``: mask of direct prerequisites of ``q`` over K ∪ U."""
        req = [0] * self.n
        for q, p in self.all_deps:
            req[q] |= 1 << p
        return tuple(req)

    @cached_property
    def conflict_masks(self) -> tuple[int, ...]:
        return tuple(sorted((1 << a) | (1 << b) for a, b in self.conflicts))

    @cached_property
    def defect_mask(self) -> int:
        return mask_of(self.root_defects)

    def with_changes(self, **changes: Any) -> "RepositoryInstance":
        base = dict(
            n=self.n,
            known_deps=self.known_deps,
            unknown_deps=self.unknown_deps,
            conflicts=self.conflicts,
            root_defects=self.root_defects,
            strict_model=self.strict_model,
            bounds=self.bounds,
        )
        base.update(changes)
        return RepositoryInstance(**base)

    # JSON instance format ------------------------------------------------

    def to_json_dict(self, **extra: Any) -> dict:
        doc: dict[str, Any] = {
            "n": self.n,
            "known_deps": sorted([q, p] for q, p in self.known_deps),
            "unknown_deps": sorted([q, p] for q, p in self.unknown_deps),
            "conflicts": sorted([a, b] for a, b in self.conflicts),
            "root_defects": sorted(self.root_defects),
            "strict_model": self.strict_model,
        }
        if self.bounds is not None:
            doc["bounds"] = {k: int(self.bounds[k]) for k in sorted(self.bounds)}
        doc.update(extra)
        return doc

    def to_json(self, **extra: Any) -> str:
        return json.dumps(self.to_json_dict(**extra), indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, doc: Mapping[str, Any]) -> "RepositoryInstance":
        if "n" not in doc:
            raise ContractViolation("instance JSON needs an 'n' field")
        return cls(
            n=int(doc["n"]),
            known_deps=[tuple(x) for x in doc.get("known_deps", [])],
            unknown_deps=[tuple(x) for x in doc.get("unknown_deps", [])],
            conflicts=[tuple(x) for x in doc.get("conflicts", [])],
            root_defects=list(doc.get("root_defects", [])),
            strict_model=bool(doc.get("strict_model", False)),
            bounds=doc.get("bounds"),
        )

    @classmethod
    def from_json(cls, text: str) -> "RepositoryInstance":
        return cls.from_json_dict(json.loads(text))


def evaluate_installation(instance: RepositoryInstance, inst: Installation) -> bool:
    """True iff ``inst`` satisfies every dependency and conflict and holds no root defect."""
    _check_width(inst, instance.n)
    return evaluate_mask(instance, inst.mask)


def evaluate_mask(instance: RepositoryInstance, mask: int) -> bool:
    return kernels.evaluate_many(
        instance.n, [mask], instance.requirement_masks, instance.conflict_masks, instance.defect_mask
    )[0]


class InstallationOracle:
    """Answers installation attempts against a hidden instance and counts them.

    Learners may use ``n``, ``known_deps`` and the answers; nothing else of the
    instance is exposed.  Queries are thread-safe.
    """

    def __init__(self, instance: RepositoryInstance, *, record: bool = True) -> None:
        self._instance = instance
        self._lock = threading.Lock()
        self._record = record
        self.query_count = 0
        self.query_log: list[tuple[Installation, bool]] = []

    @property
    def n(self) -> int:
        return self._instance.n

    @property
    def known_deps(self) -> frozenset:
        return self._instance.known_deps

    def query(self, inst: Installation) -> bool:
        _check_width(inst, self.n)
        return self.query_many([inst])[0]

    def query_mask(self, mask: int) -> bool:
        return self.query(Installation(self.n, mask))

    def query_many(self, insts: Sequence[Installation]) -> list[bool]:
        """Evaluate a batch of installations; counts one query per element."""
        for inst in insts:
            _check_width(inst, self.n)
        inst_ = self._instance
        answers = kernels.evaluate_many(
            inst_.n, [i.mask for i in insts], inst_.requirement_masks, inst_.conflict_masks, inst_.defect_mask
        )
        with self._lock:
            self.query_count += len(insts)
            if self._record:
                self.query_log.extend(zip(insts, answers))
        return answers


@dataclass(frozen=True)
class DependencyClosure:
    """Reflexive-transitive closure of the known dependencies.

    ``rows[p]`` is the mask of packages reachable from ``p`` (its transitive
    prerequisites, ``p`` included).
    """

    n: int
    rows: tuple[int, ...]

    def reach(self, p: int, q: int) -> bool:
        return bool((self.rows[p] >> q) & 1)

    def matrix(self) -> list[list[bool]]:
        return [[self.reach(p, q) for q in range(self.n)] for p in range(self.n)]

    def dependents_mask(self, p: int) -> int:
        """Packages that (transitively) depend on ``p``, ``p`` included."""
        return mask_of(q for q in range(self.n) if (self.rows[q] >> p) & 1)


def closure_from_edges(n: int, deps: Iterable[Pair]) -> DependencyClosure:
    deps = list(deps)
    order = topological_order(n, deps)
    prereqs: list[list[int]] = [[] for _ in range(n)]
    for q, p in deps:
        prereqs[q].append(p)
    rows = [0] * n
    for q in order:  # prerequisites are finished before their dependents
        acc = 1 << q
        for p in prereqs[q]:
            acc |= rows[p]
        rows[q] = acc
    return DependencyClosure(n, tuple(rows))


def transitive_closure(instance: RepositoryInstance) -> DependencyClosure:
    return closure_from_edges(instance.n, instance.known_deps)


def propagate(closure: DependencyClosure, v: Installation) -> Installation:
    """Close ``v`` under known dependencies: add every prerequisite of every member."""
    _check_width(v, closure.n)
    return Installation(closure.n, kernels.propagate_many(closure.n, [v.mask], closure.rows)[0])


def topological_order(n: int, deps: Iterable[Pair]) -> list[int]:
    """Prerequisites first; ties broken by ascending id."""
    waiting = [0] * n
    dependents: list[list[int]] = [[] for _ in range(n)]
    for q, p in deps:
        waiting[q] += 1
        dependents[p].append(q)
    ready = [p for p in range(n) if waiting[p] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        p = heapq.heappop(ready)
        order.append(p)
        for q in dependents[p]:
            waiting[q] -= 1
            if waiting[q] == 0:
                heapq.heappush(ready, q)
    if len(order) != n:
        stuck = sorted(p for p in range(n) if waiting[p])
        raise CycleError(f"dependency cycle through packages {stuck}")
    return order


def topological_sort(instance: RepositoryInstance) -> list[int]:
    return topological_order(instance.n, instance.known_deps)


def strongly_connected_components(n: int, deps: Iterable[Pair]) -> list[list[int]]:
    """Tarjan's algorithm, iterative.  Components come out in no particular order."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for q, p in deps:
        adj[q].append(p)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(adj[v]):
                work[-1] = (v, i + 1)
                w = adj[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(sorted(comp))
    return comps


def contract_sccs(
    packages: Sequence[Hashable] | int, deps: Iterable[tuple[Hashable, Hashable]]
) -> tuple[RepositoryInstance, dict[Hashable, int]]:
    """Collapse dependency cycles into super-packages.

    Super-package ids follow the position of each component's first member in
    ``packages``, so an acyclic input maps every package to its own position.
    """
    labels = list(range(packages)) if isinstance(packages, int) else list(packages)
    pos = {lab: i for i, lab in enumerate(labels)}
    if len(pos) != len(labels):
        raise ContractViolation("duplicate package labels")
    edges = []
    for q, p in deps:
        if q not in pos or p not in pos:
            raise ContractViolation(f"dependency ({q!r}, {p!r}) names an unknown package")
        if q != p:
            edges.append((pos[q], pos[p]))
    comps = sorted(strongly_connected_components(len(labels), edges), key=lambda c: c[0])
    comp_of = [0] * len(labels)
    for cid, comp in enumerate(comps):
        for i in comp:
            comp_of[i] = cid
    contracted = {(comp_of[q], comp_of[p]) for q, p in edges if comp_of[q] != comp_of[p]}
    instance = RepositoryInstance(n=len(comps), known_deps=contracted)
    return instance, {lab: comp_of[i] for lab, i in pos.items()}
