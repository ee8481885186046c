"""Adversarial repositories from the lower-bound constructions.

Each generator builds one concrete instance (0-based ids, layout documented
per function).  Sibling generators return the two scenarios an algorithm must
tell apart; their feedback differs only on a small witness set of
installations, which the test suite checks exhaustively.

Budgets are asserted at generation time through the truth oracle whenever
``n`` is small enough to enumerate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import ParameterError
from .model import RepositoryInstance
from .truth import GUARD_N, weak_relations


def _ceil_half(c: int) -> int:
    return (c + 1) // 2


def _path(ids: list[int]) -> set[tuple[int, int]]:
    """ids[j] depends on ids[j-1]."""
    return {(ids[j], ids[j - 1]) for j in range(1, len(ids))}


def _certify(inst: RepositoryInstance, *, d: Optional[int] = None, u: Optional[int] = None,
             c_max: Optional[int] = None) -> RepositoryInstance:
    if u is not None and len(inst.unknown_deps) > u:
        raise AssertionError(f"fixture has {len(inst.unknown_deps)} unknown deps, budget {u}")
    if inst.n <= GUARD_N and (d is not None or c_max is not None):
        report = weak_relations(inst)
        if d is not None and len(report.true_defects) > d:
            raise AssertionError(f"fixture has {len(report.true_defects)} defects, budget {d}")
        if c_max is not None and len(report.weak_conflict_pairs) > c_max:
            raise AssertionError(f"fixture has {len(report.weak_conflict_pairs)} weak conflicts, budget {c_max}")
    return inst


def path_root_defect(n: int, i: int) -> RepositoryInstance:
    """Path a_1 <- a_2 <- ... <- a_n (a_j is id j-1, each depends on its predecessor).

    a_1 secretly depends on a_i and a_{i+1} is a root defect, so the only
    nonempty successful installation is {a_1, ..., a_i}.
    """
    if not 1 <= i < n:
        raise ParameterError(f"need 1 <= i < n, got i={i}, n={n}")
    ids = list(range(n))
    unknown = {(0, i - 1)} if i > 1 else set()
    inst = RepositoryInstance(n, known_deps=_path(ids), unknown_deps=unknown, root_defects={i})
    return _certify(inst, u=1)


def path_root_defect_twin(n: int) -> RepositoryInstance:
    """Same path with a_1 as the root defect: only the empty installation succeeds."""
    if n < 1:
        raise ParameterError("need n >= 1")
    return RepositoryInstance(n, known_deps=_path(list(range(n))), root_defects={0})


def path_root_defect_pair(n: int, i: int) -> tuple[RepositoryInstance, RepositoryInstance]:
    return path_root_defect(n, i), path_root_defect_twin(n)


def star_defects(n: int, d: int, u: int, *, p_defective: bool = False) -> RepositoryInstance:
    """p = 0 secretly depends on a_1..a_u (ids 1..u); x_1..x_{d-1} (ids u+1..u+d-1) are root defects."""
    if d < 1 or u < 0 or u + d > n:
        raise ParameterError(f"need d >= 1 and u + d <= n, got n={n}, d={d}, u={u}")
    unknown = {(0, a) for a in range(1, u + 1)}
    defects = set(range(u + 1, u + d))
    if p_defective:
        defects.add(0)
    inst = RepositoryInstance(n, unknown_deps=unknown, root_defects=defects)
    return _certify(inst, d=d, u=u)


def star_defects_pair(n: int, d: int, u: int) -> tuple[RepositoryInstance, RepositoryInstance]:
    return star_defects(n, d, u), star_defects(n, d, u, p_defective=True)


def conflict_chain(n: int, d: int, u: int, c: int) -> RepositoryInstance:
    """p = 0 depends on a_1..a_u (ids 1..u); x_1..x_{d-1} follow as root defects;
    then b_1..b_h with h = ceil(c/2).  b_i conflicts with a_i for i < h and b_h
    conflicts with p, so every b_i ends up weakly conflicting with p.
    """
    h = _ceil_half(c)
    if c < 1 or d < 1:
        raise ParameterError("need c >= 1 and d >= 1")
    if c > 2 * u:
        raise ParameterError(f"need c <= 2u, got c={c}, u={u}")
    if u + d + h > n:
        raise ParameterError(f"need u + d + ceil(c/2) <= n, got {u + d + h} > {n}")
    a = list(range(1, u + 1))
    x = list(range(u + 1, u + d))
    b = list(range(u + d, u + d + h))
    conflicts = {(b[i], a[i]) for i in range(h - 1)} | {(b[h - 1], 0)}
    inst = RepositoryInstance(n, unknown_deps={(0, ai) for ai in a}, conflicts=conflicts, root_defects=set(x))
    return _certify(inst, d=d, u=u, c_max=c)


def conflict_chain_weak_count(c: int) -> int:
    """Weak conflicts of ``conflict_chain``: 2 per b_i with i < h, plus {b_h, p}."""
    return 2 * _ceil_half(c) - 1


def single_conflict_path(n: int, ell: int) -> RepositoryInstance:
    """p = 0 and a path a_1 <- ... <- a_{n-1} (a_i is id i); p conflicts with a_ell."""
    if not 1 <= ell <= n - 1:
        raise ParameterError(f"need 1 <= ell <= n-1, got ell={ell}, n={n}")
    inst = RepositoryInstance(n, known_deps=_path(list(range(1, n))), conflicts={(0, ell)})
    return _certify(inst, d=0, u=0)


def single_conflict_path_pair(n: int, ell: int) -> tuple[RepositoryInstance, RepositoryInstance]:
    if ell < 2:
        raise ParameterError("sibling needs ell >= 2")
    return single_conflict_path(n, ell), single_conflict_path(n, ell - 1)


def single_unknown_dep_path(n: int, i: int) -> RepositoryInstance:
    """Path a_1 <- ... <- a_n (a_j is id j-1) where a_i secretly depends on a_n.

    ``i = n`` would be a self-dependency and yields the plain path.
    """
    if not 1 <= i <= n:
        raise ParameterError(f"need 1 <= i <= n, got i={i}, n={n}")
    unknown = {(i - 1, n - 1)} if i < n else set()
    inst = RepositoryInstance(n, known_deps=_path(list(range(n))), unknown_deps=unknown)
    return _certify(inst, d=0, u=1, c_max=0)


def single_unknown_dep_path_pair(n: int, i: int) -> tuple[RepositoryInstance, RepositoryInstance]:
    return single_unknown_dep_path(n, i), single_unknown_dep_path(n, i + 1)


def full_learning_conflict_fan(n: int, d: int, u: int, c: int, *, q_conflict: bool = False) -> RepositoryInstance:
    """p = 0 depends on a_1..a_u; b_1..b_{c-1} conflict with p; x_1..x_d are root
    defects; q comes last.  With ``q_conflict`` p also conflicts with q."""
    if c < 1 or d < 0 or u < 0:
        raise ParameterError("need c >= 1 and d, u >= 0")
    need = 2 + u + (c - 1) + d
    if need > n:
        raise ParameterError(f"need {need} packages, got n={n}")
    a = list(range(1, u + 1))
    b = list(range(u + 1, u + c))
    x = list(range(u + c, u + c + d))
    q = u + c + d
    conflicts = {(bi, 0) for bi in b}
    if q_conflict:
        conflicts.add((0, q))
    inst = RepositoryInstance(n, unknown_deps={(0, ai) for ai in a}, conflicts=conflicts, root_defects=set(x))
    return _certify(inst, d=d, u=u, c_max=c)


def full_learning_conflict_fan_pair(n: int, d: int, u: int, c: int) -> tuple[RepositoryInstance, RepositoryInstance]:
    return full_learning_conflict_fan(n, d, u, c), full_learning_conflict_fan(n, d, u, c, q_conflict=True)


def conflict_fan_q(u: int, c: int, d: int) -> int:
    return u + c + d


def adaptive_lb_cycles(n: int, d: int, u: int) -> tuple[RepositoryInstance, RepositoryInstance]:
    """Two scenarios over P' = the first u+d ids.

    I:  defects A1 = P'[:d], a dependency cycle through A2 = P'[d:].
    II: defects B1 = P'[u:], a dependency cycle through B2 = P'[:u].
    A cycle over a single package has no edges.
    """
    if d < 1 or u < 1:
        raise ParameterError("need d >= 1 and u >= 1")
    if 2 * (u + d) > n:
        raise ParameterError(f"need 2(u+d) <= n, got n={n}")
    prime = list(range(u + d))
    a1, a2 = prime[:d], prime[d:]
    b2, b1 = prime[:u], prime[u:]
    first = RepositoryInstance(n, unknown_deps=_cycle(a2), root_defects=set(a1))
    second = RepositoryInstance(n, unknown_deps=_cycle(b2), root_defects=set(b1))
    return _certify(first, d=d, u=u), _certify(second, d=d, u=u)


def adaptive_lb_sets(d: int, u: int) -> dict[str, list[int]]:
    prime = list(range(u + d))
    return {"A1": prime[:d], "A2": prime[d:], "B1": prime[u:], "B2": prime[:u]}


def _cycle(ids: list[int]) -> set[tuple[int, int]]:
    if len(ids) < 2:
        return set()
    return {(ids[j], ids[(j + 1) % len(ids)]) for j in range(len(ids))}


# Registry -----------------------------------------------------------------


@dataclass(frozen=True)
class FixtureSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def build(self) -> RepositoryInstance:
        try:
            maker = _BUILDERS[self.kind]
        except KeyError:
            raise ParameterError(f"unknown fixture {self.kind!r}; choose from {sorted(_BUILDERS)}") from None
        return maker(self.params)

    def to_json(self) -> str:
        inst = self.build()
        return json.dumps(inst.to_json_dict(fixture={"kind": self.kind, "params": self.params}), indent=2) + "\n"


def _p(params: dict, key: str, default: Optional[int] = None) -> int:
    if key in params and params[key] is not None:
        return int(params[key])
    if default is None:
        raise ParameterError(f"fixture parameter {key!r} is required")
    return default


_BUILDERS: dict[str, Callable[[dict], RepositoryInstance]] = {
    "path_root_defect": lambda p: path_root_defect(_p(p, "n"), _p(p, "pivot", 1)),
    "path_root_defect_twin": lambda p: path_root_defect_twin(_p(p, "n")),
    "star_defects": lambda p: star_defects(_p(p, "n"), _p(p, "d", 1), _p(p, "u", 1)),
    "conflict_chain": lambda p: conflict_chain(_p(p, "n"), _p(p, "d", 1), _p(p, "u", 1), _p(p, "c", 1)),
    "single_conflict_path": lambda p: single_conflict_path(_p(p, "n"), _p(p, "pivot", 1)),
    "single_unknown_dep_path": lambda p: single_unknown_dep_path(_p(p, "n"), _p(p, "pivot", 1)),
    "full_learning_conflict_fan": lambda p: full_learning_conflict_fan(
        _p(p, "n"), _p(p, "d", 0), _p(p, "u", 0), _p(p, "c", 1)
    ),
    "adaptive_lb_cycles": lambda p: adaptive_lb_cycles(_p(p, "n"), _p(p, "d", 1), _p(p, "u", 1))[0],
}

FIXTURE_KINDS = tuple(sorted(_BUILDERS))


def build_fixture(kind: str, **params: int) -> RepositoryInstance:
    return FixtureSpec(kind, params).build()
