"""Cover-free families: randomized construction, exhaustive verification, size arithmetic.

An ``(n, a, b)`` family is a list of ``n``-bit vectors such that for every pair
of disjoint index sets ``S1, S2`` with ``|S1| = a`` and ``|S2| = b`` some vector
is 0 on all of ``S1`` and 1 on all of ``S2``.  Vectors are stored as int masks.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Protocol, Union

import numpy as np

from . import kernels
from .errors import GuardError, ParameterError

VERIFY_GUARD = 10**7
EXHAUSTIVE_MAX_N = 20

Counterexample = tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class CoverFreeFamily:
    n: int
    a: int
    b: int
    vectors: tuple[int, ...]
    seed: Optional[int] = None
    delta: Optional[float] = None
    construction: str = "randomized"

    def __post_init__(self) -> None:
        object.__setattr__(self, "vectors", tuple(int(v) for v in self.vectors))
        for v in self.vectors:
            if v < 0 or v >> self.n:
                raise ParameterError(f"vector {v:#x} wider than n={self.n}")

    @property
    def realized_size(self) -> int:
        return len(self.vectors)

    def rows(self) -> list[tuple[int, ...]]:
        return [tuple((v >> i) & 1 for i in range(self.n)) for v in self.vectors]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "a": self.a,
            "b": self.b,
            "seed": self.seed,
            "delta": self.delta,
            "construction": self.construction,
            "vectors": [format(v, "x") for v in self.vectors],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2) + "\n"

    @classmethod
    def from_json_dict(cls, doc: dict) -> "CoverFreeFamily":
        return cls(
            n=int(doc["n"]),
            a=int(doc["a"]),
            b=int(doc["b"]),
            vectors=tuple(int(v, 16) for v in doc["vectors"]),
            seed=doc.get("seed"),
            delta=doc.get("delta"),
            construction=doc.get("construction", "randomized"),
        )

    @classmethod
    def from_json(cls, text: str) -> "CoverFreeFamily":
        return cls.from_json_dict(json.loads(text))


def _check_params(n: int, a: int, b: int, delta: Optional[float] = None) -> None:
    if n < 0 or a < 0 or b < 0:
        raise ParameterError(f"negative CFF parameter in (n={n}, a={a}, b={b})")
    if a + b > n:
        raise ParameterError(f"a + b = {a + b} exceeds n = {n}")
    if delta is not None and not 0.0 < delta < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")


def union_bound_size(n: int, a: int, b: int, delta: float) -> int:
    """Number of random vectors after which every (S1, S2) pair is covered w.p. >= 1 - delta.

    M = ceil(ln(C(n,a) * C(n-a,b) / delta) / p) with p = (b/(a+b))^b * (a/(a+b))^a,
    the chance that one random vector covers a fixed pair.
    """
    _check_params(n, a, b, delta)
    if a == 0 or b == 0:
        return 1
    pairs = math.comb(n, a) * math.comb(n - a, b)
    p_cov = (b / (a + b)) ** b * (a / (a + b)) ** a
    return max(1, math.ceil((math.log(pairs) - math.log(delta)) / p_cov))


def build_randomized_cff(n: int, a: int, b: int, delta: float = 0.01, seed: int = 0) -> CoverFreeFamily:
    """Draw ``union_bound_size`` vectors with each bit set independently w.p. b/(a+b)."""
    _check_params(n, a, b, delta)
    if b == 0:
        return CoverFreeFamily(n, a, b, (0,), seed, delta, "degenerate")
    if a == 0:
        return CoverFreeFamily(n, a, b, ((1 << n) - 1,), seed, delta, "degenerate")
    m = union_bound_size(n, a, b, delta)
    rng = np.random.default_rng(seed)
    bits = rng.random((m, n)) < b / (a + b)
    return CoverFreeFamily(n, a, b, _pack_rows(bits), seed, delta, "randomized")


def _pack_rows(bits: np.ndarray) -> tuple[int, ...]:
    n = bits.shape[1]
    if n < 64:
        weights = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
        return tuple((bits.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64).tolist())
    weights = [1 << i for i in range(n)]
    return tuple(sum(w for w, bit in zip(weights, row) if bit) for row in bits.tolist())


def build_exhaustive_cff(n: int, a: int = 0, b: int = 0) -> CoverFreeFamily:
    """All ``2^n`` vectors; covers every disjoint pair of every size."""
    if n > EXHAUSTIVE_MAX_N:
        raise GuardError(f"exhaustive family needs 2^{n} vectors")
    return CoverFreeFamily(n, a, b, tuple(range(1 << n)), None, None, "exhaustive")


class CffConstruction(Protocol):
    """Seam for alternative constructions (deterministic ones can plug in here)."""

    def __call__(self, n: int, a: int, b: int, delta: float, seed: int) -> CoverFreeFamily: ...


def pair_count(n: int, a: int, b: int) -> int:
    return math.comb(n, a) * math.comb(n - a, b)


def verify_cff(
    family: CoverFreeFamily, a: Optional[int] = None, b: Optional[int] = None, *, guard: int = VERIFY_GUARD
) -> Union[bool, Counterexample]:
    """Exhaustively check the cover-free property.

    Returns True, or the lexicographically first uncovered ``(S1, S2)``.  ``a`` and
    ``b`` default to the family's own parameters.
    """
    n = family.n
    a = family.a if a is None else a
    b = family.b if b is None else b
    _check_params(n, a, b)
    if pair_count(n, a, b) > guard:
        raise GuardError(f"{pair_count(n, a, b)} (S1, S2) pairs exceed the guard {guard}")
    found = kernels.first_uncovered(n, family.vectors, a, b)
    return True if found is None else found


def covers(family: CoverFreeFamily, s1, s2) -> bool:
    """Whether some vector is 0 on every index of ``s1`` and 1 on every index of ``s2``."""
    m1 = sum(1 << i for i in s1)
    m2 = sum(1 << i for i in s2)
    return any(v & m1 == 0 and v & m2 == m2 for v in family.vectors)


def cff_union_size_estimate(n: int, d: int, u: int, c: int, delta: float) -> tuple[int, int]:
    """Union-bound sizes of the layered family set against the single flat family.

    layered = sum over i in [0, u] of M(n, d+c+(u-i)+1, i+2, delta/(u+1));
    single = M(n, d+c+u+1, u+2, delta).
    """
    if min(d, u, c) < 0:
        raise ParameterError("bounds must be non-negative")
    layered = sum(union_bound_size(n, d + c + (u - i) + 1, i + 2, delta / (u + 1)) for i in range(u + 1))
    single = union_bound_size(n, d + c + u + 1, u + 2, delta)
    return layered, single
