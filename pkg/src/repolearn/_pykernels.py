"""Pure-Python reference kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and results.  Masks are Python ints, bit ``i`` standing for package ``i``, so
this path also serves widths above 64.
"""
from __future__ import annotations

from itertools import combinations
from typing import Optional, Sequence


def evaluate(mask: int, req: Sequence[int], conflict_masks: Sequence[int], defect_mask: int) -> bool:
    if mask & defect_mask:
        return False
    m = mask
    while m:
        low = m & -m
        q = low.bit_length() - 1
        if req[q] & ~mask:
            return False
        m ^= low
    for cm in conflict_masks:
        if mask & cm == cm:
            return False
    return True


def evaluate_many(
    masks: Sequence[int], req: Sequence[int], conflict_masks: Sequence[int], defect_mask: int
) -> list[bool]:
    return [evaluate(m, req, conflict_masks, defect_mask) for m in masks]


def enumerate_successful(
    n: int, req: Sequence[int], conflict_masks: Sequence[int], defect_mask: int
) -> list[int]:
    out = []
    for mask in range(1 << n):
        if evaluate(mask, req, conflict_masks, defect_mask):
            out.append(mask)
    return out


def success_profiles(n: int, masks: Sequence[int]) -> tuple[list[int], list[int]]:
    """Per package: AND and OR over the given masks that contain it.

    Packages contained in no mask keep AND = all-ones and OR = 0.
    """
    full = (1 << n) - 1
    and_rows = [full] * n
    or_rows = [0] * n
    for mask in masks:
        m = mask
        while m:
            low = m & -m
            p = low.bit_length() - 1
            and_rows[p] &= mask
            or_rows[p] |= mask
            m ^= low
    return and_rows, or_rows


def propagate_many(vectors: Sequence[int], rows: Sequence[int]) -> list[int]:
    out = []
    for v in vectors:
        acc = v
        m = v
        while m:
            low = m & -m
            acc |= rows[low.bit_length() - 1]
            m ^= low
        out.append(acc)
    return out


def first_uncovered(
    vectors: Sequence[int], n: int, a: int, b: int
) -> Optional[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Lexicographically first disjoint (S1, S2) with no vector zero on S1 and one on S2."""
    if a == 0 and b == 0:
        return None
    # Transpose: per index, the set of vectors (as a bitset) having a 0 / 1 there.
    zero_sets = [0] * n
    one_sets = [0] * n
    for k, v in enumerate(vectors):
        bit = 1 << k
        for i in range(n):
            if (v >> i) & 1:
                one_sets[i] |= bit
            else:
                zero_sets[i] |= bit
    everything = (1 << len(vectors)) - 1
    for s1 in combinations(range(n), a):
        z = everything
        for i in s1:
            z &= zero_sets[i]
        rest = [i for i in range(n) if i not in s1]
        if not z:
            return s1, tuple(rest[:b])
        for s2 in combinations(rest, b):
            w = z
            for i in s2:
                w &= one_sets[i]
                if not w:
                    return s1, s2
    return None
