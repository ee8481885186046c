"""Hot-loop kernels with a compiled fast path and a pure-Python fallback.

The compiled module ``_ckernels`` is used when it was built and the width
fits in 64 bits; otherwise calls go to ``_pykernels``.  Set the environment
variable ``REPOLEARN_KERNELS=python`` to force the fallback.
"""
from __future__ import annotations

import contextlib
import os
from typing import Iterator, Optional, Sequence

import numpy as np

from . import _pykernels

try:  # pragma: no cover - depends on the build
    from . import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

COMPILED_AVAILABLE = _ckernels is not None
_FAST_WIDTH = 64


def _select(name: str) -> Optional[object]:
    if name == "python":
        return None
    if name in ("cython", "compiled"):
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _ckernels
    if name == "auto":
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


_active = _select(os.environ.get("REPOLEARN_KERNELS", "auto"))


def backend() -> str:
    return "cython" if _active is not None else "python"


def set_backend(name: str) -> None:
    global _active
    _active = _select(name)


@contextlib.contextmanager
def use_backend(name: str) -> Iterator[None]:
    global _active
    saved = _active
    _active = _select(name)
    try:
        yield
    finally:
        _active = saved


def _fast(n: int):
    return _active if (_active is not None and n <= _FAST_WIDTH) else None


def _u64(values: Sequence[int]) -> np.ndarray:
    return np.asarray(values, dtype=np.uint64).reshape(-1)


def evaluate_many(
    n: int, masks: Sequence[int], req: Sequence[int], conflict_masks: Sequence[int], defect_mask: int
) -> list[bool]:
    impl = _fast(n)
    if impl is None:
        return _pykernels.evaluate_many(masks, req, conflict_masks, defect_mask)
    out = impl.evaluate_many(_u64(masks), _u64(req), _u64(conflict_masks), defect_mask)
    return [bool(x) for x in out]


def enumerate_successful(
    n: int, req: Sequence[int], conflict_masks: Sequence[int], defect_mask: int
) -> list[int]:
    impl = _fast(n)
    if impl is None:
        return _pykernels.enumerate_successful(n, req, conflict_masks, defect_mask)
    return impl.enumerate_successful(n, _u64(req), _u64(conflict_masks), defect_mask).tolist()


def success_profiles(n: int, masks: Sequence[int]) -> tuple[list[int], list[int]]:
    impl = _fast(n)
    if impl is None:
        return _pykernels.success_profiles(n, masks)
    and_rows, or_rows = impl.success_profiles(n, _u64(masks))
    return and_rows.tolist(), or_rows.tolist()


def propagate_many(n: int, vectors: Sequence[int], rows: Sequence[int]) -> list[int]:
    impl = _fast(n)
    if impl is None:
        return _pykernels.propagate_many(vectors, rows)
    return impl.propagate_many(_u64(vectors), _u64(rows)).tolist()


def first_uncovered(
    n: int, vectors: Sequence[int], a: int, b: int
) -> Optional[tuple[tuple[int, ...], tuple[int, ...]]]:
    impl = _fast(n)
    if impl is None:
        return _pykernels.first_uncovered(vectors, n, a, b)
    return impl.first_uncovered(_u64(vectors), n, a, b)
